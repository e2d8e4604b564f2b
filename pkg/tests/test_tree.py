"""Event-tree construction, conditional expectation, and hitting times."""

from __future__ import annotations

import pytest
from pytest import approx

import stopgames as sg
from stopgames import gamefile

from conftest import chain_tree, path_expectation, three_node_tree


class TestBuildTree:
    def test_single_node_horizon_zero(self):
        tree = sg.build_tree({"horizon": 0, "nodes": [{"id": "r", "time": 0}]})
        assert tree.n_nodes == 1
        assert tree.horizon == 0
        assert tree.leaves == (0,)
        assert tree.leaf_probs == (1.0,)

    def test_three_node_tree(self):
        tree = three_node_tree()
        assert tree.n_nodes == 3
        assert [n.id for n in tree.nodes] == ["r", "a", "b"]
        assert tree.nodes[0].children == (1, 2)
        assert tree.leaf_probs == (0.5, 0.5)

    def test_canonical_order_by_time_then_id(self):
        tree = sg.build_tree(
            {
                "horizon": 1,
                "nodes": [
                    {"id": "z", "time": 1, "parent": "m", "prob": 0.4},
                    {"id": "m", "time": 0},
                    {"id": "a", "time": 1, "parent": "m", "prob": 0.6},
                ],
            }
        )
        assert [n.id for n in tree.nodes] == ["m", "a", "z"]

    def test_probability_sum_violation(self):
        with pytest.raises(sg.GameSpecError, match=r"sum to 1\.2 at root"):
            sg.build_tree(
                {
                    "horizon": 1,
                    "nodes": [
                        {"id": "root", "time": 0},
                        {"id": "n1", "time": 1, "parent": "root", "prob": 0.6},
                        {"id": "n2", "time": 1, "parent": "root", "prob": 0.6},
                    ],
                }
            )

    def test_orphan_node(self):
        with pytest.raises(sg.GameSpecError, match="orphan"):
            sg.build_tree(
                {
                    "horizon": 1,
                    "nodes": [
                        {"id": "r", "time": 0},
                        {"id": "a", "time": 1, "parent": "ghost", "prob": 1.0},
                    ],
                }
            )

    def test_time_inconsistency(self):
        with pytest.raises(sg.GameSpecError, match="time inconsistency"):
            sg.build_tree(
                {
                    "horizon": 2,
                    "nodes": [
                        {"id": "r", "time": 0},
                        {"id": "a", "time": 2, "parent": "r", "prob": 1.0},
                    ],
                }
            )

    def test_leaf_before_horizon(self):
        with pytest.raises(sg.GameSpecError, match="leaf before horizon"):
            sg.build_tree({"horizon": 1, "nodes": [{"id": "r", "time": 0}]})

    def test_duplicate_id(self):
        with pytest.raises(sg.GameSpecError, match="duplicate"):
            sg.build_tree(
                {
                    "horizon": 0,
                    "nodes": [{"id": "r", "time": 0}, {"id": "r", "time": 0}],
                }
            )

    def test_two_roots(self):
        with pytest.raises(sg.GameSpecError, match="exactly one root"):
            sg.build_tree(
                {
                    "horizon": 0,
                    "nodes": [{"id": "r", "time": 0}, {"id": "s", "time": 0}],
                }
            )

    def test_leaf_probabilities_sum_to_one(self):
        for seed in range(5):
            tree = gamefile.generate_random_game(3, 3, seed=seed).tree
            assert sum(tree.leaf_probs) == approx(1.0, abs=1e-12)


class TestConditionalExpectation:
    def test_two_leaf_average(self):
        tree = three_node_tree()
        x = sg.LeveledValue.build(tree, {1}, {1: 2.0, 2: 4.0})
        assert sg.conditional_expectation(tree, x, 0) == approx(3.0, abs=1e-12)

    def test_identity_at_same_level(self):
        tree = three_node_tree()
        x = sg.LeveledValue.build(tree, {1}, {1: 2.0, 2: 4.0})
        assert sg.conditional_expectation(tree, x, 1) == 2.0

    def test_tower_property_against_path_sum(self):
        for seed in range(10):
            tree = gamefile.generate_random_game(3, 2, seed=seed).tree
            doc = gamefile.generate_random_game(3, 2, seed=seed)
            x = doc.payoff_field().level_slice(1, 3, 3)
            nested = sg.expectation_to_level(
                tree, sg.expectation_to_level(tree, x, 2), 0
            )
            direct = sg.expectation_to_level(tree, x, 0)
            oracle = path_expectation(tree, x, 0)
            assert nested.values[0] == approx(direct.values[0], abs=1e-12)
            assert direct.values[0] == approx(oracle, abs=1e-12)

    def test_tower_property_all_level_pairs(self):
        doc = gamefile.generate_random_game(4, 2, seed=77)
        tree = doc.tree
        x = doc.payoff_field().level_slice(2, 4, 4)
        for t in range(5):
            for s in range(t + 1):
                nested = sg.expectation_to_level(
                    tree, sg.expectation_to_level(tree, x, t), s
                )
                direct = sg.expectation_to_level(tree, x, s)
                for idx in tree.levels[s]:
                    assert nested.values[idx] == approx(direct.values[idx], abs=1e-12)

    def test_constant_preservation(self):
        tree = gamefile.generate_random_game(3, 3, seed=1).tree
        x = sg.LeveledValue.from_function(tree, {3}, lambda idx: 2.5)
        out = sg.expectation_to_level(tree, x, 0)
        assert out.values[0] == approx(2.5, abs=1e-12)

    def test_level_mismatch(self):
        tree = three_node_tree()
        x = sg.LeveledValue.build(tree, {0}, {0: 1.0})
        with pytest.raises(sg.GameSpecError, match="level"):
            sg.conditional_expectation(tree, x, 1)

    def test_missing_value_rejected_at_build(self):
        tree = three_node_tree()
        with pytest.raises(sg.GameSpecError, match="missing value"):
            sg.LeveledValue.build(tree, {1}, {1: 2.0})


class TestHittingTime:
    def test_flag_at_root(self):
        tree = three_node_tree()
        zero = sg.constant_stopping_time(tree, 0)
        res = sg.hitting_time(tree, lambda i: i == 0, zero)
        assert res.stop.realized(tree) == (0, 0)
        assert res.clamped == frozenset()

    def test_flag_nowhere_clamps_everywhere(self):
        tree = three_node_tree()
        zero = sg.constant_stopping_time(tree, 0)
        res = sg.hitting_time(tree, lambda i: False, zero)
        assert res.stop.realized(tree) == (1, 1)
        assert res.clamped == frozenset({0, 1})

    def test_flag_on_one_branch(self):
        tree = three_node_tree()
        zero = sg.constant_stopping_time(tree, 0)
        res = sg.hitting_time(tree, lambda i: tree.nodes[i].id == "a", zero)
        assert res.stop.realized(tree) == (1, 1)
        assert res.clamped == frozenset({1})

    def test_respects_start(self):
        tree = chain_tree(3)
        start = sg.constant_stopping_time(tree, 2)
        res = sg.hitting_time(tree, lambda i: True, start)
        assert res.stop.realized(tree) == (2,)

    def test_accepts_flag_sequence(self):
        tree = chain_tree(2)
        zero = sg.constant_stopping_time(tree, 0)
        res = sg.hitting_time(tree, [False, True, False], zero)
        assert res.stop.realized(tree) == (1,)

    def test_adapted_and_not_earlier_than_start(self):
        doc = gamefile.generate_random_game(4, 2, seed=3)
        tree = doc.tree
        start = sg.constant_stopping_time(tree, 2)
        res = sg.hitting_time(tree, lambda i: (i * 7) % 3 == 0, start)
        realized = res.stop.realized(tree)
        start_times = start.realized(tree)
        assert all(r >= s for r, s in zip(realized, start_times))
        # Adapted: rebuilding from realized times must succeed.
        rebuilt = sg.stopping_time_from_realized(tree, realized)
        assert rebuilt.realized(tree) == realized


class TestStoppingTimeUtilities:
    def test_canonical_form_idempotent(self):
        tree = chain_tree(2)
        st = sg.StoppingTime((True, True, True))
        canonical = sg.canonical_stopping_time(tree, st)
        assert canonical.marks == (True, False, True)
        assert sg.canonical_stopping_time(tree, canonical) == canonical

    def test_from_realized_rejects_non_adapted(self):
        tree = three_node_tree()
        # One path stops at the root, the other at time 1: the root decision
        # would have to differ across paths through it.
        with pytest.raises(sg.GameSpecError, match="not adapted"):
            sg.stopping_time_from_realized(tree, [0, 1])

    def test_validate_requires_horizon_stop(self):
        tree = chain_tree(1)
        with pytest.raises(sg.GameSpecError, match="must stop"):
            sg.StoppingTime((True, False)).validate(tree)
