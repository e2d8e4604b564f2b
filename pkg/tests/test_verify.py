"""Best-response oracles, certification, and exhaustive enumeration."""

from __future__ import annotations

import pytest
from pytest import approx

import stopgames as sg
from stopgames import gamefile

from conftest import chain_tree, matching_field


def _forced_family_a(tree):
    rule = sg.constant_stopping_time(tree, min(1, tree.horizon))
    return sg.AdjustmentFamilyA(tuple(rule for _ in range(tree.horizon + 1)))


class TestBestResponse:
    def test_seq_player_two_replies_late(self, matching_tree, matching_payoffs):
        rho = sg.StrategyA(
            sg.constant_stopping_time(matching_tree, 0), _forced_family_a(matching_tree)
        )
        value, strategy = sg.best_response(matching_tree, matching_payoffs, "seq", 2, rho)
        assert value == approx(0.0, abs=1e-12)
        assert strategy.adjust.rules[0].realized(matching_tree) == (1,)

    def test_constant_payoff_any_mode(self):
        tree = chain_tree(2)
        field = sg.PayoffField.from_function(tree, lambda i, s, t, n: 0.9)
        rho = sg.StrategyA(
            sg.constant_stopping_time(tree, 0),
            sg.AdjustmentFamilyA(
                tuple(sg.constant_stopping_time(tree, min(t + 1, 2)) for t in range(3))
            ),
        )
        value, _ = sg.best_response(tree, field, "seq", 2, rho)
        assert value == approx(0.9, abs=1e-12)
        value, _ = sg.best_response(tree, field, "sim", 1, sg.as_mixed(rho))
        assert value == approx(0.9, abs=1e-12)

    def test_sim_vs_half_half_opponent(self, matching_tree, matching_payoffs):
        half = sg.MixedStrategyA(
            sg.RandomizedStoppingTime((0.5, 1.0)), _forced_family_a(matching_tree)
        )
        value, _ = sg.best_response(matching_tree, matching_payoffs, "sim", 1, half)
        assert value == approx(0.5, abs=1e-12)

    def test_class_mismatch(self, matching_tree, matching_payoffs):
        rho = sg.StrategyA(
            sg.constant_stopping_time(matching_tree, 0), _forced_family_a(matching_tree)
        )
        with pytest.raises(sg.GameSpecError, match="type"):
            sg.best_response(matching_tree, matching_payoffs, "seq", 1, rho)

    def test_dp_matches_pure_enumeration_seq(self):
        for seed in range(6):
            doc = gamefile.generate_random_game(2, 2, seed=seed)
            tree, field = doc.tree, doc.payoff_field()
            taus = sg.enumerate_strategies(tree, "b")
            fixed_tau = taus[seed % len(taus)]
            value, strategy = sg.best_response(tree, field, "seq", 1, fixed_tau)
            best = max(
                sg.payoff_pure(tree, field, "seq", rho, fixed_tau)[0]
                for rho in sg.enumerate_strategies(tree, "a")
            )
            assert value == approx(best, abs=1e-12)
            achieved = sg.payoff_pure(tree, field, "seq", strategy, fixed_tau)[0]
            assert achieved == approx(value, abs=1e-12)

            rhos = sg.enumerate_strategies(tree, "a")
            fixed_rho = rhos[seed % len(rhos)]
            value2, strategy2 = sg.best_response(tree, field, "seq", 2, fixed_rho)
            best2 = max(
                sg.payoff_pure(tree, field, "seq", fixed_rho, tau)[1] for tau in taus
            )
            assert value2 == approx(best2, abs=1e-12)
            achieved2 = sg.payoff_pure(tree, field, "seq", fixed_rho, strategy2)[1]
            assert achieved2 == approx(value2, abs=1e-12)

    def test_dp_matches_pure_enumeration_sim_vs_mixed(self):
        for seed in range(4):
            doc = gamefile.generate_random_game(2, 2, seed=40 + seed)
            tree, field = doc.tree, doc.payoff_field()
            bundle = sg.sim_processes(tree, field)
            probs = tuple(
                1.0 if tree.nodes[i].time == tree.horizon else 0.25 + 0.5 * ((i * 13) % 3) / 2.0
                for i in range(tree.n_nodes)
            )
            opponent = sg.MixedStrategyA(
                sg.RandomizedStoppingTime(probs), bundle.tau1_star
            )
            value, strategy = sg.best_response(tree, field, "sim", 1, opponent)
            best = max(
                sg.payoff_mixed_sim(tree, field, sg.as_mixed(rho), opponent)[0]
                for rho in sg.enumerate_strategies(tree, "a")
            )
            assert value == approx(best, abs=1e-12)
            achieved = sg.payoff_mixed_sim(tree, field, sg.as_mixed(strategy), opponent)[0]
            assert achieved == approx(value, abs=1e-12)

    def test_oracle_coherence_on_random_candidates(self):
        for seed in range(8):
            doc = gamefile.generate_random_game(3, 2, seed=900 + seed)
            tree, field = doc.tree, doc.payoff_field()
            sol = sg.seq_equilibrium(tree, field)
            # Perturb the candidate by forcing an immediate stop.
            candidate = (
                sg.StrategyA(sg.constant_stopping_time(tree, 0), sol.rho_star.adjust),
                sol.tau_star,
            )
            values = sg.payoff_pure(tree, field, "seq", *candidate)
            br1, _ = sg.best_response(tree, field, "seq", 1, candidate[1])
            br2, _ = sg.best_response(tree, field, "seq", 2, candidate[0])
            assert br1 >= values[0] - 1e-9
            assert br2 >= values[1] - 1e-9


class TestCheckEquilibrium:
    def test_seq_equilibrium_passes(self, matching_tree, matching_payoffs):
        sol = sg.seq_equilibrium(matching_tree, matching_payoffs)
        report = sg.check_equilibrium(
            matching_tree, matching_payoffs, "seq", (sol.rho_star, sol.tau_star)
        )
        assert report.passed
        assert report.gaps == approx((0.0, 0.0), abs=1e-12)

    def test_both_stop_now_fails_for_player_two(self, matching_tree, matching_payoffs):
        sure = sg.MixedStrategyA(
            sg.RandomizedStoppingTime((1.0, 1.0)), _forced_family_a(matching_tree)
        )
        report = sg.check_equilibrium(
            matching_tree, matching_payoffs, "sim", (sure, sure)
        )
        assert not report.passed
        assert report.values == (1.0, -1.0)
        assert report.gaps[0] == approx(0.0, abs=1e-12)
        assert report.gaps[1] == approx(1.0, abs=1e-12)

    def test_constant_game_any_profile_passes(self):
        tree = chain_tree(1)
        field = sg.PayoffField.from_function(tree, lambda i, s, t, n: 0.1)
        sure = sg.MixedStrategyA(
            sg.RandomizedStoppingTime((1.0, 1.0)), _forced_family_a(tree)
        )
        report = sg.check_equilibrium(tree, field, "sim", (sure, sure))
        assert report.passed
        assert report.gaps == approx((0.0, 0.0), abs=1e-12)


class TestEnumeration:
    def test_stopping_time_counts(self):
        chain = chain_tree(3)
        assert sg.count_stopping_times(chain) == 4
        assert sg.count_stopping_times(chain, min_level=2) == 2
        tree = gamefile.generate_random_game(2, 2, seed=0).tree
        assert sg.count_stopping_times(tree) == 5
        assert len(sg.enumerate_stopping_times(tree)) == 5

    def test_enumerated_stopping_times_are_canonical_and_distinct(self):
        tree = gamefile.generate_random_game(2, 2, seed=1).tree
        sts = sg.enumerate_stopping_times(tree)
        assert len({st.marks for st in sts}) == len(sts)
        for st in sts:
            assert sg.canonical_stopping_time(tree, st) == st

    def test_strategy_counts_match_materialization(self, matching_tree):
        assert sg.count_strategies(matching_tree, "a") == 2
        assert sg.count_strategies(matching_tree, "b") == 4
        assert len(sg.enumerate_strategies(matching_tree, "a")) == 2
        assert len(sg.enumerate_strategies(matching_tree, "b")) == 4

    def test_matching_game_table(self, matching_tree, matching_payoffs):
        result = sg.enumerate_oracle(matching_tree, matching_payoffs, "sim")
        assert len(result.strategies1) == 2
        assert len(result.strategies2) == 2
        payoffs = {
            result.payoffs[i][j] for i in range(2) for j in range(2)
        }
        assert payoffs == {(1.0, -1.0), (0.0, 0.0)}
        assert result.equilibria == ()

    def test_seq_table_has_equilibrium(self, matching_tree, matching_payoffs):
        result = sg.enumerate_oracle(matching_tree, matching_payoffs, "seq")
        assert len(result.strategies2) == 4
        assert result.equilibria

    def test_constant_game_everything_is_equilibrium(self):
        tree = chain_tree(1)
        field = sg.PayoffField.from_function(tree, lambda i, s, t, n: 2.0)
        result = sg.enumerate_oracle(tree, field, "seq")
        assert len(result.equilibria) == len(result.strategies1) * len(
            result.strategies2
        )

    def test_cap_exceeded_reports_count(self, matching_tree, matching_payoffs):
        with pytest.raises(sg.EnumerationCapError) as info:
            sg.enumerate_oracle(matching_tree, matching_payoffs, "seq", cap=7)
        assert info.value.count == 8
        assert info.value.cap == 7

    def test_enumerated_best_matches_oracle(self, matching_tree, matching_payoffs):
        result = sg.enumerate_oracle(matching_tree, matching_payoffs, "seq")
        for j, tau in enumerate(result.strategies2):
            br, _ = sg.best_response(matching_tree, matching_payoffs, "seq", 1, tau)
            table_best = max(
                result.payoffs[i][j][0] for i in range(len(result.strategies1))
            )
            assert br == approx(table_best, abs=1e-12)
