"""Shared fixtures and independent oracles for the test suite."""

from __future__ import annotations

import pytest

import stopgames as sg
from stopgames import gamefile


def chain_tree(horizon: int) -> sg.EventTree:
    """Deterministic single-branch tree (one path, edge probabilities 1)."""
    nodes = [{"id": "0:0", "time": 0}]
    for t in range(1, horizon + 1):
        nodes.append({"id": f"{t}:0", "time": t, "parent": f"{t-1}:0", "prob": 1.0})
    return sg.build_tree({"horizon": horizon, "nodes": nodes})


def three_node_tree(p: float = 0.5) -> sg.EventTree:
    """Root with two leaves at time 1, probabilities (p, 1-p)."""
    return sg.build_tree(
        {
            "horizon": 1,
            "nodes": [
                {"id": "r", "time": 0},
                {"id": "a", "time": 1, "parent": "r", "prob": p},
                {"id": "b", "time": 1, "parent": "r", "prob": 1.0 - p},
            ],
        }
    )


def matching_field(tree: sg.EventTree) -> sg.PayoffField:
    """One-period counterexample payoffs: player 1 wants matching stop
    times, player 2 wants a mismatch."""
    return sg.PayoffField.from_function(
        tree, lambda i, s, t, n: (1.0 if s == t else 0.0) * (1.0 if i == 1 else -1.0)
    )


def path_expectation(tree: sg.EventTree, x: sg.LeveledValue, node: int) -> float:
    """Independent conditional-expectation oracle: explicit sum over the
    level-u descendants of `node`, with edge probabilities multiplied along
    each downward path (no backward recursion)."""
    (u,) = x.levels
    t = tree.nodes[node].time
    # The downward path from `node` to each level-u descendant is unique, so
    # collecting one probability product per descendant gives the exact sum.
    weights: dict[int, float] = {}
    for pos in tree.leaves_under[node]:
        path = tree.paths[pos]
        prob = 1.0
        for lev in range(t + 1, u + 1):
            prob *= tree.nodes[path[lev]].edge_prob
        weights[path[u]] = prob
    return sum(p * x.values[m] for m, p in weights.items())


def brute_force_dynkin(tree: sg.EventTree, f: sg.LeveledValue, g: sg.LeveledValue):
    """Exhaustive maximin/minimax over all stopping-time pairs of the
    first-stop payoff: f at the first player's stop when not later, else g
    at the second player's."""
    sts = sg.enumerate_stopping_times(tree)
    realized = [st.realized(tree) for st in sts]

    def payoff(ri: int, ti: int) -> float:
        total = 0.0
        for pos, prob in enumerate(tree.leaf_probs):
            r = realized[ri][pos]
            t = realized[ti][pos]
            if r <= t:
                total += prob * f.values[tree.paths[pos][r]]
            else:
                total += prob * g.values[tree.paths[pos][t]]
        return total

    table = [[payoff(i, j) for j in range(len(sts))] for i in range(len(sts))]
    maximin = max(min(row) for row in table)
    minimax = min(max(table[i][j] for i in range(len(sts))) for j in range(len(sts)))
    return maximin, minimax


def stopped_submartingale_ok(
    tree: sg.EventTree,
    v: sg.LeveledValue,
    stop: sg.StoppingTime,
    tol: float = 1e-9,
) -> bool:
    """Check E_t[v_{(t+1) stopped}] >= v_{t stopped} at every internal node,
    where the process freezes at the stop rule's first stop."""
    frozen = [0.0] * tree.n_nodes
    halted = [False] * tree.n_nodes
    for node in tree.nodes:
        idx = node.index
        parent_halted = node.parent is not None and halted[node.parent]
        if parent_halted:
            frozen[idx] = frozen[node.parent]
            halted[idx] = True
        elif stop.marks[idx]:
            frozen[idx] = v.values[idx]
            halted[idx] = True
        else:
            frozen[idx] = v.values[idx]
    for node in tree.nodes:
        if not node.children:
            continue
        cont = sum(p * frozen[c] for c, p in zip(node.children, node.child_probs))
        if cont < frozen[node.index] - tol:
            return False
    return True


@pytest.fixture(scope="session")
def matching_doc() -> gamefile.GameDocument:
    return gamefile.load_bundled("matching_times")


@pytest.fixture(scope="session")
def matching_tree(matching_doc) -> sg.EventTree:
    return matching_doc.tree


@pytest.fixture(scope="session")
def matching_payoffs(matching_doc) -> sg.PayoffField:
    return matching_doc.payoff_field()
