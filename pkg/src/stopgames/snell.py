"""Optimal stopping on event trees via backward induction.

Computes the value envelope of a one-player stopping problem together with
its earliest optimal stopping rule.  The search window either includes the
query time ("inclusive") or starts strictly after it ("strict"); at the
horizon the strict window degenerates to the horizon itself, so a forced
stop is always available.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Literal

from .errors import GameSpecError
from .strategies import AdjustmentFamilyA, AdjustmentFamilyB, PayoffField
from .tree import EventTree, LeveledValue, StoppingTime

Window = Literal["inclusive", "strict"]
Direction = Literal["max", "min"]

#: Absolute tolerance for "reward equals envelope" when extracting the
#: earliest optimizer.  Loose enough for accumulated rounding on deep trees,
#: tight enough not to produce false stops for well-separated payoffs.
OPTIMIZER_TOL = 1e-9


@dataclass(frozen=True)
class SnellResult:
    """Value, earliest optimizer, and envelope of one stopping problem."""

    level: int
    window: Window
    direction: Direction
    value: LeveledValue
    optimizer: StoppingTime
    envelope: LeveledValue


def snell(
    tree: EventTree,
    reward: Callable[[int, int], float],
    t: int,
    window: Window,
    direction: Direction,
) -> SnellResult:
    """Solve one optimal stopping problem rooted at level t.

    ``reward(u, node)`` is the payoff of stopping at a level-u node.  The
    envelope satisfies S_T = W_T and S_u = opt(W_u, E_u[S_{u+1}]) down to the
    window start; the value at a level-t node is S_t (inclusive window) or
    the one-step expectation of the envelope (strict window).  The optimizer
    stops at the first window node where the reward meets the envelope.
    """
    if window not in ("inclusive", "strict"):
        raise GameSpecError(f"unknown window {window!r}")
    if direction not in ("max", "min"):
        raise GameSpecError(f"unknown direction {direction!r}")
    T = tree.horizon
    if not 0 <= t <= T:
        raise GameSpecError(f"level {t} outside 0..{T}")
    start = t if window == "inclusive" else min(t + 1, T)
    use_max = direction == "max"

    env: dict[int, float] = {}
    marks = [False] * tree.n_nodes
    for u in range(T, start - 1, -1):
        for idx in tree.levels[u]:
            w = reward(u, idx)
            if w != w:
                raise GameSpecError(
                    f"reward missing at node {tree.nodes[idx].id}"
                )
            if u == T:
                s = w
            else:
                node = tree.nodes[idx]
                cont = sum(
                    p * env[c] for c, p in zip(node.children, node.child_probs)
                )
                s = max(w, cont) if use_max else min(w, cont)
            env[idx] = s
            if abs(w - s) <= OPTIMIZER_TOL:
                marks[idx] = True
    for leaf in tree.leaves:
        marks[leaf] = True

    if window == "inclusive" or t == T:
        value = {idx: env[idx] for idx in tree.levels[t]}
    else:
        value = {}
        for idx in tree.levels[t]:
            node = tree.nodes[idx]
            value[idx] = sum(
                p * env[c] for c, p in zip(node.children, node.child_probs)
            )

    return SnellResult(
        level=t,
        window=window,
        direction=direction,
        value=LeveledValue(frozenset({t}), value),
        optimizer=StoppingTime(tuple(marks)),
        envelope=LeveledValue(frozenset(range(start, T + 1)), env),
    )


@dataclass(frozen=True)
class ReactionValue:
    """One-sided stopping values against every possible opponent stop time.

    ``process`` collects, per node, the value of the stopping problem rooted
    at that node's own level; ``family`` packages the earliest optimizers as
    an adjustment family (type A for strict windows, type B for inclusive
    ones); ``results`` keeps the full per-level solutions.
    """

    process: LeveledValue
    family: AdjustmentFamilyA | AdjustmentFamilyB
    results: tuple[SnellResult, ...]


def reaction_value(
    tree: EventTree,
    field: PayoffField,
    player: int,
    side: Literal["first", "second"],
    window: Window,
    direction: Direction,
) -> ReactionValue:
    """Solve, for every t, the stopping problem in one payoff argument.

    ``side="first"`` optimizes the first argument of the player's payoff
    (rewards U(u, t) over stop times u); ``side="second"`` optimizes the
    second argument (rewards U(t, u)).
    """
    if player not in (1, 2):
        raise GameSpecError(f"unknown player {player}")
    if side not in ("first", "second"):
        raise GameSpecError(f"unknown side {side!r}")
    results = []
    process: dict[int, float] = {}
    for t in range(tree.horizon + 1):
        if side == "first":
            reward = lambda u, idx: field.value(player, u, t, idx)
        else:
            reward = lambda u, idx: field.value(player, t, u, idx)
        res = snell(tree, reward, t, window, direction)
        results.append(res)
        process.update(res.value.values)
    rules = tuple(res.optimizer for res in results)
    family: AdjustmentFamilyA | AdjustmentFamilyB
    if window == "strict":
        family = AdjustmentFamilyA(rules)
    else:
        family = AdjustmentFamilyB(rules)
    return ReactionValue(
        process=LeveledValue(frozenset(range(tree.horizon + 1)), process),
        family=family,
        results=tuple(results),
    )
