"""Exact best-response oracles, equilibrium certification, and exhaustive
enumeration on small instances.

Best responses are computed by dynamic programming over the full strategy
class of one player, holding the opponent fixed: after the opponent's
observed stop the optimal adjustment is a one-sided stopping problem, and
the initial rule solves an optimal stopping problem whose stop reward
accounts for the opponent's (possibly randomized) stop status.  Against a
fixed behavioral opponent the payoff is multilinear in the player's own
per-node stop probabilities, so a pure best response always exists and the
DP over pure strategies is exact for mixed deviations as well.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

from .errors import EnumerationCapError, GameSpecError, SolverDefectError
from .snell import reaction_value
from .strategies import (
    AdjustmentFamilyA,
    AdjustmentFamilyB,
    MixedStrategyA,
    PayoffField,
    StrategyA,
    StrategyB,
    _payoff_pure_core,
    expected_at_stop,
    payoff_mixed_sim,
    payoff_pure,
)
from .tree import EventTree, StoppingTime

#: A best response may fall short of the candidate's own value only by noise.
ORACLE_SLACK = 1e-9


def _stop_allowed(tree: EventTree, not_before: StoppingTime | None) -> tuple[bool, ...]:
    if not_before is None:
        return tuple([True] * tree.n_nodes)
    return tree.prefix_stopped(not_before.marks)


def _best_response_sim(
    tree: EventTree,
    field: PayoffField,
    player: int,
    opponent: MixedStrategyA,
    not_before: StoppingTime | None,
) -> tuple[float, StrategyA]:
    opponent.validate(tree)
    T = tree.horizon
    side = "first" if player == 1 else "second"
    own = reaction_value(tree, field, player, side, "strict", "max")

    # Payoff when this player stops alone at t and the opponent adjusts.
    alone: list[list[float]] = []
    for t in range(T + 1):
        rule = opponent.adjust.rules[t]
        if player == 1:
            reward = lambda m: field.value(1, t, tree.nodes[m].time, m)
        else:
            reward = lambda m: field.value(2, tree.nodes[m].time, t, m)
        alone.append(expected_at_stop(tree, rule, reward))

    allowed = _stop_allowed(tree, not_before)
    values = [0.0] * tree.n_nodes
    marks = [False] * tree.n_nodes
    for t in range(T, -1, -1):
        adj = own.results[t].value.values
        for idx in tree.levels[t]:
            if t == T:
                values[idx] = field.value(player, T, T, idx)
                marks[idx] = True
                continue
            node = tree.nodes[idx]
            q = opponent.initial.probs[idx]
            tie = field.value(player, t, t, idx)
            stop_v = q * tie + (1.0 - q) * alone[t][idx]
            cont = sum(p * values[c] for c, p in zip(node.children, node.child_probs))
            cont_v = q * adj[idx] + (1.0 - q) * cont
            if allowed[idx] and stop_v >= cont_v:
                values[idx] = stop_v
                marks[idx] = True
            else:
                values[idx] = cont_v
    return values[0], StrategyA(StoppingTime(tuple(marks)), own.family)


def _best_response_seq_p1(
    tree: EventTree,
    field: PayoffField,
    opponent: StrategyB,
    not_before: StoppingTime | None,
) -> tuple[float, StrategyA]:
    opponent.validate(tree)
    T = tree.horizon
    own = reaction_value(tree, field, 1, "first", "strict", "max")

    stop_reward: list[list[float]] = []
    for t in range(T + 1):
        rule = opponent.adjust.rules[t]
        stop_reward.append(
            expected_at_stop(tree, rule, lambda m: field.value(1, t, tree.nodes[m].time, m))
        )

    allowed = _stop_allowed(tree, not_before)
    opp_marks = opponent.initial.marks
    values = [0.0] * tree.n_nodes
    marks = [False] * tree.n_nodes
    for t in range(T, -1, -1):
        adj = own.results[t].value.values
        for idx in tree.levels[t]:
            if t == T:
                values[idx] = stop_reward[T][idx]
                marks[idx] = True
                continue
            node = tree.nodes[idx]
            if opp_marks[idx]:
                alt = adj[idx]
            else:
                alt = sum(p * values[c] for c, p in zip(node.children, node.child_probs))
            if allowed[idx] and stop_reward[t][idx] >= alt:
                values[idx] = stop_reward[t][idx]
                marks[idx] = True
            else:
                values[idx] = alt
    return values[0], StrategyA(StoppingTime(tuple(marks)), own.family)


def _best_response_seq_p2(
    tree: EventTree,
    field: PayoffField,
    opponent: StrategyA,
    not_before: StoppingTime | None,
) -> tuple[float, StrategyB]:
    opponent.validate(tree)
    T = tree.horizon
    own = reaction_value(tree, field, 2, "second", "inclusive", "max")

    stop_reward: list[list[float]] = []
    for t in range(T + 1):
        rule = opponent.adjust.rules[t]
        stop_reward.append(
            expected_at_stop(tree, rule, lambda m: field.value(2, tree.nodes[m].time, t, m))
        )

    allowed = _stop_allowed(tree, not_before)
    opp_marks = opponent.initial.marks
    values = [0.0] * tree.n_nodes
    marks = [False] * tree.n_nodes
    for t in range(T, -1, -1):
        resp = own.results[t].value.values
        for idx in tree.levels[t]:
            if opp_marks[idx]:
                # The opponent stops here first; whatever the initial rule
                # does, this player answers through her adjustment rule.
                values[idx] = resp[idx]
                marks[idx] = tree.nodes[idx].time == T
                continue
            node = tree.nodes[idx]
            cont = sum(p * values[c] for c, p in zip(node.children, node.child_probs))
            if allowed[idx] and stop_reward[t][idx] >= cont:
                values[idx] = stop_reward[t][idx]
                marks[idx] = True
            else:
                values[idx] = cont
    return values[0], StrategyB(StoppingTime(tuple(marks)), own.family)


def best_response(
    tree: EventTree,
    field: PayoffField,
    mode: str,
    player: int,
    opponent,
    not_before: StoppingTime | None = None,
) -> tuple[float, StrategyA | StrategyB]:
    """Exact optimum over one player's full strategy class.

    ``opponent`` must match the mode: a mixed type-A strategy in the
    simultaneous game, and in the sequential game a type-B strategy when
    player 1 responds or a type-A strategy when player 2 responds.
    ``not_before`` restricts the responder's initial rule to stop no earlier
    than the given stopping time (the adjustment stays unrestricted).
    Returns the optimal value and one maximizing strategy.
    """
    if player not in (1, 2):
        raise GameSpecError(f"unknown player {player}")
    if mode == "sim":
        if not isinstance(opponent, MixedStrategyA):
            raise GameSpecError("simultaneous best response needs a mixed type-A opponent")
        return _best_response_sim(tree, field, player, opponent, not_before)
    if mode == "seq":
        if player == 1:
            if not isinstance(opponent, StrategyB):
                raise GameSpecError("player 1's sequential opponent must be type B")
            return _best_response_seq_p1(tree, field, opponent, not_before)
        if not isinstance(opponent, StrategyA):
            raise GameSpecError("player 2's sequential opponent must be type A")
        return _best_response_seq_p2(tree, field, opponent, not_before)
    raise GameSpecError(f"unknown mode {mode!r}")


@dataclass(frozen=True)
class EquilibriumReport:
    """Certification of a candidate profile by exact best responses."""

    mode: str
    values: tuple[float, float]
    br_values: tuple[float, float]
    gaps: tuple[float, float]
    eps: float
    passed: bool


def check_equilibrium(
    tree: EventTree,
    field: PayoffField,
    mode: str,
    profile: tuple,
    eps: float = 1e-9,
    not_before: StoppingTime | None = None,
) -> EquilibriumReport:
    """Run both players' best responses against a candidate profile.

    The profile passes when neither player can improve by more than ``eps``.
    Mode ``"zs"`` checks a zero-sum sequential profile, restricting initial
    rules by ``not_before``.
    """
    rho, tau = profile
    if mode == "sim":
        values = payoff_mixed_sim(tree, field, rho, tau)
        br_mode = "sim"
    elif mode in ("seq", "zs"):
        values = payoff_pure(tree, field, "seq", rho, tau)
        br_mode = "seq"
    else:
        raise GameSpecError(f"unknown mode {mode!r}")
    br1, _ = best_response(tree, field, br_mode, 1, tau, not_before)
    br2, _ = best_response(tree, field, br_mode, 2, rho, not_before)
    gaps = (br1 - values[0], br2 - values[1])
    for player, gap in enumerate(gaps, start=1):
        if gap < -ORACLE_SLACK:
            raise SolverDefectError(
                f"best response for player {player} fell {-gap:g} below the "
                "candidate value"
            )
    return EquilibriumReport(
        mode=mode,
        values=values,
        br_values=(br1, br2),
        gaps=gaps,
        eps=eps,
        passed=gaps[0] <= eps and gaps[1] <= eps,
    )


def count_stopping_times(tree: EventTree, min_level: int = 0) -> int:
    """Number of distinct stopping times realizing times >= min_level."""
    memo: dict[int, int] = {}

    def count(idx: int) -> int:
        if idx in memo:
            return memo[idx]
        node = tree.nodes[idx]
        if not node.children:
            result = 1
        else:
            prod = 1
            for c in node.children:
                prod *= count(c)
            result = 1 + prod
        memo[idx] = result
        return result

    total = 1
    for idx in tree.levels[min(min_level, tree.horizon)]:
        total *= count(idx)
    return total


def enumerate_stopping_times(
    tree: EventTree, min_level: int = 0, cap: int | None = None
) -> list[StoppingTime]:
    """All stopping times with realized times >= min_level, canonical form."""
    min_level = min(min_level, tree.horizon)
    if cap is not None:
        n = count_stopping_times(tree, min_level)
        if n > cap:
            raise EnumerationCapError(n, cap)

    memo: dict[int, list[tuple[int, ...]]] = {}

    def antichains(idx: int) -> list[tuple[int, ...]]:
        if idx in memo:
            return memo[idx]
        node = tree.nodes[idx]
        out: list[tuple[int, ...]] = [(idx,)]
        if node.children:
            for combo in itertools.product(*[antichains(c) for c in node.children]):
                out.append(tuple(itertools.chain.from_iterable(combo)))
        memo[idx] = out
        return out

    result = []
    for combo in itertools.product(*[antichains(m) for m in tree.levels[min_level]]):
        stops = set(itertools.chain.from_iterable(combo))
        stops.update(tree.leaves)
        result.append(
            StoppingTime(tuple(i in stops for i in range(tree.n_nodes)))
        )
    return result


def count_strategies(tree: EventTree, kind: str, min_initial_time: int = 0) -> int:
    """Cardinality of the type-A or type-B pure strategy class."""
    T = tree.horizon
    total = count_stopping_times(tree, min_initial_time)
    for t in range(T + 1):
        floor = min(t + 1, T) if kind == "a" else t
        total *= count_stopping_times(tree, floor)
    return total


def enumerate_strategies(
    tree: EventTree,
    kind: str,
    cap: int | None = None,
    min_initial_time: int = 0,
) -> list[StrategyA] | list[StrategyB]:
    """All pure strategies of one class, canonical components throughout."""
    if kind not in ("a", "b"):
        raise GameSpecError(f"unknown strategy kind {kind!r}")
    if cap is not None:
        n = count_strategies(tree, kind, min_initial_time)
        if n > cap:
            raise EnumerationCapError(n, cap)
    T = tree.horizon
    initials = enumerate_stopping_times(tree, min_initial_time)
    per_t = []
    for t in range(T + 1):
        floor = min(t + 1, T) if kind == "a" else t
        per_t.append(enumerate_stopping_times(tree, floor))
    strategies: list = []
    for initial in initials:
        for rules in itertools.product(*per_t):
            if kind == "a":
                strategies.append(StrategyA(initial, AdjustmentFamilyA(tuple(rules))))
            else:
                strategies.append(StrategyB(initial, AdjustmentFamilyB(tuple(rules))))
    return strategies


@dataclass(frozen=True)
class EnumerationResult:
    """Exhaustive payoff table over all pure profiles plus its Nash set."""

    mode: str
    strategies1: tuple
    strategies2: tuple
    payoffs: tuple[tuple[tuple[float, float], ...], ...]
    equilibria: tuple[tuple[int, int], ...]
    deviation_tol: float


def enumerate_oracle(
    tree: EventTree,
    field: PayoffField,
    mode: str,
    cap: int = 1_000_000,
    min_initial_time: int = 0,
    deviation_tol: float = 1e-9,
) -> EnumerationResult:
    """Tabulate every pure profile and mark the pure Nash equilibria.

    Refuses to run when the profile count exceeds ``cap``, reporting the
    count.  A profile is marked Nash when neither player's best unilateral
    deviation gains more than ``deviation_tol``.
    """
    if mode not in ("sim", "seq"):
        raise GameSpecError(f"unknown mode {mode!r}")
    kind2 = "a" if mode == "sim" else "b"
    n1 = count_strategies(tree, "a", min_initial_time)
    n2 = count_strategies(tree, kind2, min_initial_time)
    if n1 * n2 > cap:
        raise EnumerationCapError(n1 * n2, cap)
    strategies1 = enumerate_strategies(tree, "a", min_initial_time=min_initial_time)
    strategies2 = enumerate_strategies(tree, kind2, min_initial_time=min_initial_time)

    # Enumerated strategies are canonical by construction; skip per-profile
    # class validation in the table loop.
    payoffs = [
        [_payoff_pure_core(tree, field, mode, s1, s2) for s2 in strategies2]
        for s1 in strategies1
    ]
    best1 = [max(payoffs[i][j][0] for i in range(n1)) for j in range(n2)]
    best2 = [max(payoffs[i][j][1] for j in range(n2)) for i in range(n1)]
    equilibria = [
        (i, j)
        for i in range(n1)
        for j in range(n2)
        if payoffs[i][j][0] >= best1[j] - deviation_tol
        and payoffs[i][j][1] >= best2[i] - deviation_tol
    ]
    return EnumerationResult(
        mode=mode,
        strategies1=tuple(strategies1),
        strategies2=tuple(strategies2),
        payoffs=tuple(tuple(row) for row in payoffs),
        equilibria=tuple(equilibria),
        deviation_tol=deviation_tol,
    )
