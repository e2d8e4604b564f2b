"""Mixed equilibrium for the simultaneous-move stopping game.

The strategy game reduces to a stopping game over six adapted processes:
the payoffs when one player stops first and the other answers optimally
(X, Y), and the tie payoffs (Z).  A behavioral equilibrium of that reduced
game is built by backward induction, solving one 2x2 bimatrix stage game
per node: stop/continue for each player, with the continuation values as
the (continue, continue) entries.  Composing the stage equilibria with the
one-sided optimizer families yields a mixed equilibrium of the original
game, which is then certified by the best-response oracle.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import SolverDefectError
from .snell import reaction_value
from .strategies import (
    AdjustmentFamilyA,
    MixedStrategyA,
    PayoffField,
    RandomizedStoppingTime,
    expected_at_stop,
    payoff_mixed_sim,
)
from .tree import EventTree, LeveledValue
from .verify import EquilibriumReport, check_equilibrium

#: Mixed stage solutions with an indifference denominator below this are
#: treated as degenerate and resolved by the pure-profile priority rule.
DEGENERATE_TOL = 1e-12

#: Slack allowed when clamping a nearly-interior mixed probability to [0, 1].
CLAMP_TOL = 1e-9


@dataclass(frozen=True)
class SimProcessBundle:
    """Adapted processes of the reduced simultaneous stopping game.

    For each time t and node: x1/x2 are the players' payoffs when player 1
    stops first and player 2 replies with her optimal strictly-later rule;
    y1/y2 the mirror case; z1/z2 the simultaneous-stop payoffs.  The
    optimizer families behind x and y are kept as the equilibrium
    adjustments.
    """

    x1: LeveledValue
    x2: LeveledValue
    y1: LeveledValue
    y2: LeveledValue
    z1: LeveledValue
    z2: LeveledValue
    rho1_star: AdjustmentFamilyA
    tau1_star: AdjustmentFamilyA


def sim_processes(tree: EventTree, field: PayoffField) -> SimProcessBundle:
    """Build the six reduced-game processes and the optimizer families."""
    T = tree.horizon
    all_levels = frozenset(range(T + 1))

    y1_side = reaction_value(tree, field, 1, "first", "strict", "max")
    x2_side = reaction_value(tree, field, 2, "second", "strict", "max")
    rho1_star = y1_side.family
    tau1_star = x2_side.family

    x1: dict[int, float] = {}
    y2: dict[int, float] = {}
    z1: dict[int, float] = {}
    z2: dict[int, float] = {}
    for t in range(T + 1):
        tau_rule = tau1_star.rules[t]
        rho_rule = rho1_star.rules[t]
        x1_vals = expected_at_stop(
            tree, tau_rule, lambda m: field.value(1, t, tree.nodes[m].time, m)
        )
        y2_vals = expected_at_stop(
            tree, rho_rule, lambda m: field.value(2, tree.nodes[m].time, t, m)
        )
        for idx in tree.levels[t]:
            x1[idx] = x1_vals[idx]
            y2[idx] = y2_vals[idx]
            z1[idx] = field.value(1, t, t, idx)
            z2[idx] = field.value(2, t, t, idx)

    return SimProcessBundle(
        x1=LeveledValue(all_levels, x1),
        x2=x2_side.process,
        y1=y1_side.process,
        y2=LeveledValue(all_levels, y2),
        z1=LeveledValue(all_levels, z1),
        z2=LeveledValue(all_levels, z2),
        rho1_star=rho1_star,
        tau1_star=tau1_star,
    )


@dataclass(frozen=True)
class StageSolution:
    """One 2x2 stage equilibrium: stop probabilities, values, and how it
    was selected ("pure:<row><col>", "mixed", or "degenerate")."""

    p: float
    q: float
    value1: float
    value2: float
    rule: str


def _bilinear(m: tuple[tuple[float, float], tuple[float, float]], p: float, q: float) -> float:
    return (
        p * (q * m[0][0] + (1.0 - q) * m[0][1])
        + (1.0 - p) * (q * m[1][0] + (1.0 - q) * m[1][1])
    )


_PURE_PRIORITY = ((0, 0), (0, 1), (1, 0), (1, 1))


def stage_nash_2x2(
    a: tuple[tuple[float, float], tuple[float, float]],
    b: tuple[tuple[float, float], tuple[float, float]],
) -> StageSolution:
    """Nash equilibrium of a 2x2 bimatrix game with a fixed selection rule.

    Rows are player 1's actions (stop, continue), columns player 2's.
    Pure profiles are tried in the priority order (stop,stop), (stop,cont),
    (cont,stop), (cont,cont); if none is an equilibrium the interior mixed
    solution from the indifference equations is returned.  Degenerate games
    in which that solution is undefined fall back to the priority-first
    profile minimizing the largest unilateral gain.
    """
    for row, col in _PURE_PRIORITY:
        if a[1 - row][col] <= a[row][col] and b[row][1 - col] <= b[row][col]:
            return StageSolution(
                p=1.0 - row,
                q=1.0 - col,
                value1=a[row][col],
                value2=b[row][col],
                rule=f"pure:{row}{col}",
            )

    denom_q = a[0][0] - a[0][1] - a[1][0] + a[1][1]
    denom_p = b[0][0] - b[1][0] - b[0][1] + b[1][1]
    if abs(denom_q) >= DEGENERATE_TOL and abs(denom_p) >= DEGENERATE_TOL:
        q = (a[1][1] - a[0][1]) / denom_q
        p = (b[1][1] - b[1][0]) / denom_p
        if -CLAMP_TOL <= p <= 1.0 + CLAMP_TOL and -CLAMP_TOL <= q <= 1.0 + CLAMP_TOL:
            p = min(max(p, 0.0), 1.0)
            q = min(max(q, 0.0), 1.0)
            return StageSolution(
                p=p,
                q=q,
                value1=_bilinear(a, p, q),
                value2=_bilinear(b, p, q),
                rule="mixed",
            )

    best = None
    for row, col in _PURE_PRIORITY:
        regret = max(
            a[1 - row][col] - a[row][col],
            b[row][1 - col] - b[row][col],
        )
        if best is None or regret < best[0]:
            best = (regret, row, col)
    _, row, col = best
    return StageSolution(
        p=1.0 - row,
        q=1.0 - col,
        value1=a[row][col],
        value2=b[row][col],
        rule="degenerate",
    )


@dataclass(frozen=True)
class StageRecord:
    """The stage game solved at one node, kept for audit."""

    node: int
    a: tuple[tuple[float, float], tuple[float, float]]
    b: tuple[tuple[float, float], tuple[float, float]]
    solution: StageSolution


@dataclass(frozen=True)
class RandomizedDynkinEquilibrium:
    """Behavioral equilibrium of the reduced stopping game."""

    alpha: RandomizedStoppingTime
    beta: RandomizedStoppingTime
    w1: LeveledValue
    w2: LeveledValue
    stages: tuple[StageRecord, ...]


def randomized_dynkin_equilibrium(
    tree: EventTree, bundle: SimProcessBundle
) -> RandomizedDynkinEquilibrium:
    """Backward induction over per-node 2x2 stage games.

    At the horizon both players stop surely; below it the stage payoffs are
    (tie, stop-first, stop-second, continue) entries read off the bundle,
    with continuation values from the already-solved next level.
    """
    T = tree.horizon
    n = tree.n_nodes
    p = [0.0] * n
    q = [0.0] * n
    w1 = [0.0] * n
    w2 = [0.0] * n
    stages = []
    for t in range(T, -1, -1):
        for idx in tree.levels[t]:
            if t == T:
                p[idx] = 1.0
                q[idx] = 1.0
                w1[idx] = bundle.z1.values[idx]
                w2[idx] = bundle.z2.values[idx]
                continue
            node = tree.nodes[idx]
            c1 = sum(pc * w1[c] for c, pc in zip(node.children, node.child_probs))
            c2 = sum(pc * w2[c] for c, pc in zip(node.children, node.child_probs))
            a = (
                (bundle.z1.values[idx], bundle.x1.values[idx]),
                (bundle.y1.values[idx], c1),
            )
            b = (
                (bundle.z2.values[idx], bundle.x2.values[idx]),
                (bundle.y2.values[idx], c2),
            )
            sol = stage_nash_2x2(a, b)
            p[idx] = sol.p
            q[idx] = sol.q
            w1[idx] = sol.value1
            w2[idx] = sol.value2
            stages.append(StageRecord(node=idx, a=a, b=b, solution=sol))
    all_levels = frozenset(range(T + 1))
    return RandomizedDynkinEquilibrium(
        alpha=RandomizedStoppingTime(tuple(p)),
        beta=RandomizedStoppingTime(tuple(q)),
        w1=LeveledValue(all_levels, dict(enumerate(w1))),
        w2=LeveledValue(all_levels, dict(enumerate(w2))),
        stages=tuple(reversed(stages)),
    )


@dataclass(frozen=True)
class SimEquilibrium:
    """Mixed equilibrium of the simultaneous-move game, certified."""

    rho: MixedStrategyA
    tau: MixedStrategyA
    values: tuple[float, float]
    report: EquilibriumReport
    bundle: SimProcessBundle
    reduced: RandomizedDynkinEquilibrium


def sim_equilibrium(
    tree: EventTree, field: PayoffField, eps: float = 1e-9
) -> SimEquilibrium:
    """Solve the simultaneous-move game in mixed type-A strategies.

    The initial rules come from the per-node stage equilibria, the
    adjustments from the one-sided optimizer families.  The profile's exact
    payoff must reproduce the backward-induction root values, and both
    best-response gaps are reported; a failed certificate is flagged in the
    report, never silently accepted.
    """
    bundle = sim_processes(tree, field)
    reduced = randomized_dynkin_equilibrium(tree, bundle)
    rho = MixedStrategyA(reduced.alpha, bundle.rho1_star)
    tau = MixedStrategyA(reduced.beta, bundle.tau1_star)
    values = payoff_mixed_sim(tree, field, rho, tau)
    expected = (reduced.w1.values[0], reduced.w2.values[0])
    if max(abs(values[0] - expected[0]), abs(values[1] - expected[1])) > 1e-9:
        raise SolverDefectError(
            "profile payoff disagrees with the backward-induction values: "
            f"{values} vs {expected}"
        )
    report = check_equilibrium(tree, field, "sim", (rho, tau), eps=eps)
    return SimEquilibrium(
        rho=rho,
        tau=tau,
        values=values,
        report=report,
        bundle=bundle,
        reduced=reduced,
    )
