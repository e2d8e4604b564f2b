"""Zero-sum stopping games: Dynkin values, hitting-time saddle points, and
the saddle point of the full strategy game built from them.

The Dynkin value follows the median recursion v_T = F_T and
v_t = median(F_t, G_t, E_t[v_{t+1}]).  With F <= G this is the value of the
game paying F at the maximizer's stop and G at the minimizer's earlier stop;
with G <= F it is the mirrored orientation where the second player maximizes.
One recursion therefore serves both stage-game orientations.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import GameSpecError
from .snell import reaction_value
from .strategies import PayoffField, StrategyA, StrategyB
from .tree import (
    EventTree,
    HittingResult,
    LeveledValue,
    StoppingTime,
    constant_stopping_time,
    hitting_time,
)

#: Absolute tolerance for "process equals boundary" in hitting sets.
HITTING_TOL = 1e-9


def _median(a: float, b: float, c: float) -> float:
    return max(min(a, b), min(max(a, b), c))


def dynkin_value(tree: EventTree, f: LeveledValue, g: LeveledValue) -> LeveledValue:
    """Backward median recursion; terminal value F at the horizon."""
    all_levels = frozenset(range(tree.horizon + 1))
    if f.levels != all_levels or g.levels != all_levels:
        raise GameSpecError("boundary processes must be defined on all levels")
    v: dict[int, float] = {}
    for t in range(tree.horizon, -1, -1):
        for idx in tree.levels[t]:
            if t == tree.horizon:
                v[idx] = f.values[idx]
            else:
                node = tree.nodes[idx]
                cont = sum(
                    p * v[c] for c, p in zip(node.children, node.child_probs)
                )
                v[idx] = _median(f.values[idx], g.values[idx], cont)
    return LeveledValue(all_levels, v)


def dynkin_hitting_saddle(
    tree: EventTree,
    v: LeveledValue,
    f: LeveledValue,
    g: LeveledValue,
    sigma: StoppingTime,
) -> tuple[StoppingTime, HittingResult]:
    """First times >= sigma at which v meets F (maximizer) and G (minimizer).

    The F-hit never clamps because the terminal value is F; the G-hit may
    never fire before the horizon, in which case the path is clamped there
    and recorded.  Clamping is payoff-neutral: the maximizer's hit is never
    later, so the "minimizer stopped first" indicator stays off.
    """
    rho = hitting_time(
        tree,
        lambda idx: abs(v.values[idx] - f.values[idx]) <= HITTING_TOL,
        sigma,
    )
    if rho.clamped:
        raise GameSpecError("value process does not meet its terminal boundary")
    tau = hitting_time(
        tree,
        lambda idx: abs(v.values[idx] - g.values[idx]) <= HITTING_TOL,
        sigma,
    )
    return rho.stop, tau


@dataclass(frozen=True)
class DynkinSolution:
    """Value process and hitting-time saddle of one Dynkin game."""

    v: LeveledValue
    rho: StoppingTime
    tau: HittingResult
    value_at_root: float


def solve_dynkin(
    tree: EventTree,
    f: LeveledValue,
    g: LeveledValue,
    sigma: StoppingTime | None = None,
) -> DynkinSolution:
    """Convenience wrapper: value plus hitting saddle from sigma (default 0)."""
    if sigma is None:
        sigma = constant_stopping_time(tree, 0)
    v = dynkin_value(tree, f, g)
    rho, tau = dynkin_hitting_saddle(tree, v, f, g, sigma)
    sigma_times = sigma.realized(tree)
    value = sum(
        prob * v.values[tree.paths[pos][sigma_times[pos]]]
        for pos, prob in enumerate(tree.leaf_probs)
    )
    return DynkinSolution(v=v, rho=rho, tau=tau, value_at_root=value)


@dataclass(frozen=True)
class ZeroSumSaddle:
    """Saddle point of the zero-sum strategy game started at sigma.

    Player 1 (maximizer) plays the type-A strategy ``rho_star``; player 2
    the type-B strategy ``tau_star``.  ``value`` is the common game value
    aggregated at the root over the sigma nodes.  The boundary and value
    processes are kept for diagnostics.
    """

    rho_star: StrategyA
    tau_star: StrategyB
    value: float
    f: LeveledValue
    g: LeveledValue
    v: LeveledValue
    rho_hit: StoppingTime
    tau_hit: HittingResult
    sigma: StoppingTime


def zero_sum_saddle(
    tree: EventTree,
    field: PayoffField,
    sigma: StoppingTime | None = None,
) -> ZeroSumSaddle:
    """Construct a saddle point for the zero-sum game with payoff U^1.

    F is the best (smallest) payoff player 2 can force once player 1 stops;
    G floors player 1's best strictly-later reply when player 2 stops first.
    The Dynkin value of (F, G) with its hitting times gives the initial
    stopping rules; the one-sided optimizer families give the adjustments.
    """
    if sigma is None:
        sigma = constant_stopping_time(tree, 0)
    sigma.validate(tree)
    f_side = reaction_value(tree, field, 1, "second", "inclusive", "min")
    g_side = reaction_value(tree, field, 1, "first", "strict", "max")
    g_vals = {
        idx: max(g_side.process.values[idx], f_side.process.values[idx])
        for idx in range(tree.n_nodes)
    }
    f = f_side.process
    g = LeveledValue(frozenset(range(tree.horizon + 1)), g_vals)
    solution = solve_dynkin(tree, f, g, sigma)
    rho_star = StrategyA(solution.rho, g_side.family)
    tau_star = StrategyB(solution.tau.stop, f_side.family)
    return ZeroSumSaddle(
        rho_star=rho_star,
        tau_star=tau_star,
        value=solution.value_at_root,
        f=f,
        g=g,
        v=solution.v,
        rho_hit=solution.rho,
        tau_hit=solution.tau,
        sigma=sigma,
    )
