"""Stopping strategies and exact payoff evaluation.

Payoffs are revealed at the later of the two players' stop times, and each
player may replace her plan after observing the other player's stop.  A
strategy is therefore a pair: an initial stopping rule plus an adjustment
family giving the follow-up rule for every possible opponent stop time.
Type A adjustments restart strictly after the observed stop, type B
adjustments may stop at the observed time itself.  Mixed strategies
randomize the initial rule only, with an independent stop probability per
node.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Mapping, Sequence

from .errors import GameSpecError
from .tree import EventTree, LeveledValue, StoppingTime, canonical_stopping_time

Mode = str  # "sim" | "seq"


@dataclass(frozen=True)
class RandomizedStoppingTime:
    """Behavioral stop rule: an independent stop probability per node.

    On a finite tree every distribution over pure stopping times is realized
    by some behavioral rule and vice versa, so working with per-node
    probabilities loses no generality and keeps payoff evaluation exact.
    """

    probs: tuple[float, ...]

    def validate(self, tree: EventTree) -> None:
        if len(self.probs) != tree.n_nodes:
            raise GameSpecError("stop probabilities do not cover the tree")
        for idx, p in enumerate(self.probs):
            if not 0.0 <= p <= 1.0:
                raise GameSpecError(
                    f"stop probability {p:g} at node {tree.nodes[idx].id} outside [0, 1]"
                )
        for leaf in tree.leaves:
            if self.probs[leaf] != 1.0:
                raise GameSpecError(
                    f"node {tree.nodes[leaf].id} at the horizon must stop surely"
                )

    def is_degenerate(self) -> bool:
        return all(p in (0.0, 1.0) for p in self.probs)

    def as_stopping_time(self) -> StoppingTime:
        if not self.is_degenerate():
            raise GameSpecError("randomized rule with interior probabilities")
        return StoppingTime(tuple(p == 1.0 for p in self.probs))


@dataclass(frozen=True)
class AdjustmentFamilyA:
    """Follow-up rules indexed by the observed stop time t, restarting at t+1.

    ``rules[t]`` must realize a time >= min(t+1, horizon) on every path.
    Rules are total: one per t, even where a given play never uses them.
    """

    rules: tuple[StoppingTime, ...]

    def validate(self, tree: EventTree) -> None:
        _validate_family(tree, self.rules, strict=True)


@dataclass(frozen=True)
class AdjustmentFamilyB:
    """Follow-up rules indexed by the observed stop time t, restarting at t.

    ``rules[t]`` must realize a time >= t on every path; stopping exactly at
    the observed time is allowed.
    """

    rules: tuple[StoppingTime, ...]

    def validate(self, tree: EventTree) -> None:
        _validate_family(tree, self.rules, strict=False)


def _validate_family(
    tree: EventTree, rules: tuple[StoppingTime, ...], strict: bool
) -> None:
    if len(rules) != tree.horizon + 1:
        raise GameSpecError(
            f"adjustment family needs {tree.horizon + 1} rules, got {len(rules)}"
        )
    for t, rule in enumerate(rules):
        rule.validate(tree)
        floor = min(t + 1, tree.horizon) if strict else t
        if min(rule.realized(tree)) < floor:
            raise GameSpecError(
                f"adjustment rule for time {t} stops before time {floor}"
            )


@dataclass(frozen=True)
class StrategyA:
    initial: StoppingTime
    adjust: AdjustmentFamilyA

    def validate(self, tree: EventTree) -> None:
        self.initial.validate(tree)
        self.adjust.validate(tree)


@dataclass(frozen=True)
class StrategyB:
    initial: StoppingTime
    adjust: AdjustmentFamilyB

    def validate(self, tree: EventTree) -> None:
        self.initial.validate(tree)
        self.adjust.validate(tree)


@dataclass(frozen=True)
class MixedStrategyA:
    initial: RandomizedStoppingTime
    adjust: AdjustmentFamilyA

    def validate(self, tree: EventTree) -> None:
        self.initial.validate(tree)
        self.adjust.validate(tree)


def as_mixed(strategy: StrategyA) -> MixedStrategyA:
    """Embed a pure type-A strategy as a degenerate mixed one."""
    probs = tuple(1.0 if m else 0.0 for m in strategy.initial.marks)
    return MixedStrategyA(RandomizedStoppingTime(probs), strategy.adjust)


def canonical_signature(tree: EventTree, strategy) -> tuple:
    """Hashable normal form identifying extensionally equal strategies."""
    if isinstance(strategy, MixedStrategyA):
        head: tuple = strategy.initial.probs
    else:
        head = canonical_stopping_time(tree, strategy.initial).marks
    return (head,) + tuple(
        canonical_stopping_time(tree, rule).marks for rule in strategy.adjust.rules
    )


class PayoffField:
    """The two per-player payoff families U^i(s, t, .), one value per node.

    The payoff for player i when the effective stop times are (s, t) is read
    at the node of level max(s, t) on the realized path, which is exactly the
    information available once both players have stopped.  Values are stored
    per (player, s, t) as a list aligned with the canonical node ordering of
    level max(s, t).
    """

    def __init__(self, tree: EventTree, slices: Mapping[tuple[int, int, int], Sequence[float]]):
        T = tree.horizon
        self.tree = tree
        self._data: dict[tuple[int, int, int], tuple[float, ...]] = {}
        bound = 0.0
        for i in (1, 2):
            for s in range(T + 1):
                for t in range(T + 1):
                    key = (i, s, t)
                    if key not in slices:
                        raise GameSpecError(f"payoff field missing slice {key}")
                    level = max(s, t)
                    vals = tuple(float(v) for v in slices[key])
                    if len(vals) != len(tree.levels[level]):
                        raise GameSpecError(
                            f"payoff slice {key} needs {len(tree.levels[level])} "
                            f"values, got {len(vals)}"
                        )
                    for v in vals:
                        if v != v or v in (float("inf"), float("-inf")):
                            raise GameSpecError(f"non-finite payoff in slice {key}")
                        bound = max(bound, abs(v))
                    self._data[key] = vals
        self.bound = bound

    @classmethod
    def from_function(
        cls, tree: EventTree, fn: Callable[[int, int, int, int], float]
    ) -> "PayoffField":
        """Build a field from fn(player, s, t, node_index)."""
        T = tree.horizon
        slices = {}
        for i in (1, 2):
            for s in range(T + 1):
                for t in range(T + 1):
                    level = max(s, t)
                    slices[(i, s, t)] = [fn(i, s, t, idx) for idx in tree.levels[level]]
        return cls(tree, slices)

    @classmethod
    def zero_sum(
        cls, tree: EventTree, u1: Mapping[tuple[int, int], Sequence[float]]
    ) -> "PayoffField":
        """Build a field with player 2's payoffs the negation of player 1's."""
        slices: dict[tuple[int, int, int], Sequence[float]] = {}
        T = tree.horizon
        for s in range(T + 1):
            for t in range(T + 1):
                if (s, t) not in u1:
                    raise GameSpecError(f"payoff field missing slice (1, {s}, {t})")
                vals = tuple(float(v) for v in u1[(s, t)])
                slices[(1, s, t)] = vals
                slices[(2, s, t)] = tuple(-v for v in vals)
        return cls(tree, slices)

    def value(self, player: int, s: int, t: int, node: int) -> float:
        vals = self._data[(player, s, t)]
        return vals[node - self.tree.level_start[max(s, t)]]

    def level_slice(self, player: int, s: int, t: int) -> LeveledValue:
        level = max(s, t)
        start = self.tree.level_start[level]
        vals = self._data[(player, s, t)]
        return LeveledValue(
            frozenset({level}),
            {idx: vals[idx - start] for idx in self.tree.levels[level]},
        )


def effective_times_sim(
    tree: EventTree, rho: StrategyA, tau: StrategyA, leaf_pos: int
) -> tuple[int, int]:
    """Realized stop-time pair on one path when both players move each stage.

    The earlier initial stopper fixes her time; the other switches to her
    adjustment rule for that time.  On ties both stop at the common time.
    """
    s0 = rho.initial.realized(tree)[leaf_pos]
    t0 = tau.initial.realized(tree)[leaf_pos]
    if s0 < t0:
        return s0, tau.adjust.rules[s0].realized(tree)[leaf_pos]
    if s0 > t0:
        return rho.adjust.rules[t0].realized(tree)[leaf_pos], t0
    return s0, s0


def effective_times_seq(
    tree: EventTree, rho: StrategyA, tau: StrategyB, leaf_pos: int
) -> tuple[int, int]:
    """Realized stop-time pair when player 1 acts first at each stage.

    On ties player 1's stop stands and player 2 responds with her adjustment
    rule, which may stop at the same time.
    """
    s0 = rho.initial.realized(tree)[leaf_pos]
    t0 = tau.initial.realized(tree)[leaf_pos]
    if s0 <= t0:
        return s0, tau.adjust.rules[s0].realized(tree)[leaf_pos]
    return rho.adjust.rules[t0].realized(tree)[leaf_pos], t0


def _payoff_pure_core(
    tree: EventTree,
    field: PayoffField,
    mode: Mode,
    rho: StrategyA,
    tau: StrategyA | StrategyB,
) -> tuple[float, float]:
    """Payoff evaluation without class validation; see payoff_pure."""
    sim = mode == "sim"
    r0 = rho.initial.realized(tree)
    t0 = tau.initial.realized(tree)
    rho_adj: dict[int, tuple[int, ...]] = {}
    tau_adj: dict[int, tuple[int, ...]] = {}
    u1 = 0.0
    u2 = 0.0
    for pos, prob in enumerate(tree.leaf_probs):
        s0 = r0[pos]
        u0 = t0[pos]
        if s0 < u0 or (not sim and s0 == u0):
            adj = tau_adj.get(s0)
            if adj is None:
                adj = tau_adj[s0] = tau.adjust.rules[s0].realized(tree)
            s, t = s0, adj[pos]
        elif s0 > u0:
            adj = rho_adj.get(u0)
            if adj is None:
                adj = rho_adj[u0] = rho.adjust.rules[u0].realized(tree)
            s, t = adj[pos], u0
        else:
            s = t = s0
        node = tree.paths[pos][max(s, t)]
        u1 += prob * field.value(1, s, t, node)
        u2 += prob * field.value(2, s, t, node)
    return u1, u2


def payoff_pure(
    tree: EventTree,
    field: PayoffField,
    mode: Mode,
    rho: StrategyA,
    tau: StrategyA | StrategyB,
) -> tuple[float, float]:
    """Exact expected payoffs of a pure strategy profile, both players."""
    if mode == "sim":
        if not isinstance(tau, StrategyA):
            raise GameSpecError("simultaneous mode needs two type-A strategies")
    elif mode == "seq":
        if not isinstance(tau, StrategyB):
            raise GameSpecError("sequential mode needs a type-B second strategy")
    else:
        raise GameSpecError(f"unknown mode {mode!r}")
    rho.validate(tree)
    tau.validate(tree)
    return _payoff_pure_core(tree, field, mode, rho, tau)


def expected_at_stop(
    tree: EventTree, rule: StoppingTime, reward: Callable[[int], float]
) -> list[float]:
    """Expected reward collected at `rule`'s first stop, per starting node.

    Entry n is meaningful whenever the rule has not stopped strictly above
    node n; it equals the expectation, over paths through n, of the reward
    evaluated at the node where the rule first stops.
    """
    out = [0.0] * tree.n_nodes
    for t in range(tree.horizon, -1, -1):
        for idx in tree.levels[t]:
            if rule.marks[idx]:
                out[idx] = reward(idx)
            else:
                node = tree.nodes[idx]
                out[idx] = sum(
                    p * out[c] for c, p in zip(node.children, node.child_probs)
                )
    return out


def _adjusted_payoffs(
    tree: EventTree,
    field: PayoffField,
    stopper: int,
    adjust_of_other: AdjustmentFamilyA | AdjustmentFamilyB,
) -> list[list[float]]:
    """Both players' expected payoffs when `stopper` stops alone at time t
    and the other player follows her adjustment rule for t.

    ``result[t][0]`` / ``result[t][1]`` are player 1 / player 2 values per
    node, meaningful at every node of level t.
    """
    nodes = tree.nodes
    result = []
    for t in range(tree.horizon + 1):
        rule = adjust_of_other.rules[t]
        if stopper == 1:
            p1 = expected_at_stop(tree, rule, lambda m: field.value(1, t, nodes[m].time, m))
            p2 = expected_at_stop(tree, rule, lambda m: field.value(2, t, nodes[m].time, m))
        else:
            p1 = expected_at_stop(tree, rule, lambda m: field.value(1, nodes[m].time, t, m))
            p2 = expected_at_stop(tree, rule, lambda m: field.value(2, nodes[m].time, t, m))
        result.append([p1, p2])
    return result


def payoff_mixed_sim(
    tree: EventTree,
    field: PayoffField,
    rho: MixedStrategyA,
    tau: MixedStrategyA,
) -> tuple[float, float]:
    """Exact expected payoffs of a mixed profile in the simultaneous game.

    Backward recursion over nodes while both players are still active,
    weighting the four stage outcomes (both stop, one stops, none stops) by
    the independent per-node stop probabilities.  Once a single player has
    stopped, the other's deterministic adjustment rule takes over.
    """
    rho.validate(tree)
    tau.validate(tree)
    first_stops = _adjusted_payoffs(tree, field, 1, tau.adjust)
    second_stops = _adjusted_payoffs(tree, field, 2, rho.adjust)

    w1 = [0.0] * tree.n_nodes
    w2 = [0.0] * tree.n_nodes
    T = tree.horizon
    for t in range(T, -1, -1):
        for idx in tree.levels[t]:
            if t == T:
                w1[idx] = field.value(1, T, T, idx)
                w2[idx] = field.value(2, T, T, idx)
                continue
            node = tree.nodes[idx]
            p = rho.initial.probs[idx]
            q = tau.initial.probs[idx]
            d1 = sum(pc * w1[c] for c, pc in zip(node.children, node.child_probs))
            d2 = sum(pc * w2[c] for c, pc in zip(node.children, node.child_probs))
            w1[idx] = (
                p * q * field.value(1, t, t, idx)
                + p * (1.0 - q) * first_stops[t][0][idx]
                + (1.0 - p) * q * second_stops[t][0][idx]
                + (1.0 - p) * (1.0 - q) * d1
            )
            w2[idx] = (
                p * q * field.value(2, t, t, idx)
                + p * (1.0 - q) * first_stops[t][1][idx]
                + (1.0 - p) * q * second_stops[t][1][idx]
                + (1.0 - p) * (1.0 - q) * d2
            )
    return w1[0], w2[0]
