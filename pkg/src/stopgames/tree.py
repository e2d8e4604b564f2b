"""Finite filtered probability spaces represented as rooted event trees.

The sample space is the set of root-to-leaf paths.  The information available
at time t is the partition of paths by their time-t node, so adapted processes
are simply "one value per node" and essential suprema/infima over events are
exact per-node maxima/minima.  All probabilistic operations (conditional
expectation, hitting times) reduce to sums and scans over the tree.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterable, Mapping, Sequence

from .errors import GameSpecError

PROB_TOL = 1e-12


@dataclass(frozen=True)
class Node:
    """One atom of the time-`time` information."""

    index: int
    id: str
    time: int
    parent: int | None
    edge_prob: float
    children: tuple[int, ...]
    child_probs: tuple[float, ...]

    @property
    def is_leaf(self) -> bool:
        return not self.children


class EventTree:
    """Immutable rooted tree with per-edge transition probabilities.

    Nodes are stored in canonical order (sorted by time, then id), so the
    nodes of each level occupy a contiguous index range.  Built through
    :func:`build_tree`, which performs all validation.
    """

    def __init__(self, horizon: int, nodes: Sequence[Node]):
        self.horizon = horizon
        self.nodes = tuple(nodes)
        self.n_nodes = len(self.nodes)
        self.by_id = {node.id: node.index for node in self.nodes}

        starts = [0] * (horizon + 2)
        for node in self.nodes:
            starts[node.time + 1] += 1
        for t in range(horizon + 1):
            starts[t + 1] += starts[t]
        self.level_start = tuple(starts)
        self.levels = tuple(
            tuple(range(starts[t], starts[t + 1])) for t in range(horizon + 1)
        )
        self.leaves = self.levels[horizon]

        node_prob = [0.0] * self.n_nodes
        node_prob[0] = 1.0
        for node in self.nodes[1:]:
            node_prob[node.index] = node_prob[node.parent] * node.edge_prob
        self.node_prob = tuple(node_prob)
        self.leaf_probs = tuple(node_prob[leaf] for leaf in self.leaves)

        paths = []
        for leaf in self.leaves:
            path = [0] * (horizon + 1)
            cur = leaf
            while cur is not None:
                path[self.nodes[cur].time] = cur
                cur = self.nodes[cur].parent
            paths.append(tuple(path))
        self.paths = tuple(paths)

        leaves_under: list[list[int]] = [[] for _ in range(self.n_nodes)]
        for pos, path in enumerate(self.paths):
            for idx in path:
                leaves_under[idx].append(pos)
        self.leaves_under = tuple(tuple(ps) for ps in leaves_under)

        self._realized_cache: dict[tuple[bool, ...], tuple[int, ...]] = {}

    def level_pos(self, index: int) -> int:
        """Position of a node within its level's canonical ordering."""
        return index - self.level_start[self.nodes[index].time]

    def realized_times(self, marks: tuple[bool, ...]) -> tuple[int, ...]:
        """Per path, the time of the first node marked stop (cached)."""
        cached = self._realized_cache.get(marks)
        if cached is not None:
            return cached
        out = []
        for path in self.paths:
            for t, idx in enumerate(path):
                if marks[idx]:
                    out.append(t)
                    break
            else:
                raise GameSpecError(
                    f"no stop on the path through node {self.nodes[path[-1]].id}"
                )
        result = tuple(out)
        self._realized_cache[marks] = result
        return result

    def prefix_stopped(self, marks: Sequence[bool]) -> tuple[bool, ...]:
        """Per node, whether a mark occurs at the node or one of its ancestors."""
        out = [False] * self.n_nodes
        for node in self.nodes:
            hit = marks[node.index]
            if node.parent is not None:
                hit = hit or out[node.parent]
            out[node.index] = hit
        return tuple(out)


@dataclass(frozen=True)
class StoppingTime:
    """Adapted stop/continue decision per node; every horizon node stops.

    The realized time of a path is the time of its first stop node.
    Decisions below the first stop never affect realized times; see
    :func:`canonical_stopping_time` for the normal form.
    """

    marks: tuple[bool, ...]

    def validate(self, tree: EventTree) -> None:
        if len(self.marks) != tree.n_nodes:
            raise GameSpecError("stopping time marks do not cover the tree")
        for leaf in tree.leaves:
            if not self.marks[leaf]:
                raise GameSpecError(
                    f"node {tree.nodes[leaf].id} at the horizon must stop"
                )

    def realized(self, tree: EventTree) -> tuple[int, ...]:
        return tree.realized_times(self.marks)


def canonical_stopping_time(tree: EventTree, st: StoppingTime) -> StoppingTime:
    """Normal form: stop exactly at each path's first stop, plus the horizon."""
    realized = st.realized(tree)
    marks = [False] * tree.n_nodes
    for leaf in tree.leaves:
        marks[leaf] = True
    for pos, path in enumerate(tree.paths):
        marks[path[realized[pos]]] = True
    return StoppingTime(tuple(marks))


def stopping_time_from_realized(
    tree: EventTree, realized: Sequence[int]
) -> StoppingTime:
    """Reconstruct a stopping time from per-path realized times.

    Fails when the realized times are not adapted, i.e. when two paths
    through the same node disagree on whether to stop there.
    """
    marks = [False] * tree.n_nodes
    for leaf in tree.leaves:
        marks[leaf] = True
    for pos, path in enumerate(tree.paths):
        marks[path[realized[pos]]] = True
    st = StoppingTime(tuple(marks))
    if tree.realized_times(st.marks) != tuple(realized):
        raise GameSpecError("realized times are not adapted to the tree")
    return st


def constant_stopping_time(tree: EventTree, t: int) -> StoppingTime:
    """The stopping time identically equal to t."""
    if not 0 <= t <= tree.horizon:
        raise GameSpecError(f"constant stopping time {t} outside 0..{tree.horizon}")
    marks = [False] * tree.n_nodes
    for idx in tree.levels[t]:
        marks[idx] = True
    for leaf in tree.leaves:
        marks[leaf] = True
    return StoppingTime(tuple(marks))


def build_tree(spec: Mapping) -> EventTree:
    """Build and validate an event tree from a raw description.

    ``spec`` maps ``horizon`` to an integer and ``nodes`` to a list of
    mappings with keys ``id``, ``time`` and, for non-root nodes, ``parent``
    and ``prob``.  Node ordering in the input is irrelevant; the result uses
    the canonical (time, id) ordering.
    """
    try:
        horizon = int(spec["horizon"])
        raw_nodes = list(spec["nodes"])
    except (KeyError, TypeError) as exc:
        raise GameSpecError(f"tree description missing field: {exc}") from exc
    if horizon < 0:
        raise GameSpecError(f"horizon must be >= 0, got {horizon}")

    seen: dict[str, dict] = {}
    for raw in raw_nodes:
        nid = str(raw["id"])
        if nid in seen:
            raise GameSpecError(f"duplicate node id {nid}")
        seen[nid] = raw

    roots = [nid for nid, raw in seen.items() if raw.get("parent") is None]
    if len(roots) != 1:
        raise GameSpecError(f"expected exactly one root node, found {len(roots)}")

    order = sorted(seen, key=lambda nid: (int(seen[nid]["time"]), nid))
    index_of = {nid: i for i, nid in enumerate(order)}

    times: dict[str, int] = {}
    parents: dict[str, str | None] = {}
    probs: dict[str, float] = {}
    children: dict[str, list[str]] = {nid: [] for nid in order}
    for nid in order:
        raw = seen[nid]
        t = int(raw["time"])
        parent = raw.get("parent")
        if parent is None:
            if t != 0:
                raise GameSpecError(f"root node {nid} has time {t}, expected 0")
            prob = 1.0
        else:
            parent = str(parent)
            if parent not in seen:
                raise GameSpecError(f"orphan node {nid}: unknown parent {parent}")
            if t != int(seen[parent]["time"]) + 1:
                raise GameSpecError(
                    f"time inconsistency at node {nid}: time {t}, parent at "
                    f"{seen[parent]['time']}"
                )
            prob = float(raw["prob"])
            if not 0.0 < prob <= 1.0:
                raise GameSpecError(
                    f"transition probability {prob:g} at node {nid} outside (0, 1]"
                )
            children[parent].append(nid)
        if not 0 <= t <= horizon:
            raise GameSpecError(f"node {nid} at time {t} outside 0..{horizon}")
        times[nid] = t
        parents[nid] = parent
        probs[nid] = prob

    for nid in order:
        kids = children[nid]
        if times[nid] < horizon:
            if not kids:
                raise GameSpecError(
                    f"leaf before horizon: node {nid} at time {times[nid]} < {horizon}"
                )
            total = sum(probs[c] for c in kids)
            if abs(total - 1.0) > PROB_TOL:
                raise GameSpecError(
                    f"probabilities sum to {total:g} at {nid}"
                )
        elif kids:
            raise GameSpecError(f"node {nid} at the horizon has children")

    nodes = []
    for nid in order:
        kid_ids = sorted(children[nid])
        nodes.append(
            Node(
                index=index_of[nid],
                id=nid,
                time=times[nid],
                parent=None if parents[nid] is None else index_of[parents[nid]],
                edge_prob=probs[nid],
                children=tuple(index_of[c] for c in kid_ids),
                child_probs=tuple(probs[c] for c in kid_ids),
            )
        )
    return EventTree(horizon, nodes)


@dataclass(frozen=True)
class LeveledValue:
    """Real values defined on every node of a fixed set of tree levels."""

    levels: frozenset[int]
    values: Mapping[int, float]

    @classmethod
    def build(
        cls, tree: EventTree, levels: Iterable[int], values: Mapping[int, float]
    ) -> "LeveledValue":
        lv = cls(frozenset(levels), dict(values))
        lv.validate(tree)
        return lv

    @classmethod
    def from_function(
        cls, tree: EventTree, levels: Iterable[int], fn: Callable[[int], float]
    ) -> "LeveledValue":
        levels = frozenset(levels)
        values = {idx: fn(idx) for t in sorted(levels) for idx in tree.levels[t]}
        return cls(levels, values)

    def validate(self, tree: EventTree) -> None:
        expected = set()
        for t in self.levels:
            if not 0 <= t <= tree.horizon:
                raise GameSpecError(f"level {t} outside 0..{tree.horizon}")
            expected.update(tree.levels[t])
        missing = expected - self.values.keys()
        if missing:
            idx = min(missing)
            raise GameSpecError(f"missing value at node {tree.nodes[idx].id}")
        extra = self.values.keys() - expected
        if extra:
            idx = min(extra)
            raise GameSpecError(
                f"value at node {tree.nodes[idx].id} outside the declared levels"
            )
        for idx, val in self.values.items():
            if val != val or val in (float("inf"), float("-inf")):
                raise GameSpecError(f"non-finite value at node {tree.nodes[idx].id}")

    def at(self, index: int) -> float:
        return self.values[index]


def _single_level(x: LeveledValue) -> int:
    if len(x.levels) != 1:
        raise GameSpecError("expected a value defined on exactly one level")
    return next(iter(x.levels))


def expectation_to_level(tree: EventTree, x: LeveledValue, t: int) -> LeveledValue:
    """Conditional expectation of a level-u value at every level-t node, t <= u."""
    u = _single_level(x)
    if not 0 <= t <= u:
        raise GameSpecError(f"level mismatch: cannot condition level {u} on level {t}")
    try:
        vals = {idx: x.values[idx] for idx in tree.levels[u]}
    except KeyError as exc:
        raise GameSpecError(f"value missing at node index {exc}") from exc
    for lev in range(u - 1, t - 1, -1):
        nxt = {}
        for idx in tree.levels[lev]:
            node = tree.nodes[idx]
            nxt[idx] = sum(
                p * vals[c] for c, p in zip(node.children, node.child_probs)
            )
        vals = nxt
    return LeveledValue(frozenset({t}), vals)


def conditional_expectation(tree: EventTree, x: LeveledValue, node: int) -> float:
    """Conditional expectation of a single-level value at one node."""
    t = tree.nodes[node].time
    return expectation_to_level(tree, x, t).values[node]


@dataclass(frozen=True)
class HittingResult:
    """First hitting time of a node predicate, clamped to the horizon.

    ``clamped`` holds the leaf positions of paths on which the predicate
    never fired at or after the starting rule; those paths stop at the
    horizon by convention.
    """

    stop: StoppingTime
    clamped: frozenset[int]


def hitting_time(
    tree: EventTree,
    flag: Callable[[int], bool] | Sequence[bool],
    start: StoppingTime,
) -> HittingResult:
    """First time >= `start` at which `flag` holds, per path.

    Paths with no eligible flagged node are clamped to the horizon and
    recorded in the clamped set.
    """
    if callable(flag):
        flagged = tuple(bool(flag(i)) for i in range(tree.n_nodes))
    else:
        flagged = tuple(bool(v) for v in flag)
    eligible = tree.prefix_stopped(start.marks)
    marks = [False] * tree.n_nodes
    for idx in range(tree.n_nodes):
        marks[idx] = flagged[idx] and eligible[idx]
    clamped = []
    for pos, path in enumerate(tree.paths):
        if not any(marks[idx] for idx in path):
            clamped.append(pos)
    for leaf in tree.leaves:
        marks[leaf] = True
    return HittingResult(StoppingTime(tuple(marks)), frozenset(clamped))
