"""Time-varying topology as a sequence of per-window snapshot graphs.

Delays and capacities are stored as fixed-point integers (nanoseconds and
kbps) so that every comparison the routers and the oracle make is exact.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Iterator, Sequence

import numpy as np


SATELLITE = 0
GROUND_TERMINAL = 1
KIND_NAMES = {SATELLITE: "satellite", GROUND_TERMINAL: "ground_terminal"}
KIND_CODES = {v: k for k, v in KIND_NAMES.items()}

NS_PER_MS = 1_000_000
KBPS_PER_MBPS = 1_000

# composite Dijkstra weight: delay in the high bits, one hop in the low bits
HOP_BITS = 16
HOP_MASK = (1 << HOP_BITS) - 1


def _fraction(value) -> Fraction:
    # floats go through their decimal repr so 5.1 means 51/10, not the binary neighbour
    return Fraction(str(value)) if isinstance(value, float) else Fraction(value)


def ms_to_ns(value) -> int:
    """Exact conversion of a millisecond quantity (str, int, float, Fraction, Decimal)."""
    return round(_fraction(value) * NS_PER_MS)


def mbps_to_kbps(value) -> int:
    return round(_fraction(value) * KBPS_PER_MBPS)


def ns_to_ms(value: int) -> Fraction:
    return Fraction(int(value), NS_PER_MS)


def kbps_to_mbps(value: int) -> Fraction:
    return Fraction(int(value), KBPS_PER_MBPS)


def format_fixed(value: int, scale: int) -> str:
    """Render a fixed-point integer as the shortest exact decimal string."""
    digits = len(str(scale)) - 1
    sign = "-" if value < 0 else ""
    whole, frac = divmod(abs(int(value)), scale)
    if frac == 0:
        return f"{sign}{whole}"
    return f"{sign}{whole}.{frac:0{digits}d}".rstrip("0")


def composite_weight(delay_ns: np.ndarray) -> np.ndarray:
    return (np.asarray(delay_ns, dtype=np.int64) << HOP_BITS) + 1


def delay_bound_key(delay_bound_ns: int) -> int:
    """Largest composite key whose delay part is still within ``delay_bound_ns``."""
    return (int(delay_bound_ns) << HOP_BITS) | HOP_MASK


@dataclass(frozen=True, order=True)
class TimeWindow:
    t_start: float
    t_end: float

    def __post_init__(self):
        if not self.t_start < self.t_end:
            raise ValueError(f"empty time window [{self.t_start}, {self.t_end}]")

    def contains(self, t: float) -> bool:
        return self.t_start <= t <= self.t_end

    @property
    def length(self) -> float:
        return self.t_end - self.t_start


@dataclass(frozen=True)
class Link:
    src: int
    dst: int
    delay_ns: int
    capacity_kbps: int

    @property
    def delay_ms(self) -> Fraction:
        return ns_to_ms(self.delay_ns)

    @property
    def capacity_mbps(self) -> Fraction:
        return kbps_to_mbps(self.capacity_kbps)


def _frozen(a, dtype) -> np.ndarray:
    a = np.array(a, dtype=dtype, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class NodeTable:
    """Node identities, kinds and per-satellite function call budgets.

    ``budgets[i, j]`` is the remaining call count of ``functions[j]`` on node
    ``i``; ground terminal rows are always zero.
    """

    names: tuple[str, ...]
    kinds: np.ndarray
    functions: tuple[str, ...]
    budgets: np.ndarray

    def __post_init__(self):
        n, f = len(self.names), len(self.functions)
        object.__setattr__(self, "kinds", _frozen(self.kinds, np.int8))
        budgets = np.zeros((n, f), dtype=np.int64) if f and np.size(self.budgets) == 0 else self.budgets
        object.__setattr__(self, "budgets", _frozen(np.reshape(budgets, (n, f)), np.int64))
        if self.kinds.shape != (n,):
            raise ValueError("kinds must have one entry per node")
        if len(set(self.names)) != n:
            raise ValueError("duplicate node names")
        if (self.budgets < 0).any():
            raise ValueError("budgets must be nonnegative")
        if (self.budgets[self.kinds == GROUND_TERMINAL] != 0).any():
            raise ValueError("ground terminals cannot host functions")

    def __len__(self) -> int:
        return len(self.names)

    @cached_property
    def index(self) -> dict[str, int]:
        return {name: i for i, name in enumerate(self.names)}

    def function_index(self, function: str) -> int:
        try:
            return self.functions.index(function)
        except ValueError:
            raise KeyError(f"unknown function {function!r}") from None

    def satellites(self) -> np.ndarray:
        return np.flatnonzero(self.kinds == SATELLITE)

    def ground_terminals(self) -> np.ndarray:
        return np.flatnonzero(self.kinds == GROUND_TERMINAL)

    def with_budgets(self, budgets: np.ndarray) -> "NodeTable":
        return dataclasses.replace(self, budgets=budgets)


@dataclass(frozen=True, eq=False)
class ContactPlan:
    """Timetabled directed contacts, stored column-wise."""

    nodes: NodeTable
    src: np.ndarray
    dst: np.ndarray
    t_start: np.ndarray
    t_end: np.ndarray
    delay_ns: np.ndarray
    capacity_kbps: np.ndarray

    def __post_init__(self):
        for name, dtype in (("src", np.int64), ("dst", np.int64), ("t_start", np.float64),
                            ("t_end", np.float64), ("delay_ns", np.int64), ("capacity_kbps", np.int64)):
            object.__setattr__(self, name, _frozen(getattr(self, name), dtype))
        m = len(self.src)
        if any(len(getattr(self, c)) != m for c in ("dst", "t_start", "t_end", "delay_ns", "capacity_kbps")):
            raise ValueError("contact columns differ in length")
        n = len(self.nodes)
        if m and (self.src.min() < 0 or self.dst.min() < 0 or self.src.max() >= n or self.dst.max() >= n):
            raise ValueError("contact references an unknown node")
        if (self.src == self.dst).any():
            raise ValueError("self-loop contact")
        if (self.t_start >= self.t_end).any():
            raise ValueError("contact with t_start >= t_end")
        if (self.delay_ns < 0).any() or (self.capacity_kbps < 0).any():
            raise ValueError("negative delay or capacity")

    def __len__(self) -> int:
        return len(self.src)

    @classmethod
    def from_records(cls, nodes: NodeTable, records: Sequence[tuple]) -> "ContactPlan":
        """Build from ``(src, dst, t_start, t_end, delay_ns, capacity_kbps)`` tuples."""
        cols = list(zip(*records)) if records else [()] * 6
        return cls(nodes, *cols)

    def records(self) -> Iterator[tuple[int, int, float, float, int, int]]:
        for row in zip(self.src.tolist(), self.dst.tolist(), self.t_start.tolist(),
                       self.t_end.tolist(), self.delay_ns.tolist(), self.capacity_kbps.tolist()):
            yield row

    def horizon(self) -> TimeWindow:
        if len(self) == 0:
            raise ValueError("cannot infer a horizon from an empty plan")
        return TimeWindow(0.0 if self.t_start.min() >= 0 else float(self.t_start.min()), float(self.t_end.max()))


class Topology:
    """Directed link structure (sorted by ``(src, dst)``) with CSR adjacency both ways."""

    __slots__ = ("n_nodes", "src", "dst", "out_ptr", "out_node", "out_link",
                 "in_ptr", "in_node", "in_link", "_index")

    def __init__(self, n_nodes: int, src: np.ndarray, dst: np.ndarray):
        self.n_nodes = n_nodes
        self.src = _frozen(src, np.int64)
        self.dst = _frozen(dst, np.int64)
        counts = np.bincount(self.src, minlength=n_nodes)
        self.out_ptr = _frozen(np.concatenate(([0], np.cumsum(counts))), np.int64)
        self.out_node = self.dst
        self.out_link = _frozen(np.arange(len(self.src)), np.int64)
        order = np.lexsort((self.src, self.dst))
        counts = np.bincount(self.dst, minlength=n_nodes)
        self.in_ptr = _frozen(np.concatenate(([0], np.cumsum(counts))), np.int64)
        self.in_node = _frozen(self.src[order], np.int64)
        self.in_link = _frozen(order, np.int64)
        self._index = None

    def __len__(self) -> int:
        return len(self.src)

    def link_index(self) -> dict[tuple[int, int], int]:
        if self._index is None:
            self._index = {(u, v): i for i, (u, v) in enumerate(zip(self.src.tolist(), self.dst.tolist()))}
        return self._index


@dataclass(frozen=True, eq=False)
class Snapshot:
    """Immutable directed graph valid during one time window.

    Links are held column-wise and sorted by ``(src, dst)``; link ``i`` is
    ``(topology.src[i], topology.dst[i])`` with ``delay_ns[i]`` and
    ``capacity_kbps[i]``.
    """

    window: TimeWindow
    nodes: NodeTable
    topology: Topology
    delay_ns: np.ndarray
    capacity_kbps: np.ndarray
    weight: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "delay_ns", _frozen(self.delay_ns, np.int64))
        object.__setattr__(self, "capacity_kbps", _frozen(self.capacity_kbps, np.int64))
        object.__setattr__(self, "weight", _frozen(composite_weight(self.delay_ns), np.int64))

    @classmethod
    def from_links(cls, window: TimeWindow, nodes: NodeTable, links) -> "Snapshot":
        """Build from an iterable of :class:`Link` or ``(src, dst, delay_ns, capacity_kbps)``."""
        rows = [tuple(l) if not isinstance(l, Link) else (l.src, l.dst, l.delay_ns, l.capacity_kbps)
                for l in links]
        rows.sort(key=lambda r: (r[0], r[1]))
        for a, b in zip(rows, rows[1:]):
            if a[:2] == b[:2]:
                raise ValueError(f"parallel link {a[0]}->{a[1]}")
        for r in rows:
            if r[0] == r[1] or r[2] < 0 or r[3] < 0:
                raise ValueError(f"invalid link {r}")
            if not (0 <= r[0] < len(nodes) and 0 <= r[1] < len(nodes)):
                raise ValueError(f"link {r[:2]} references an unknown node")
        cols = list(zip(*rows)) if rows else [(), (), (), ()]
        topo = Topology(len(nodes), np.array(cols[0], dtype=np.int64), np.array(cols[1], dtype=np.int64))
        return cls(window, nodes, topo, np.array(cols[2], dtype=np.int64), np.array(cols[3], dtype=np.int64))

    # convenience accessors
    @property
    def n_nodes(self) -> int:
        return len(self.nodes)

    @property
    def n_links(self) -> int:
        return len(self.topology)

    @property
    def src(self) -> np.ndarray:
        return self.topology.src

    @property
    def dst(self) -> np.ndarray:
        return self.topology.dst

    @property
    def budgets(self) -> np.ndarray:
        return self.nodes.budgets

    @property
    def kinds(self) -> np.ndarray:
        return self.nodes.kinds

    def is_satellite(self, node: int) -> bool:
        return self.nodes.kinds[node] == SATELLITE

    def links(self) -> Iterator[Link]:
        for row in zip(self.src.tolist(), self.dst.tolist(), self.delay_ns.tolist(), self.capacity_kbps.tolist()):
            yield Link(*row)

    def link_id(self, src: int, dst: int) -> int | None:
        return self.topology.link_index().get((src, dst))

    def link(self, src: int, dst: int) -> Link | None:
        i = self.link_id(src, dst)
        if i is None:
            return None
        return Link(src, dst, int(self.delay_ns[i]), int(self.capacity_kbps[i]))

    def out_links(self, node: int) -> Iterator[Link]:
        t = self.topology
        for k in range(t.out_ptr[node], t.out_ptr[node + 1]):
            i = int(t.out_link[k])
            yield Link(node, int(t.dst[i]), int(self.delay_ns[i]), int(self.capacity_kbps[i]))

    def in_links(self, node: int) -> Iterator[Link]:
        t = self.topology
        for k in range(t.in_ptr[node], t.in_ptr[node + 1]):
            i = int(t.in_link[k])
            yield Link(int(t.src[i]), node, int(self.delay_ns[i]), int(self.capacity_kbps[i]))

    def function_mask(self, function: str) -> np.ndarray:
        """Boolean per node: satellite with at least one remaining call of ``function``."""
        j = self.nodes.function_index(function)
        return (self.nodes.budgets[:, j] >= 1) & (self.nodes.kinds == SATELLITE)

    def with_budgets(self, budgets: np.ndarray) -> "Snapshot":
        """View sharing topology and link attributes, with replaced budgets."""
        return dataclasses.replace(self, nodes=self.nodes.with_budgets(budgets))

    def with_capacity(self, capacity_kbps: np.ndarray) -> "Snapshot":
        return dataclasses.replace(self, capacity_kbps=capacity_kbps)

    def structurally_equal(self, other: "Snapshot") -> bool:
        return (
            self.window == other.window
            and self.nodes.names == other.nodes.names
            and np.array_equal(self.nodes.budgets, other.nodes.budgets)
            and np.array_equal(self.src, other.src)
            and np.array_equal(self.dst, other.dst)
            and np.array_equal(self.delay_ns, other.delay_ns)
            and np.array_equal(self.capacity_kbps, other.capacity_kbps)
        )

    def _subset(self, keep: np.ndarray) -> "Snapshot":
        topo = Topology(self.n_nodes, self.src[keep], self.dst[keep])
        return Snapshot(self.window, self.nodes, topo, self.delay_ns[keep], self.capacity_kbps[keep])


def _canonical_links(src, dst, delay, cap):
    """Sort by (src, dst); among parallel links keep highest capacity, then lowest delay."""
    order = np.lexsort((delay, -cap, dst, src))
    src, dst, delay, cap = src[order], dst[order], delay[order], cap[order]
    if len(src):
        first = np.ones(len(src), dtype=bool)
        first[1:] = (src[1:] != src[:-1]) | (dst[1:] != dst[:-1])
        src, dst, delay, cap = src[first], dst[first], delay[first], cap[first]
    return src, dst, delay, cap


def window_boundaries(plan: ContactPlan, horizon: TimeWindow) -> np.ndarray:
    """Sorted distinct event times: horizon ends plus every clipped contact start/end."""
    start = np.maximum(plan.t_start, horizon.t_start)
    end = np.minimum(plan.t_end, horizon.t_end)
    live = start < end
    return np.unique(np.concatenate(([horizon.t_start, horizon.t_end], start[live], end[live])))


def build_snapshots(plan: ContactPlan, horizon: TimeWindow) -> list[Snapshot]:
    """Split ``horizon`` at every contact event and emit one snapshot per window.

    Windows are the maximal intervals between consecutive distinct event
    times, so link sets and attributes are constant inside each of them.
    """
    if not isinstance(horizon, TimeWindow):
        horizon = TimeWindow(*horizon)
    start = np.maximum(plan.t_start, horizon.t_start)
    end = np.minimum(plan.t_end, horizon.t_end)
    live = np.flatnonzero(start < end)
    start, end = start[live], end[live]
    src, dst = plan.src[live], plan.dst[live]
    delay, cap = plan.delay_ns[live], plan.capacity_kbps[live]
    bounds = window_boundaries(plan, horizon)

    snapshots = []
    for t0, t1 in zip(bounds[:-1].tolist(), bounds[1:].tolist()):
        active = (start <= t0) & (end >= t1)
        s, d, dl, c = _canonical_links(src[active], dst[active], delay[active], cap[active])
        topo = Topology(len(plan.nodes), s, d)
        snapshots.append(Snapshot(TimeWindow(t0, t1), plan.nodes, topo, dl, c))
    return snapshots


def snapshot_at(snapshots: Sequence[Snapshot], t: float) -> Snapshot:
    """Snapshot whose window contains ``t`` (left-closed; the last window is closed)."""
    starts = [s.window.t_start for s in snapshots]
    i = int(np.searchsorted(starts, t, side="right")) - 1
    if i < 0 or t > snapshots[-1].window.t_end:
        raise ValueError(f"time {t} outside the snapshot horizon")
    return snapshots[i]


def snapshot_for_time(plan: ContactPlan, t: float, horizon: TimeWindow | None = None) -> Snapshot:
    """The snapshot of ``build_snapshots(plan, horizon)`` containing ``t``, built on its own."""
    horizon = horizon or plan.horizon()
    if not isinstance(horizon, TimeWindow):
        horizon = TimeWindow(*horizon)
    if not horizon.t_start <= t <= horizon.t_end:
        raise ValueError(f"time {t} outside the snapshot horizon")
    bounds = window_boundaries(plan, horizon)
    i = min(int(np.searchsorted(bounds, t, side="right")) - 1, len(bounds) - 2)
    t0, t1 = float(bounds[i]), float(bounds[i + 1])
    active = (np.maximum(plan.t_start, horizon.t_start) <= t0) & (np.minimum(plan.t_end, horizon.t_end) >= t1)
    s, d, dl, c = _canonical_links(plan.src[active], plan.dst[active], plan.delay_ns[active],
                                   plan.capacity_kbps[active])
    return Snapshot(TimeWindow(t0, t1), plan.nodes, Topology(len(plan.nodes), s, d), dl, c)


def capacity_mask(g: Snapshot, min_capacity_kbps: int) -> np.ndarray:
    return g.capacity_kbps >= int(min_capacity_kbps)


def filter_by_capacity(g: Snapshot, min_capacity_kbps: int) -> Snapshot:
    """Keep only links whose capacity is at least ``min_capacity_kbps``; nodes are preserved."""
    if min_capacity_kbps < 0:
        raise ValueError("required capacity must be nonnegative")
    return g._subset(capacity_mask(g, min_capacity_kbps))


def reverse_graph(g: Snapshot) -> Snapshot:
    """Every link ``u -> v`` becomes ``v -> u`` with the same delay and capacity."""
    order = np.lexsort((g.src, g.dst))
    topo = Topology(g.n_nodes, g.dst[order], g.src[order])
    return Snapshot(g.window, g.nodes, topo, g.delay_ns[order], g.capacity_kbps[order])


def functional_satellites(g: Snapshot, function: str) -> frozenset[int]:
    """Satellites with budget >= 1 for ``function`` that touch at least one link of ``g``."""
    touched = np.zeros(g.n_nodes, dtype=bool)
    touched[g.src] = True
    touched[g.dst] = True
    return frozenset(np.flatnonzero(touched & g.function_mask(function)).tolist())
