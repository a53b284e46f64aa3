"""Requests, routed paths and the infeasible outcome shared by every router."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from typing import Sequence, Union

from .time_graph import (
    GROUND_TERMINAL,
    KBPS_PER_MBPS,
    NS_PER_MS,
    Link,
    Snapshot,
    format_fixed,
    mbps_to_kbps,
    ms_to_ns,
)


@dataclass(frozen=True)
class ApplicationRequest:
    """One real-time application: endpoints, required function and QoS bounds."""

    source: int
    dest: int
    function: str
    capacity_kbps: int
    delay_bound_ns: int

    @classmethod
    def from_units(cls, source: int, dest: int, function: str, capacity_mbps, delay_bound_ms) -> "ApplicationRequest":
        return cls(source, dest, function, mbps_to_kbps(capacity_mbps), ms_to_ns(delay_bound_ms))

    def check(self, g: Snapshot) -> None:
        """Raise ``ValueError`` unless the request is well formed against ``g``."""
        n = g.n_nodes
        if not (0 <= self.source < n and 0 <= self.dest < n):
            raise ValueError("request endpoint not in snapshot")
        if self.source == self.dest:
            raise ValueError("source and destination coincide")
        if g.kinds[self.source] != GROUND_TERMINAL or g.kinds[self.dest] != GROUND_TERMINAL:
            raise ValueError("request endpoints must be ground terminals")
        if self.capacity_kbps <= 0 or self.delay_bound_ns <= 0:
            raise ValueError("capacity and delay bound must be positive")
        g.nodes.function_index(self.function)

    def to_dict(self, names: Sequence[str] | None = None) -> dict:
        name = (lambda i: names[i]) if names is not None else (lambda i: i)
        return {
            "source": name(self.source),
            "dest": name(self.dest),
            "function": self.function,
            "capacity_mbps": format_fixed(self.capacity_kbps, KBPS_PER_MBPS),
            "delay_bound_ms": format_fixed(self.delay_bound_ns, NS_PER_MS),
        }


@dataclass(frozen=True)
class RoutePath:
    """A source-to-destination walk together with the node hosting the function."""

    links: tuple[Link, ...]
    function_node: int
    stats: dict = field(default_factory=dict, compare=False)

    @property
    def nodes(self) -> tuple[int, ...]:
        if not self.links:
            return ()
        return (self.links[0].src,) + tuple(l.dst for l in self.links)

    @property
    def delay_ns(self) -> int:
        return sum(l.delay_ns for l in self.links)

    @property
    def hops(self) -> int:
        return len(self.links)

    @property
    def min_capacity_kbps(self) -> int:
        return min(l.capacity_kbps for l in self.links)

    def is_simple(self) -> bool:
        nodes = self.nodes
        return len(set(nodes)) == len(nodes)

    def to_dict(self, names: Sequence[str] | None = None) -> dict:
        name = (lambda i: names[i]) if names is not None else (lambda i: i)
        return {
            "status": "feasible",
            "nodes": [name(v) for v in self.nodes],
            "function_node": name(self.function_node),
            "delay_ms": format_fixed(self.delay_ns, NS_PER_MS),
            "hops": self.hops,
            "min_capacity_mbps": format_fixed(self.min_capacity_kbps, KBPS_PER_MBPS),
        }


@dataclass(frozen=True)
class Infeasible:
    """No path satisfies the request; ``reason`` says which check failed."""

    reason: str
    stats: dict = field(default_factory=dict, compare=False)

    def __bool__(self) -> bool:
        return False

    def to_dict(self, names=None) -> dict:
        return {"status": "infeasible", "reason": self.reason}


RouteResult = Union[RoutePath, Infeasible]


def path_from_nodes(g: Snapshot, nodes: Sequence[int], function_node: int, stats: dict | None = None) -> RoutePath:
    links = []
    for u, v in zip(nodes, nodes[1:]):
        link = g.link(int(u), int(v))
        if link is None:
            raise ValueError(f"no link {u}->{v} in snapshot")
        links.append(link)
    return RoutePath(tuple(links), int(function_node), stats or {})


def route_problems(p: RoutePath, g: Snapshot, r: ApplicationRequest, max_visits: int = 2) -> list[str]:
    """Every way ``p`` fails to be an admissible route for ``r`` on ``g`` (empty if valid)."""
    problems = []
    if not p.links:
        return ["empty path"]
    for a, b in zip(p.links, p.links[1:]):
        if a.dst != b.src:
            problems.append(f"links {a.src}->{a.dst} and {b.src}->{b.dst} do not chain")
    for l in p.links:
        if g.link(l.src, l.dst) != l:
            problems.append(f"link {l.src}->{l.dst} absent from snapshot or attributes differ")
        if l.capacity_kbps < r.capacity_kbps:
            problems.append(f"link {l.src}->{l.dst} below required capacity")
    pairs = Counter((l.src, l.dst) for l in p.links)
    problems += [f"link {u}->{v} repeated" for (u, v), c in pairs.items() if c > 1]
    nodes = p.nodes
    if nodes[0] != r.source:
        problems.append("path does not start at source")
    if nodes[-1] != r.dest:
        problems.append("path does not end at destination")
    visits = Counter(nodes)
    for v, c in visits.items():
        limit = 1 if v in (r.source, r.dest) else max_visits
        if c > limit:
            problems.append(f"node {v} visited {c} times")
    if p.delay_ns > r.delay_bound_ns:
        problems.append("delay bound exceeded")
    f = g.nodes.function_index(r.function)
    fn = p.function_node
    if fn not in nodes[1:-1]:
        problems.append("function node not on path interior")
    elif not (g.is_satellite(fn) and g.budgets[fn, f] >= 1):
        problems.append("function node cannot host the function")
    return problems
