"""k-shortest simple paths routing (Yen's method) with a function check per path.

Paths are produced in nondecreasing (delay, hops) order with ties broken by
lexicographic node sequence.  Each spur search runs backwards from the
destination; because the reverse tree keeps the smallest next hop among
equal-distance alternatives, walking it forwards yields the
lexicographically smallest shortest spur path.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .paths import ApplicationRequest, Infeasible, RouteResult, path_from_nodes
from .time_graph import HOP_BITS, Snapshot, delay_bound_key
from .vfsp_router import _tree_path, request_link_mask

FORWARD = "forward"
REVERSE = "reverse"


@dataclass(frozen=True)
class KspConfig:
    """``k_max`` caps the paths examined.  With ``prune`` set, requests that
    no path through a capable satellite could meet (the two-tree lower bound
    already exceeds the delay bound) are rejected before enumeration; the
    decision is the same, only faster."""

    k_max: int = 10_000
    prune: bool = True

    def __post_init__(self):
        if self.k_max < 1:
            raise ValueError("k_max must be >= 1")


@dataclass(frozen=True, eq=False)
class DistanceTree:
    """Single-source (or single-sink) shortest delays with parent pointers."""

    root: int
    direction: str
    delay_ns: np.ndarray
    parent: np.ndarray

    def reachable(self, v: int) -> bool:
        return self.delay_ns[v] != _kernels.INF

    def path(self, v: int) -> list[int]:
        """Node sequence between ``root`` and ``v`` in travel order."""
        if not self.reachable(v):
            raise ValueError(f"node {v} unreachable")
        nodes = _tree_path(self.parent, v, self.root)
        return nodes[::-1] if self.direction == FORWARD else nodes


def shortest_path_tree(g: Snapshot, root: int, direction: str = FORWARD,
                       link_ok: np.ndarray | None = None) -> DistanceTree:
    """Exact shortest delays from ``root`` over out-links, or towards it over in-links."""
    t = g.topology
    if direction == FORWARD:
        ptr, nbr, lnk = t.out_ptr, t.out_node, t.out_link
    elif direction == REVERSE:
        ptr, nbr, lnk = t.in_ptr, t.in_node, t.in_link
    else:
        raise ValueError(f"unknown direction {direction!r}")
    if link_ok is None:
        link_ok = np.ones(g.n_links, dtype=np.bool_)
    node_ok = np.ones(g.n_nodes, dtype=np.bool_)
    key, parent, _, _, _ = _kernels.shortest_tree(ptr, nbr, lnk, g.weight, link_ok, node_ok, root)
    delay = np.where(key == _kernels.INF, _kernels.INF, key >> HOP_BITS)
    return DistanceTree(root, direction, delay, parent)


class _SpurSearch:
    """Reverse Dijkstra from the destination on the request-filtered graph, with blocking."""

    def __init__(self, g: Snapshot, link_ok: np.ndarray, dest: int):
        t = g.topology
        self.args = (t.in_ptr, t.in_node, t.in_link, g.weight)
        self.link_ok = link_ok
        self.node_ok = np.ones(g.n_nodes, dtype=np.bool_)
        self.dest = dest
        self.calls = 0

    def __call__(self, spur: int, blocked_nodes, blocked_links, bound: int):
        self.calls += 1
        node_ok = self.node_ok.copy()
        node_ok[list(blocked_nodes)] = False
        link_ok = self.link_ok
        if blocked_links:
            link_ok = link_ok.copy()
            link_ok[blocked_links] = False
        key, nxt, _, _, _ = _kernels.shortest_tree(*self.args, link_ok, node_ok, self.dest, spur, bound)
        if key[spur] == _kernels.INF:
            return None
        return int(key[spur]), _tree_path(nxt, spur, self.dest)


def iter_simple_paths(g: Snapshot, r: ApplicationRequest, bound: int | None = None):
    """Yield ``(key, nodes)`` for simple source-destination paths in (delay, hops, lex) order.

    ``key`` packs delay and hop count as ``(delay_ns << 16) + hops``.  Only
    paths with ``key <= bound`` are produced; links below the request's
    capacity are ignored.
    """
    if bound is None:
        bound = _kernels.INF
    link_ok = request_link_mask(g, r)
    search = _SpurSearch(g, link_ok, r.dest)
    link_id = g.topology.link_index()
    weight = g.weight

    first = search(r.source, (), [], bound)
    if first is None:
        return
    candidates = [(first[0], tuple(first[1]))]
    seen = {candidates[0][1]}
    used_next: dict[tuple[int, ...], set[int]] = {}
    while candidates:
        key, path = heapq.heappop(candidates)
        yield key, path
        for i in range(len(path) - 1):
            used_next.setdefault(path[: i + 1], set()).add(path[i + 1])
        root_key = 0
        for i in range(len(path) - 1):
            spur = path[i]
            root = path[: i + 1]
            blocked = [link_id[(spur, nxt)] for nxt in used_next[root]]
            found = search(spur, root[:-1], blocked, bound - root_key)
            if found is not None:
                total = root[:-1] + tuple(found[1])
                if total not in seen:
                    seen.add(total)
                    heapq.heappush(candidates, (root_key + found[0], total))
            root_key += int(weight[link_id[(spur, path[i + 1])]])


def _function_lower_bound(g: Snapshot, r: ApplicationRequest, functional: np.ndarray) -> int:
    """Smallest key of any walk (simple or not) from source to dest through a capable satellite."""
    link_ok = request_link_mask(g, r)
    node_ok = np.ones(g.n_nodes, dtype=np.bool_)
    t = g.topology
    fwd = _kernels.shortest_tree(t.out_ptr, t.out_node, t.out_link, g.weight, link_ok, node_ok, r.source)[0]
    rev = _kernels.shortest_tree(t.in_ptr, t.in_node, t.in_link, g.weight, link_ok, node_ok, r.dest)[0]
    ok = functional & (fwd != _kernels.INF) & (rev != _kernels.INF)
    if not ok.any():
        return _kernels.INF
    return int((fwd[ok] + rev[ok]).min())


def route_ksp(g: Snapshot, r: ApplicationRequest, cfg: KspConfig | None = None) -> RouteResult:
    """First k-shortest simple path that passes a satellite able to run ``r.function``.

    Infeasible when the candidates run out within the delay bound or
    ``cfg.k_max`` paths were examined without success.
    """
    cfg = cfg or KspConfig()
    r.check(g)
    functional = g.function_mask(r.function)
    stats = {"k": 0, "backend": _kernels.backend(), "pruned": False}
    if not functional.any():
        return Infeasible("no functional satellite", stats)
    if cfg.prune and _function_lower_bound(g, r, functional) > delay_bound_key(r.delay_bound_ns):
        stats["pruned"] = True
        return Infeasible("no functional path within delay bound", stats)
    for key, nodes in iter_simple_paths(g, r, delay_bound_key(r.delay_bound_ns)):
        stats["k"] += 1
        hits = [v for v in nodes if functional[v]]
        if hits:
            return path_from_nodes(g, nodes, hits[0], stats)
        if stats["k"] >= cfg.k_max:
            return Infeasible("k_max reached", stats)
    return Infeasible("no path within delay bound" if stats["k"] else "no path", stats)
