"""VF-aware shortest path routing.

One forward Dijkstra from the source and one on the reversed graph from the
destination; the answer joins the two trees at the function-capable
satellite with the smallest summed distance.  The joined walk may revisit
relay nodes (at most twice), which is exactly what lets it reach a function
that lies off every simple path.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np

from . import _kernels
from .paths import ApplicationRequest, Infeasible, RoutePath, RouteResult
from .time_graph import HOP_BITS, Link, Snapshot, capacity_mask, delay_bound_key, format_fixed, NS_PER_MS


def request_link_mask(g: Snapshot, r: ApplicationRequest) -> np.ndarray:
    """Links usable by ``r``: enough capacity, never entering the source or leaving the destination."""
    return capacity_mask(g, r.capacity_kbps) & (g.dst != r.source) & (g.src != r.dest)


def _tree_path(parent_node: np.ndarray, start: int, root: int) -> list[int]:
    """Follow parent pointers from ``start`` until ``root``."""
    out = [start]
    v = start
    while v != root:
        v = int(parent_node[v])
        out.append(v)
    return out


def join_paths(fwd: Sequence[Link], rev: Sequence[Link], meet: int) -> RoutePath:
    """Concatenate a forward fragment with a reversed-graph fragment.

    ``fwd`` runs from the source to ``meet`` in the original graph.  ``rev``
    runs from the destination to ``meet`` in the reversed graph, so each of
    its links is the mirror image of an original link.
    """
    if not fwd or fwd[-1].dst != meet:
        raise ValueError("forward fragment does not end at the meeting node")
    if not rev or rev[-1].dst != meet:
        raise ValueError("reverse fragment does not end at the meeting node")
    for frag in (fwd, rev):
        for a, b in zip(frag, frag[1:]):
            if a.dst != b.src:
                raise ValueError("fragment links do not chain")
    back = tuple(Link(l.dst, l.src, l.delay_ns, l.capacity_kbps) for l in reversed(rev))
    return RoutePath(tuple(fwd) + back, meet)


def route_vfsp(g: Snapshot, r: ApplicationRequest) -> RouteResult:
    """Minimum-delay route through a satellite hosting ``r.function``.

    Infeasible when no capable satellite survives the capacity filter or the
    best joined walk exceeds the delay bound.  Ties between satellites with
    equal (delay, hops) go to the lower node id.
    """
    r.check(g)
    cap_ok = capacity_mask(g, r.capacity_kbps)
    stats = {"links_touched": g.n_links, "pq_pops": 0, "backend": _kernels.backend()}

    touched = np.zeros(g.n_nodes, dtype=bool)
    touched[g.src[cap_ok]] = True
    touched[g.dst[cap_ok]] = True
    candidates = np.flatnonzero(touched & g.function_mask(r.function))
    stats["candidates"] = int(len(candidates))
    if len(candidates) == 0:
        return Infeasible("no functional satellite", stats)

    link_ok = cap_ok & (g.dst != r.source) & (g.src != r.dest)
    node_ok = np.ones(g.n_nodes, dtype=np.bool_)
    t = g.topology
    fwd_key, fwd_parent, fwd_link, pops_f, touched_f = _kernels.shortest_tree(
        t.out_ptr, t.out_node, t.out_link, g.weight, link_ok, node_ok, r.source)
    rev_key, rev_next, rev_link, pops_r, touched_r = _kernels.shortest_tree(
        t.in_ptr, t.in_node, t.in_link, g.weight, link_ok, node_ok, r.dest)
    stats["links_touched"] += touched_f + touched_r
    stats["pq_pops"] = pops_f + pops_r

    a = fwd_key[candidates]
    b = rev_key[candidates]
    reachable = (a != _kernels.INF) & (b != _kernels.INF)
    if not reachable.any():
        return Infeasible("no functional satellite reachable", stats)
    total = np.where(reachable, a + np.where(reachable, b, 0), _kernels.INF)
    i = int(np.argmin(total))  # candidates ascend, so ties resolve to the lowest id
    if total[i] > delay_bound_key(r.delay_bound_ns):
        stats["best_delay_ms"] = format_fixed(int(total[i]) >> HOP_BITS, NS_PER_MS)
        return Infeasible("delay bound exceeded", stats)

    meet = int(candidates[i])
    fwd_nodes = _tree_path(fwd_parent, meet, r.source)[::-1]
    back_nodes = _tree_path(rev_next, meet, r.dest)
    fwd = [g.link(u, v) for u, v in zip(fwd_nodes, fwd_nodes[1:])]
    # reversed-graph fragment: dest -> ... -> meet over mirrored links
    rev = [Link(v, u, l.delay_ns, l.capacity_kbps)
           for (u, v), l in ((pair, g.link(*pair)) for pair in zip(back_nodes, back_nodes[1:]))][::-1]
    path = join_paths(fwd, rev, meet)
    stats.update(
        function_node=meet,
        fwd_delay_ms=format_fixed(int(a[i]) >> HOP_BITS, NS_PER_MS),
        rev_delay_ms=format_fixed(int(b[i]) >> HOP_BITS, NS_PER_MS),
        reuses_link=len({(l.src, l.dst) for l in path.links}) != path.hops,
    )
    return RoutePath(path.links, meet, stats)
