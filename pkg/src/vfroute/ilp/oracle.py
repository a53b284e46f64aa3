"""Exhaustive search for the optimum of the path-selection ILP on small graphs.

Deliberately independent of the Dijkstra kernels: a plain depth-first walk
enumeration over dictionaries, pruned by the delay bound and by the incumbent
with a Floyd-Warshall look-ahead.  Used as ground truth for the routers.
"""

from __future__ import annotations

from ..paths import ApplicationRequest, Infeasible, RoutePath, RouteResult
from ..time_graph import SATELLITE, Link, Snapshot

DEFAULT_NODE_LIMIT = 14


class InstanceTooLarge(ValueError):
    pass


def brute_force_optimal(g: Snapshot, r: ApplicationRequest, *, max_visits: int = 2,
                        node_limit: int = DEFAULT_NODE_LIMIT) -> RouteResult:
    """Best walk from ``r.source`` to ``r.dest`` under the ILP's rules.

    Relay nodes may appear up to ``max_visits`` times (2 for the ILP, 1 for
    the simple-path variant), the endpoints exactly once, and no directed
    link twice.  Only links with capacity >= the request's are used.  The
    walk must contain a satellite with budget >= 1 for the requested
    function and stay within the delay bound.  Ties: fewer hops, then the
    lexicographically smaller link sequence.
    """
    if g.n_nodes > node_limit:
        raise InstanceTooLarge(f"instance too large: {g.n_nodes} nodes > limit {node_limit}")
    r.check(g)
    f = g.nodes.function_index(r.function)
    capable = {v for v in range(g.n_nodes)
               if int(g.kinds[v]) == SATELLITE and int(g.budgets[v, f]) >= 1}
    adj: dict[int, list[Link]] = {v: [] for v in range(g.n_nodes)}
    for link in g.links():
        if link.capacity_kbps >= r.capacity_kbps:
            adj[link.src].append(link)
    for v in adj:
        adj[v].sort(key=lambda l: (l.delay_ns, l.dst))

    # admissible look-ahead: all-pairs distances (Floyd-Warshall) ignore the visit
    # and link-reuse rules, so they never overestimate what is left
    inf = float("inf")
    n = g.n_nodes
    dist = [[0 if i == j else inf for j in range(n)] for i in range(n)]
    for u in adj:
        for l in adj[u]:
            dist[u][l.dst] = min(dist[u][l.dst], l.delay_ns)
    for k in range(n):
        dk = dist[k]
        for i in range(n):
            dik = dist[i][k]
            if dik == inf:
                continue
            di = dist[i]
            for j in range(n):
                if dik + dk[j] < di[j]:
                    di[j] = dik + dk[j]
    to_dest = [dist[u][r.dest] for u in range(n)]
    via_capable = [min((dist[u][c] + dist[c][r.dest] for c in capable), default=inf) for u in range(n)]

    bound = r.delay_bound_ns
    best: list = [None]  # (delay, hops, link pairs, links)
    visits = {v: 0 for v in adj}
    used: set[tuple[int, int]] = set()
    trail: list[Link] = []

    def dfs(u: int, delay: int, n_capable: int):
        hops = len(trail)
        if u == r.dest:
            if n_capable:
                key = (delay, hops, tuple((l.src, l.dst) for l in trail))
                if best[0] is None or key < best[0][:3]:
                    best[0] = key + (tuple(trail),)
            return
        if best[0] is not None and (delay, hops) >= best[0][:2]:
            return
        rest = to_dest[u] if n_capable else via_capable[u]
        if delay + rest > bound or (best[0] is not None and delay + rest > best[0][0]):
            return
        for link in adj[u]:
            v = link.dst
            nd = delay + link.delay_ns
            if nd > bound or v == r.source or (link.src, v) in used:
                continue
            if v != r.dest and visits[v] >= max_visits:
                continue
            visits[v] += 1
            used.add((link.src, v))
            trail.append(link)
            dfs(v, nd, n_capable + (v in capable))
            trail.pop()
            used.discard((link.src, v))
            visits[v] -= 1

    visits[r.source] = 1
    dfs(r.source, 0, 0)
    if best[0] is None:
        return Infeasible("no feasible walk")
    links = best[0][3]
    function_node = next(l.dst for l in links if l.dst in capable)
    return RoutePath(links, function_node)


def brute_force_simple(g: Snapshot, r: ApplicationRequest, *, node_limit: int = DEFAULT_NODE_LIMIT) -> RouteResult:
    """Same search restricted to simple paths (every node at most once)."""
    return brute_force_optimal(g, r, max_visits=1, node_limit=node_limit)
