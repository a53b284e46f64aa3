"""Shortest-path kernels shared by the routers.

Two interchangeable backends live here: a numba ``@njit`` version (default)
and a pure Python/numpy version built on :mod:`heapq`.  Set
``VFROUTE_NO_NUMBA=1`` in the environment to force the fallback, e.g. when
debugging or on platforms without numba.  Both backends settle nodes in the
same ``(distance, node id)`` order and apply the same order-independent tie
rule, so they return identical arrays.
"""

from __future__ import annotations

import heapq
import os

import numpy as np

INF = np.iinfo(np.int64).max

_DISABLED = os.environ.get("VFROUTE_NO_NUMBA", "").strip().lower() not in ("", "0", "false", "no")

try:
    if _DISABLED:
        raise ImportError("numba disabled by VFROUTE_NO_NUMBA")
    from numba import njit

    HAVE_NUMBA = True
except ImportError:
    HAVE_NUMBA = False

    def njit(*args, **kwargs):
        if len(args) == 1 and callable(args[0]) and not kwargs:
            return args[0]

        def wrap(func):
            return func

        return wrap


def shortest_tree_py(ptr, adj_node, adj_link, weight, link_ok, node_ok, root, target, bound):
    """Dijkstra over a CSR adjacency, pure Python.

    ``ptr``/``adj_node``/``adj_link`` describe the adjacency of the graph being
    searched (out-links for a forward search, in-links for a reverse one).
    Links with ``link_ok[l] == False`` and nodes with ``node_ok[v] == False``
    are invisible.  The search stops once ``target`` is settled (pass ``-1``
    to settle everything) or once the smallest tentative key exceeds
    ``bound``.

    Returns ``(dist, parent_node, parent_link, n_settled, n_touched)``; only
    settled nodes carry a finite distance.  ``parent_node[v]`` is the node
    from which ``v`` was reached; among equal-distance alternatives the one
    with the smaller id wins.
    """
    n = len(ptr) - 1
    dist = np.full(n, INF, dtype=np.int64)
    parent_node = np.full(n, -1, dtype=np.int64)
    parent_link = np.full(n, -1, dtype=np.int64)
    done = np.zeros(n, dtype=np.bool_)
    settled = 0
    touched = 0
    if not node_ok[root]:
        return dist, parent_node, parent_link, settled, touched

    tent = {root: 0}
    heap = [(0, root)]
    ptr_l = ptr.tolist()
    adj_node_l = adj_node.tolist()
    adj_link_l = adj_link.tolist()
    while heap:
        du, u = heap[0]
        if du > bound:
            break
        heapq.heappop(heap)
        if done[u] or tent.get(u) != du:
            continue
        done[u] = True
        dist[u] = du
        settled += 1
        if u == target:
            break
        for k in range(ptr_l[u], ptr_l[u + 1]):
            l = adj_link_l[k]
            if not link_ok[l]:
                continue
            v = adj_node_l[k]
            touched += 1
            if done[v] or not node_ok[v]:
                continue
            nd = du + int(weight[l])
            cur = tent.get(v)
            if cur is None or nd < cur:
                tent[v] = nd
                parent_node[v] = u
                parent_link[v] = l
                heapq.heappush(heap, (nd, v))
            elif nd == cur and u < parent_node[v]:
                parent_node[v] = u
                parent_link[v] = l

    parent_node[~done] = -1
    parent_link[~done] = -1
    return dist, parent_node, parent_link, settled, touched


@njit(cache=True, inline="always")
def _before(dist, a, b):
    return dist[a] < dist[b] or (dist[a] == dist[b] and a < b)


@njit(cache=True, inline="always")
def _sift_up(heap, pos, dist, i):
    node = heap[i]
    while i > 0:
        up = (i - 1) >> 1
        other = heap[up]
        if _before(dist, node, other):
            heap[i] = other
            pos[other] = i
            i = up
        else:
            break
    heap[i] = node
    pos[node] = i


@njit(cache=True, inline="always")
def _sift_down(heap, pos, dist, i, size):
    node = heap[i]
    while True:
        child = 2 * i + 1
        if child >= size:
            break
        if child + 1 < size and _before(dist, heap[child + 1], heap[child]):
            child += 1
        other = heap[child]
        if _before(dist, other, node):
            heap[i] = other
            pos[other] = i
            i = child
        else:
            break
    heap[i] = node
    pos[node] = i


@njit(cache=True)
def shortest_tree_nb(ptr, adj_node, adj_link, weight, link_ok, node_ok, root, target, bound):
    # indexed binary heap with decrease-key: every pop settles a node
    n = ptr.shape[0] - 1
    dist = np.full(n, INF, dtype=np.int64)
    parent_node = np.full(n, -1, dtype=np.int64)
    parent_link = np.full(n, -1, dtype=np.int64)
    done = np.zeros(n, dtype=np.bool_)
    heap = np.empty(max(n, 1), dtype=np.int64)
    pos = np.full(n, -1, dtype=np.int64)
    settled = 0
    touched = 0
    if not node_ok[root]:
        return dist, parent_node, parent_link, settled, touched

    dist[root] = 0
    heap[0] = root
    pos[root] = 0
    size = 1
    while size > 0:
        u = heap[0]
        du = dist[u]
        if du > bound:
            break
        size -= 1
        pos[u] = -1
        if size > 0:
            last = heap[size]
            heap[0] = last
            pos[last] = 0
            _sift_down(heap, pos, dist, 0, size)
        done[u] = True
        settled += 1
        if u == target:
            break
        for k in range(ptr[u], ptr[u + 1]):
            l = adj_link[k]
            if not link_ok[l]:
                continue
            v = adj_node[k]
            touched += 1
            if done[v] or not node_ok[v]:
                continue
            nd = du + weight[l]
            if nd < dist[v]:
                dist[v] = nd
                parent_node[v] = u
                parent_link[v] = l
                if pos[v] < 0:
                    heap[size] = v
                    pos[v] = size
                    size += 1
                _sift_up(heap, pos, dist, pos[v])
            elif nd == dist[v] and u < parent_node[v]:
                parent_node[v] = u
                parent_link[v] = l

    for v in range(n):
        if not done[v]:
            dist[v] = INF
            parent_node[v] = -1
            parent_link[v] = -1
    return dist, parent_node, parent_link, settled, touched


def shortest_tree(ptr, adj_node, adj_link, weight, link_ok, node_ok, root, target=-1, bound=INF):
    """Dispatch to the active backend.  See :func:`shortest_tree_py`."""
    if HAVE_NUMBA:
        dist, pn, pl, settled, touched = shortest_tree_nb(
            ptr, adj_node, adj_link, weight, link_ok, node_ok,
            np.int64(root), np.int64(target), np.int64(bound),
        )
        return dist, pn, pl, int(settled), int(touched)
    return shortest_tree_py(ptr, adj_node, adj_link, weight, link_ok, node_ok,
                            int(root), int(target), int(bound))


def backend() -> str:
    return "numba" if HAVE_NUMBA else "python"
