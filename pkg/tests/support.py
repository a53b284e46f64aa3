"""Fixtures shared by the test modules: hand-built graphs and random small instances."""

from __future__ import annotations

import numpy as np

from vfroute.paths import ApplicationRequest
from vfroute.time_graph import GROUND_TERMINAL, SATELLITE, NodeTable, Snapshot, TimeWindow, mbps_to_kbps, ms_to_ns

WINDOW = TimeWindow(0.0, 60.0)


def make_nodes(names, kinds, functions=("f1",), budgets=None) -> NodeTable:
    kinds = np.array([SATELLITE if k in ("sat", SATELLITE) else GROUND_TERMINAL for k in kinds])
    if budgets is None:
        budgets = np.zeros((len(names), len(functions)), dtype=np.int64)
    return NodeTable(tuple(names), kinds, tuple(functions), np.asarray(budgets, dtype=np.int64))


def make_snapshot(nodes: NodeTable, links, window: TimeWindow = WINDOW) -> Snapshot:
    """``links`` holds ``(src, dst, delay_ms, capacity_mbps)`` with names or ids."""
    idx = nodes.index
    rows = []
    for u, v, delay, cap in links:
        u = idx[u] if isinstance(u, str) else u
        v = idx[v] if isinstance(v, str) else v
        rows.append((u, v, ms_to_ns(delay), mbps_to_kbps(cap)))
    return Snapshot.from_links(window, nodes, rows)


def g0() -> Snapshot:
    """s -> A -> d with a two-way spur A <-> B; only B hosts f1."""
    nodes = make_nodes(["s", "A", "B", "d"], ["gt", "sat", "sat", "gt"], budgets=[[0], [0], [1], [0]])
    return make_snapshot(nodes, [("s", "A", 5, 100), ("A", "d", 5, 100), ("A", "B", 7, 100), ("B", "A", 7, 100)])


def g0_request(delay_bound_ms=30) -> ApplicationRequest:
    return ApplicationRequest.from_units(0, 3, "f1", 10, delay_bound_ms)


def random_instance(rng: np.random.Generator, *, max_nodes: int = 12, density=(0.3, 0.6),
                    symmetric: bool = True, delay_ms=(1, 10), n_functions: int = 2,
                    bound_ms=(5, 60), capacity_mbps=(5, 100)):
    """Random snapshot with 2-3 ground terminals plus one request between two of them.

    Delays are small whole milliseconds so equal-delay ties are common.
    """
    n = int(rng.integers(4, max_nodes + 1))
    n_gt = int(rng.integers(2, 4)) if n > 5 else 2
    kinds = ["gt"] * n_gt + ["sat"] * (n - n_gt)
    perm = rng.permutation(n)
    kinds = [kinds[i] for i in perm]
    functions = tuple(f"f{i + 1}" for i in range(n_functions))
    budgets = np.zeros((n, n_functions), dtype=np.int64)
    sats = [i for i, k in enumerate(kinds) if k == "sat"]
    p_func = rng.uniform(0.1, 0.5)
    for v in sats:
        budgets[v] = (rng.random(n_functions) < p_func).astype(np.int64)
    nodes = make_nodes([f"n{i}" for i in range(n)], kinds, functions, budgets)

    p = rng.uniform(*density)
    links = []
    for u in range(n):
        for v in range(u + 1, n):
            if kinds[u] == "gt" and kinds[v] == "gt":
                continue
            if symmetric:
                if rng.random() < p:
                    d, c = int(rng.integers(delay_ms[0], delay_ms[1] + 1)), int(rng.integers(10, 101))
                    links += [(u, v, d, c), (v, u, d, c)]
            else:
                for a, b in ((u, v), (v, u)):
                    if rng.random() < p:
                        links.append((a, b, int(rng.integers(delay_ms[0], delay_ms[1] + 1)),
                                      int(rng.integers(10, 101))))
    g = make_snapshot(nodes, links)
    gts = [i for i, k in enumerate(kinds) if k == "gt"]
    s, d = (int(x) for x in rng.choice(gts, size=2, replace=False))
    r = ApplicationRequest.from_units(s, d, functions[int(rng.integers(n_functions))],
                                      int(rng.integers(capacity_mbps[0], capacity_mbps[1] + 1)),
                                      int(rng.integers(bound_ms[0], bound_ms[1] + 1)))
    return g, r


def instance_set(seed: int, count: int, **kwargs):
    rng = np.random.default_rng(seed)
    return [random_instance(rng, **kwargs) for _ in range(count)]
