"""Compare the numba and pure-Python shortest-tree kernels.

    python3 benchmarks/bench_kernels.py --sats 1000 --roots 50

Both backends are called directly on the same snapshot, so the flag
``VFROUTE_NO_NUMBA`` does not need to be toggled.  Outputs are checked for
equality before timings are reported.
"""

from __future__ import annotations

import argparse
import statistics
import time

import numpy as np

from vfroute import _kernels
from vfroute.constellation import ScenarioConfig, build_scenario
from vfroute.time_graph import build_snapshots


def run(kernel, g, roots, reverse: bool) -> tuple[list[float], list]:
    t = g.topology
    csr = (t.in_ptr, t.in_node, t.in_link) if reverse else (t.out_ptr, t.out_node, t.out_link)
    link_ok = np.ones(g.n_links, dtype=np.bool_)
    node_ok = np.ones(g.n_nodes, dtype=np.bool_)
    times, outs = [], []
    for root in roots:
        t0 = time.perf_counter()
        out = kernel(*csr, g.weight, link_ok, node_ok, np.int64(root), np.int64(-1), np.int64(_kernels.INF))
        times.append(time.perf_counter() - t0)
        outs.append(out)
    return times, outs


def main(argv=None) -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sats", type=int, default=1000)
    ap.add_argument("--roots", type=int, default=50)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)

    if not _kernels.HAVE_NUMBA:
        raise SystemExit("numba backend unavailable (unset VFROUTE_NO_NUMBA to compare)")
    cfg = ScenarioConfig(n_sats=args.sats, horizon_s=30.0, seed=args.seed)
    g = build_snapshots(build_scenario(cfg), cfg.horizon)[0]
    roots = np.random.default_rng(args.seed).integers(0, g.n_nodes, size=args.roots)
    run(_kernels.shortest_tree_nb, g, roots[:1], False)  # compile / load cache

    print(f"snapshot: {g.n_nodes} nodes, {g.n_links} links, {len(roots)} full trees per direction")
    print(f"{'direction':<10}{'backend':<10}{'median ms':>12}{'mean ms':>12}{'speedup':>10}")
    for reverse in (False, True):
        t_nb, o_nb = run(_kernels.shortest_tree_nb, g, roots, reverse)
        t_py, o_py = run(_kernels.shortest_tree_py, g, roots, reverse)
        for a, b in zip(o_nb, o_py):
            assert all(np.array_equal(x, y) for x, y in zip(a[:3], b[:3])) and a[3:] == b[3:], "backends disagree"
        label = "reverse" if reverse else "forward"
        speedup = statistics.median(t_py) / statistics.median(t_nb)
        for name, ts, extra in (("numba", t_nb, f"{speedup:9.1f}x"), ("python", t_py, "")):
            print(f"{label:<10}{name:<10}{statistics.median(ts) * 1e3:12.3f}{statistics.mean(ts) * 1e3:12.3f}{extra:>10}")


if __name__ == "__main__":
    main()
