"""Online admission campaigns over a sequence of snapshots.

Requests arrive at evenly spaced instants across the horizon and are routed,
one by one, on the snapshot whose window contains the arrival time.  An
accepted request consumes one call of its function on the chosen satellite
for the rest of the horizon and, when link reservation is on, its capacity
on every link of the path.  Rejected requests are never retried.
"""

from __future__ import annotations

import csv
import dataclasses
import json
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from . import _kernels
from .constellation import ScenarioConfig, assign_functions, build_scenario
from .ksp_router import KspConfig, route_ksp
from .paths import ApplicationRequest, RoutePath, route_problems
from .time_graph import NS_PER_MS, ContactPlan, NodeTable, Snapshot, build_snapshots, mbps_to_kbps, ms_to_ns
from .vfsp_router import route_vfsp

ALGORITHMS = ("ksp", "vfsp")
RESERVATIONS = ("none", "until_horizon_end")
SWEEP_PARAMS = ("none", "function_fraction", "n_satellites")
METRICS_HEADER = ["param_value", "algorithm", "acceptance_ratio", "mean_delay_ms", "mean_hops",
                  "mean_query_us", "p95_query_us"]
AVERAGING_NOTE = "mean_delay_ms and mean_hops average over accepted requests only"


@dataclass(frozen=True)
class SimulationConfig:
    """Campaign knobs.

    ``function_enabled_fraction`` re-draws function budgets on the plan's
    satellites (``n_functions`` functions named ``f1..fN``, each on a random
    ``ceil(fraction * n_sats)`` subset with ``per_satellite_call_cap`` calls).
    Set it to ``None`` to keep the budgets the plan ships with.
    """

    n_requests: int = 5000
    capacity_range_mbps: tuple[float, float] = (5, 100)
    delay_bound_range_ms: tuple[float, float] = (20, 150)
    n_functions: int = 3
    function_enabled_fraction: float | None = 0.1
    per_satellite_call_cap: int = 1
    rng_seed: int = 0
    algorithm: str = "vfsp"
    capacity_reservation: str = "none"
    k_max: int = 10_000
    ksp_prune: bool = True

    def __post_init__(self):
        for name in ("capacity_range_mbps", "delay_bound_range_ms"):
            lo, hi = getattr(self, name)
            if lo > hi:
                raise ValueError(f"{name}: empty range")
            object.__setattr__(self, name, (lo, hi))
        if self.capacity_range_mbps[0] <= 0 or self.delay_bound_range_ms[0] <= 0:
            raise ValueError("capacity and delay bound ranges must be positive")
        if self.n_requests < 0:
            raise ValueError("n_requests must be nonnegative")
        if self.n_functions < 1:
            raise ValueError("n_functions must be >= 1")
        frac = self.function_enabled_fraction
        if frac is not None and not 0 < frac <= 1:
            raise ValueError("function_enabled_fraction must be in (0, 1]")
        if self.per_satellite_call_cap < 0:
            raise ValueError("per_satellite_call_cap must be nonnegative")
        if self.algorithm not in ALGORITHMS:
            raise ValueError(f"algorithm must be one of {ALGORITHMS}")
        if self.capacity_reservation not in RESERVATIONS:
            raise ValueError(f"capacity_reservation must be one of {RESERVATIONS}")
        KspConfig(self.k_max, self.ksp_prune)

    def replace(self, **changes) -> "SimulationConfig":
        return dataclasses.replace(self, **changes)

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d["capacity_range_mbps"] = list(self.capacity_range_mbps)
        d["delay_bound_range_ms"] = list(self.delay_bound_range_ms)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "SimulationConfig":
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise ValueError(f"unknown simulation keys: {sorted(unknown)}")
        d = dict(d)
        for key in ("capacity_range_mbps", "delay_bound_range_ms"):
            if key in d:
                d[key] = tuple(d[key])
        return cls(**d)


def _streams(seed: int):
    requests, functions = np.random.SeedSequence(seed).spawn(2)
    return np.random.default_rng(requests), np.random.default_rng(functions)


class ResourceState:
    """Remaining function calls per node, and capacity reserved per (src, dst) pair."""

    def __init__(self, budgets: np.ndarray):
        self.initial = np.array(budgets, dtype=np.int64)
        self.budgets = self.initial.copy()
        self.reserved: dict[tuple[int, int], int] = {}

    def consume(self, node: int, function: int) -> None:
        if self.budgets[node, function] < 1:
            raise RuntimeError(f"budget of node {node} for function {function} already exhausted")
        self.budgets[node, function] -= 1

    def reserve(self, path: RoutePath, capacity_kbps: int) -> None:
        for l in path.links:
            self.reserved[(l.src, l.dst)] = self.reserved.get((l.src, l.dst), 0) + capacity_kbps

    def view(self, g: Snapshot) -> Snapshot:
        """``g`` with current budgets and, if anything is reserved, residual capacities."""
        view = g.with_budgets(self.budgets)
        if self.reserved:
            cap = g.capacity_kbps.copy()
            index = g.topology.link_index()
            for pair, amount in self.reserved.items():
                i = index.get(pair)
                if i is not None:
                    cap[i] = max(cap[i] - amount, 0)
            view = view.with_capacity(cap)
        return view


@dataclass
class Metrics:
    algorithm: str
    n_requests: int
    n_accepted: int
    delay_ns_total: int
    hops_total: int
    query_us: np.ndarray
    decisions: list[dict] = field(default_factory=list)
    final_budgets: np.ndarray | None = None

    @property
    def acceptance_ratio(self) -> float:
        return self.n_accepted / self.n_requests if self.n_requests else 0.0

    @property
    def mean_delay_ms(self) -> float:
        if not self.n_accepted:
            return float("nan")
        return self.delay_ns_total / self.n_accepted / NS_PER_MS

    @property
    def mean_hops(self) -> float:
        return self.hops_total / self.n_accepted if self.n_accepted else float("nan")

    @property
    def mean_query_us(self) -> float:
        return float(self.query_us.mean()) if len(self.query_us) else float("nan")

    @property
    def p95_query_us(self) -> float:
        return float(np.percentile(self.query_us, 95)) if len(self.query_us) else float("nan")

    def decision_log(self) -> str:
        """JSON lines, one per request; free of timings so reruns are byte-identical."""
        return "".join(json.dumps(d, sort_keys=True) + "\n" for d in self.decisions)


def generate_requests(cfg: SimulationConfig, gts: Sequence[int], functions: Sequence[str],
                      rng: np.random.Generator) -> list[ApplicationRequest]:
    """Random source/destination pairs with uniform capacity, delay bound and function.

    Capacity and delay bound are drawn uniformly on the fixed-point grid
    (kbps, ns) with both ends inclusive.
    """
    gts = list(gts)
    if len(gts) < 2:
        raise ValueError("need at least two ground terminals")
    if not functions:
        raise ValueError("need at least one function")
    n = cfg.n_requests
    pairs = np.array([rng.choice(len(gts), size=2, replace=False) for _ in range(n)]).reshape(n, 2)
    cap = rng.integers(mbps_to_kbps(cfg.capacity_range_mbps[0]), mbps_to_kbps(cfg.capacity_range_mbps[1]),
                       size=n, endpoint=True)
    bound = rng.integers(ms_to_ns(cfg.delay_bound_range_ms[0]), ms_to_ns(cfg.delay_bound_range_ms[1]),
                         size=n, endpoint=True)
    fidx = rng.integers(0, len(functions), size=n)
    return [ApplicationRequest(gts[a], gts[b], functions[f], int(c), int(d))
            for (a, b), c, d, f in zip(pairs.tolist(), cap.tolist(), bound.tolist(), fidx.tolist())]


def arrival_times(snapshots: Sequence[Snapshot], n: int) -> np.ndarray:
    t0, t1 = snapshots[0].window.t_start, snapshots[-1].window.t_end
    return t0 + (np.arange(n) + 0.5) / max(n, 1) * (t1 - t0)


def _router(cfg: SimulationConfig) -> Callable:
    if cfg.algorithm == "vfsp":
        return route_vfsp
    ksp = KspConfig(cfg.k_max, cfg.ksp_prune)
    return lambda g, r: route_ksp(g, r, ksp)


def run_campaign(snapshots: Sequence[Snapshot], requests: Sequence[ApplicationRequest],
                 cfg: SimulationConfig, budgets: np.ndarray | None = None) -> Metrics:
    """Route ``requests`` in order and account resources.

    ``budgets`` overrides the snapshots' initial function budgets.  Every
    accepted path is re-validated against the view it was computed on; a
    failure there is a router bug and raises ``RuntimeError``.
    """
    if not snapshots:
        raise ValueError("no snapshots")
    names = snapshots[0].nodes.names
    state = ResourceState(snapshots[0].budgets if budgets is None else budgets)
    route = _router(cfg)
    reserve = cfg.capacity_reservation == "until_horizon_end"
    starts = np.array([g.window.t_start for g in snapshots])
    times = arrival_times(snapshots, len(requests))
    which = np.clip(np.searchsorted(starts, times, side="right") - 1, 0, len(snapshots) - 1)

    query_us = np.zeros(len(requests))
    decisions = []
    accepted = delay_total = hops_total = 0
    for i, (r, t, w) in enumerate(zip(requests, times.tolist(), which.tolist())):
        g = snapshots[w]
        view = state.view(g)
        tic = time.perf_counter_ns()
        result = route(view, r)
        query_us[i] = (time.perf_counter_ns() - tic) / 1000
        entry = {"i": i, "t_s": round(t, 6), "window": w, **r.to_dict(names)}
        if isinstance(result, RoutePath):
            problems = route_problems(result, view, r)
            if cfg.algorithm == "ksp" and not result.is_simple():
                problems.append("path is not simple")
            if problems:
                raise RuntimeError(f"request {i}: router returned an invalid path: {problems}")
            state.consume(result.function_node, view.nodes.function_index(r.function))
            if reserve:
                state.reserve(result, r.capacity_kbps)
            accepted += 1
            delay_total += result.delay_ns
            hops_total += result.hops
            entry.update(accepted=True, **{k: v for k, v in result.to_dict(names).items() if k != "status"})
        else:
            entry.update(accepted=False, reason=result.reason)
        decisions.append(entry)
    return Metrics(cfg.algorithm, len(requests), accepted, delay_total, hops_total, query_us,
                   decisions, state.budgets)


def _plan_budgets(nodes: NodeTable, cfg: SimulationConfig, fraction) -> tuple[tuple[str, ...], np.ndarray]:
    """Functions and budget table the campaign starts from."""
    if fraction is None:
        return nodes.functions, np.array(nodes.budgets)
    sats = nodes.satellites()
    _, frng = _streams(cfg.rng_seed)
    table = assign_functions(len(sats), cfg.n_functions, fraction, cfg.per_satellite_call_cap, frng)
    budgets = np.zeros((len(nodes), cfg.n_functions), dtype=np.int64)
    budgets[sats] = table
    return tuple(f"f{i + 1}" for i in range(cfg.n_functions)), budgets


def simulate_plan(plan: ContactPlan | Sequence[Snapshot], cfg: SimulationConfig,
                  horizon=None) -> Metrics:
    """One campaign: resolve budgets, draw requests, run."""
    snapshots = plan if not isinstance(plan, ContactPlan) else build_snapshots(plan, horizon or plan.horizon())
    nodes = snapshots[0].nodes
    functions, budgets = _plan_budgets(nodes, cfg, cfg.function_enabled_fraction)
    if functions != nodes.functions:
        shared = NodeTable(nodes.names, nodes.kinds, functions, budgets)
        snapshots = [dataclasses.replace(g, nodes=shared) for g in snapshots]
    rrng, _ = _streams(cfg.rng_seed)
    requests = generate_requests(cfg, nodes.ground_terminals().tolist(), functions, rrng)
    return run_campaign(snapshots, requests, cfg, budgets)


@dataclass
class SweepRow:
    param_value: object
    metrics: Metrics

    def csv_fields(self, timing: bool = True) -> list[str]:
        m = self.metrics

        def num(x: float) -> str:
            return "nan" if x != x else f"{x:.6f}"

        return [str(self.param_value), m.algorithm, num(m.acceptance_ratio), num(m.mean_delay_ms),
                num(m.mean_hops), num(m.mean_query_us) if timing else "", num(m.p95_query_us) if timing else ""]


def _point(args) -> Metrics:
    param, value, source, cfg, horizon = args
    if param == "n_satellites":
        scenario = source.replace(n_sats=int(value), n_planes=None)
        return simulate_plan(build_scenario(scenario), cfg, scenario.horizon)
    if param == "function_fraction":
        cfg = cfg.replace(function_enabled_fraction=value)
    return simulate_plan(source, cfg, horizon)


def sweep(param: str, values: Sequence, source: ContactPlan | ScenarioConfig | Sequence[Snapshot],
          cfg: SimulationConfig, algorithms: Sequence[str] = ALGORITHMS, workers: int = 1) -> list[SweepRow]:
    """One campaign per value and algorithm, all with ``cfg.rng_seed``.

    ``source`` is a contact plan (or its snapshots) for ``function_fraction``
    and ``none`` sweeps, and a scenario config for ``n_satellites``.  Rows
    come back ordered by value, then by the order of ``algorithms``.
    Campaigns are independent, so ``workers > 1`` runs them in processes.
    """
    if param not in SWEEP_PARAMS:
        raise ValueError(f"sweep parameter must be one of {SWEEP_PARAMS}")
    if param == "none":
        values = [cfg.function_enabled_fraction if cfg.function_enabled_fraction is not None else ""]
    if not values:
        raise ValueError("no sweep values")
    horizon = None
    if isinstance(source, ScenarioConfig):
        horizon = source.horizon
        if param != "n_satellites":
            source = build_snapshots(build_scenario(source), horizon)
    elif param == "n_satellites":
        raise ValueError("a satellite-count sweep needs a scenario config, not a fixed plan")
    elif isinstance(source, ContactPlan):
        source = build_snapshots(source, source.horizon())

    jobs = [(param, v, source, cfg.replace(algorithm=a), horizon) for v in values for a in algorithms]
    if workers > 1:
        with ProcessPoolExecutor(workers) as pool:
            results = list(pool.map(_point, jobs))
    else:
        results = [_point(job) for job in jobs]
    return [SweepRow(job[1], m) for job, m in zip(jobs, results)]


def write_metrics_csv(rows: Sequence[SweepRow], path: Path | str, timing: bool = True) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(METRICS_HEADER)
        for row in rows:
            w.writerow(row.csv_fields(timing))


def metrics_metadata(param: str, cfg: SimulationConfig, extra: dict | None = None) -> dict:
    return {
        "sweep": param,
        "averaging": AVERAGING_NOTE,
        "query_time": "wall time around the router call, microseconds",
        "kernel_backend": _kernels.backend(),
        "simulation": cfg.to_dict(),
        **(extra or {}),
    }


def format_summary(m: Metrics) -> str:
    return (f"{m.algorithm}: accepted {m.n_accepted}/{m.n_requests} ({m.acceptance_ratio:.4f}), "
            f"mean delay {m.mean_delay_ms:.3f} ms, mean hops {m.mean_hops:.3f}, "
            f"query {m.mean_query_us:.1f} us mean / {m.p95_query_us:.1f} us p95")

