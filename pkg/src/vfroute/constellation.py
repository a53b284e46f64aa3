"""Synthetic Walker-delta scenarios: orbits, ground visibility, contact plans.

Circular two-body orbits over a spherical, uniformly rotating Earth (no J2).
Grid ISLs (two in-plane, two cross-plane neighbours) stay up for the whole
horizon; ground-satellite links exist while the satellite is above the
site's elevation mask.
"""

from __future__ import annotations

import dataclasses
import json
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .time_graph import (
    GROUND_TERMINAL,
    SATELLITE,
    ContactPlan,
    NodeTable,
    TimeWindow,
    mbps_to_kbps,
    ms_to_ns,
)

EARTH_RADIUS_KM = 6371.0
MU_EARTH_KM3_S2 = 398600.4418
EARTH_ROTATION_RAD_S = 7.2921159e-5


@dataclass(frozen=True)
class WalkerSpec:
    n_sats: int
    n_planes: int
    inclination_deg: float = 53.0
    altitude_km: float = 550.0
    phasing_factor: int = 1
    isl_pattern: str = "grid4"

    def __post_init__(self):
        if self.n_sats <= 0 or self.n_planes <= 0 or self.n_sats % self.n_planes:
            raise ValueError("n_sats must be a positive multiple of n_planes")
        if self.altitude_km <= 0:
            raise ValueError("altitude must be positive")
        if self.isl_pattern != "grid4":
            raise ValueError(f"unsupported ISL pattern {self.isl_pattern!r}")

    @property
    def sats_per_plane(self) -> int:
        return self.n_sats // self.n_planes

    @property
    def period_s(self) -> float:
        a = EARTH_RADIUS_KM + self.altitude_km
        return 2 * math.pi * math.sqrt(a**3 / MU_EARTH_KM3_S2)

    @classmethod
    def balanced(cls, n_sats: int, **kwargs) -> "WalkerSpec":
        """Pick the plane count as the divisor of ``n_sats`` closest to its square root."""
        root = math.sqrt(n_sats)
        divisors = [d for d in range(1, n_sats + 1) if n_sats % d == 0]
        planes = min(divisors, key=lambda d: (abs(d - root), d))
        return cls(n_sats, planes, **kwargs)


@dataclass(frozen=True)
class GroundSite:
    name: str
    latitude_deg: float
    longitude_deg: float
    min_elevation_deg: float = 25.0

    def __post_init__(self):
        if abs(self.latitude_deg) > 90 or abs(self.longitude_deg) > 180:
            raise ValueError(f"site {self.name}: coordinates out of range")
        if not 0 <= self.min_elevation_deg < 90:
            raise ValueError(f"site {self.name}: elevation mask must be in [0, 90)")


DEFAULT_SITES = (
    GroundSite("Xian", 34.27, 108.93),
    GroundSite("Beijing", 40.0, 116.0),
    GroundSite("Sanya", 18.0, 109.5),
    GroundSite("Kashi", 39.5, 76.0),
)


def satellite_positions(spec: WalkerSpec, times: np.ndarray) -> np.ndarray:
    """Inertial positions (km), shape ``(len(times), n_sats, 3)``."""
    p = np.repeat(np.arange(spec.n_planes), spec.sats_per_plane)
    j = np.tile(np.arange(spec.sats_per_plane), spec.n_planes)
    raan = 2 * np.pi * p / spec.n_planes
    phase0 = 2 * np.pi * j / spec.sats_per_plane + 2 * np.pi * spec.phasing_factor * p / spec.n_sats
    n = 2 * np.pi / spec.period_s
    u = phase0[None, :] + n * np.asarray(times, dtype=float)[:, None]
    inc = math.radians(spec.inclination_deg)
    r = EARTH_RADIUS_KM + spec.altitude_km
    cu, su = np.cos(u), np.sin(u)
    co, so = np.cos(raan)[None, :], np.sin(raan)[None, :]
    return r * np.stack([co * cu - so * su * math.cos(inc), so * cu + co * su * math.cos(inc), su * math.sin(inc)], axis=-1)


def site_positions(site: GroundSite, times: np.ndarray) -> np.ndarray:
    """Inertial site positions (km), shape ``(len(times), 3)``; Earth frame aligned at t = 0."""
    lat = math.radians(site.latitude_deg)
    lon = math.radians(site.longitude_deg) + EARTH_ROTATION_RAD_S * np.asarray(times, dtype=float)
    return EARTH_RADIUS_KM * np.stack([math.cos(lat) * np.cos(lon), math.cos(lat) * np.sin(lon),
                                       np.full_like(lon, math.sin(lat))], axis=-1)


def elevation_deg(site: GroundSite, sat_pos: np.ndarray, times: np.ndarray) -> np.ndarray:
    """Elevation of every satellite above the site's horizon, shape ``(len(times), n_sats)``."""
    g = site_positions(site, times)
    rho = sat_pos - g[:, None, :]
    up = g / EARTH_RADIUS_KM
    sin_el = np.einsum("tsk,tk->ts", rho, up) / np.linalg.norm(rho, axis=-1)
    return np.degrees(np.arcsin(np.clip(sin_el, -1.0, 1.0)))


def grid4_edges(spec: WalkerSpec) -> list[tuple[int, int]]:
    """Undirected ISLs as ``(a, b)`` with ``a < b``."""
    P, S = spec.n_planes, spec.sats_per_plane
    idx = lambda p, j: p * S + j  # noqa: E731
    edges = set()
    for p in range(P):
        for j in range(S):
            for q, k in ((p, (j + 1) % S), ((p + 1) % P, j)):
                a, b = idx(p, j), idx(q, k)
                if a != b:
                    edges.add((min(a, b), max(a, b)))
    return sorted(edges)


def sample_link_attributes(rng: np.random.Generator, size: int | None = None,
                           delay_range_ms=(5, 15), capacity_range_mbps=(300, 350)):
    """Uniform delay (ns) and capacity (kbps) on the fixed-point grid, bounds inclusive."""
    d = rng.integers(ms_to_ns(delay_range_ms[0]), ms_to_ns(delay_range_ms[1]), size=size, endpoint=True)
    c = rng.integers(mbps_to_kbps(capacity_range_mbps[0]), mbps_to_kbps(capacity_range_mbps[1]),
                     size=size, endpoint=True)
    return d, c


def assign_functions(sats: Sequence[int] | int, n_functions: int, fraction, call_cap: int,
                     rng: np.random.Generator) -> np.ndarray:
    """Budget table of shape ``(len(sats), n_functions)``.

    For each function independently a uniformly random subset of
    ``ceil(fraction * len(sats))`` satellites gets ``call_cap`` calls.  The
    subset is a prefix of one random permutation per function, so with the
    same generator state larger fractions enable supersets of smaller ones.
    """
    n = sats if isinstance(sats, int) else len(sats)
    frac = Fraction(str(fraction)) if isinstance(fraction, float) else Fraction(fraction)
    if not 0 < frac <= 1:
        raise ValueError("fraction must be in (0, 1]")
    k = math.ceil(frac * n)
    budgets = np.zeros((n, n_functions), dtype=np.int64)
    for f in range(n_functions):
        order = rng.permutation(n)
        budgets[order[:k], f] = call_cap
    return budgets


def _visibility_intervals(visible: np.ndarray, times: np.ndarray, t_end: float):
    """Coalesce runs of visible samples into ``[t_first, t_after_last)`` intervals per column."""
    out = []
    padded = np.zeros((visible.shape[0] + 2, visible.shape[1]), dtype=np.int8)
    padded[1:-1] = visible
    diff = np.diff(padded, axis=0)
    starts_t, starts_s = np.nonzero(diff == 1)
    ends_t, ends_s = np.nonzero(diff == -1)
    o1 = np.lexsort((starts_t, starts_s))
    o2 = np.lexsort((ends_t, ends_s))
    for k0, k1, s in zip(starts_t[o1], ends_t[o2], starts_s[o1]):
        t0 = float(times[k0])
        t1 = float(times[k1]) if k1 < len(times) else t_end
        if t0 < t1:
            out.append((int(s), t0, t1))
    return out


def compute_contacts(spec: WalkerSpec, sites: Sequence[GroundSite], horizon: TimeWindow, step_s: float,
                     rng: np.random.Generator, *, delay_range_ms=(5, 15), capacity_range_mbps=(300, 350),
                     chunk: int = 256) -> list[tuple]:
    """Directed contact records ``(src, dst, t_start, t_end, delay_ns, capacity_kbps)``.

    Node ids: satellites ``0..n_sats-1`` (plane-major), then one ground
    terminal per site in the given order.  Both directions of a contact share
    one attribute draw.
    """
    if step_s <= 0:
        raise ValueError("step must be positive")
    if not isinstance(horizon, TimeWindow):
        horizon = TimeWindow(*horizon)
    t0, t1 = horizon.t_start, horizon.t_end
    n_steps = int(math.floor((t1 - t0) / step_s + 1e-9))
    times = t0 + step_s * np.arange(n_steps + 1)
    times = times[times < t1]

    records = []
    edges = grid4_edges(spec)
    d, c = sample_link_attributes(rng, len(edges), delay_range_ms, capacity_range_mbps)
    for (a, b), dl, cp in zip(edges, d.tolist(), c.tolist()):
        records.append((a, b, t0, t1, dl, cp))
        records.append((b, a, t0, t1, dl, cp))

    for k, site in enumerate(sites):
        gt = spec.n_sats + k
        vis = np.zeros((len(times), spec.n_sats), dtype=bool)
        for lo in range(0, len(times), chunk):
            tt = times[lo:lo + chunk]
            vis[lo:lo + chunk] = elevation_deg(site, satellite_positions(spec, tt), tt) >= site.min_elevation_deg
        intervals = _visibility_intervals(vis, times, t1)
        d, c = sample_link_attributes(rng, len(intervals), delay_range_ms, capacity_range_mbps)
        for (s, a, b), dl, cp in zip(intervals, d.tolist(), c.tolist()):
            records.append((s, gt, a, b, dl, cp))
            records.append((gt, s, a, b, dl, cp))
    records.sort(key=lambda r: (r[2], r[0], r[1]))
    return records


@dataclass(frozen=True)
class ScenarioConfig:
    """Every knob of a synthetic scenario; ``to_json`` round-trips through ``from_json``."""

    n_sats: int = 1000
    n_planes: int | None = None
    inclination_deg: float = 53.0
    altitude_km: float = 550.0
    phasing_factor: int = 1
    sites: tuple[GroundSite, ...] = DEFAULT_SITES
    horizon_s: float = 3600.0
    step_s: float = 10.0
    n_functions: int = 3
    function_fraction: float = 0.1
    call_cap: int = 1
    delay_range_ms: tuple[float, float] = (5, 15)
    capacity_range_mbps: tuple[float, float] = (300, 350)
    seed: int = 0

    def walker(self) -> WalkerSpec:
        kw = dict(inclination_deg=self.inclination_deg, altitude_km=self.altitude_km,
                  phasing_factor=self.phasing_factor)
        if self.n_planes is None:
            return WalkerSpec.balanced(self.n_sats, **kw)
        return WalkerSpec(self.n_sats, self.n_planes, **kw)

    @property
    def horizon(self) -> TimeWindow:
        return TimeWindow(0.0, float(self.horizon_s))

    def replace(self, **changes) -> "ScenarioConfig":
        return dataclasses.replace(self, **changes)

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d["sites"] = [dataclasses.asdict(s) for s in self.sites]
        d["delay_range_ms"] = list(self.delay_range_ms)
        d["capacity_range_mbps"] = list(self.capacity_range_mbps)
        d["n_planes"] = self.walker().n_planes
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    @classmethod
    def from_dict(cls, d: dict) -> "ScenarioConfig":
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise ValueError(f"unknown scenario keys: {sorted(unknown)}")
        d = dict(d)
        if "sites" in d:
            d["sites"] = tuple(GroundSite(**s) for s in d["sites"])
        for key in ("delay_range_ms", "capacity_range_mbps"):
            if key in d:
                lo, hi = d[key]
                if lo > hi:
                    raise ValueError(f"{key}: empty range")
                d[key] = (lo, hi)
        return cls(**d)


def _streams(seed: int):
    links, functions = np.random.SeedSequence(seed).spawn(2)
    return np.random.default_rng(links), np.random.default_rng(functions)


def scenario_nodes(cfg: ScenarioConfig, function_fraction=None) -> NodeTable:
    spec = cfg.walker()
    names = tuple(f"S{p}_{j}" for p in range(spec.n_planes) for j in range(spec.sats_per_plane))
    names += tuple(s.name for s in cfg.sites)
    kinds = np.array([SATELLITE] * spec.n_sats + [GROUND_TERMINAL] * len(cfg.sites))
    fraction = cfg.function_fraction if function_fraction is None else function_fraction
    _, frng = _streams(cfg.seed)
    sat_budgets = assign_functions(spec.n_sats, cfg.n_functions, fraction, cfg.call_cap, frng)
    budgets = np.vstack([sat_budgets, np.zeros((len(cfg.sites), cfg.n_functions), dtype=np.int64)])
    functions = tuple(f"f{i + 1}" for i in range(cfg.n_functions))
    return NodeTable(names, kinds, functions, budgets)


def build_scenario(cfg: ScenarioConfig) -> ContactPlan:
    """Contact plan plus node table for ``cfg``; identical output for identical config."""
    lrng, _ = _streams(cfg.seed)
    records = compute_contacts(cfg.walker(), cfg.sites, cfg.horizon, cfg.step_s, lrng,
                               delay_range_ms=cfg.delay_range_ms, capacity_range_mbps=cfg.capacity_range_mbps)
    return ContactPlan.from_records(scenario_nodes(cfg), records)
