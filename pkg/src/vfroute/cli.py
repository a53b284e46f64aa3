"""Command-line entry point: ``vfroute <command> ...``.

Exit codes: 0 on success (an infeasible route is a success), 2 for bad
input, 3 when a guard refuses the instance.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from fractions import Fraction
from pathlib import Path

from .constellation import ScenarioConfig, build_scenario
from .ilp import InstanceTooLarge, brute_force_optimal, build_model, export_lp
from .ksp_router import KspConfig, route_ksp
from .paths import ApplicationRequest
from .plan_io import PlanFormatError, read_plan, write_plan
from .simulator import ALGORITHMS, SWEEP_PARAMS, SimulationConfig, metrics_metadata, sweep, write_metrics_csv
from .time_graph import ContactPlan, snapshot_for_time
from .vfsp_router import route_vfsp

OUTPUT_DIR_ENV = "VFROUTE_OUTPUT_DIR"
EXIT_INPUT = 2
EXIT_GUARD = 3


class InputError(Exception):
    pass


def _load_json(arg: str):
    """Inline JSON if ``arg`` looks like an object, otherwise a path to a JSON file."""
    text = arg if arg.lstrip().startswith("{") else Path(arg).read_text()
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"invalid JSON in {arg if len(arg) < 80 else 'argument'}: {exc}") from None


def _load_request(arg: str, plan: ContactPlan) -> ApplicationRequest:
    d = _load_json(arg)
    if not isinstance(d, dict):
        raise InputError("request must be a JSON object")
    missing = {"source", "dest", "function", "capacity_mbps", "delay_bound_ms"} - set(d)
    if missing:
        raise InputError(f"request lacks {sorted(missing)}")
    index = plan.nodes.index
    for key in ("source", "dest"):
        if d[key] not in index:
            raise InputError(f"unknown node {d[key]!r}")
    return ApplicationRequest.from_units(index[d["source"]], index[d["dest"]], str(d["function"]),
                                         str(d["capacity_mbps"]), str(d["delay_bound_ms"]))


def cmd_gen_scenario(args) -> int:
    cfg = ScenarioConfig.from_dict(_load_json(args.config))
    out = Path(args.out or os.environ.get(OUTPUT_DIR_ENV) or "scenario")
    out.mkdir(parents=True, exist_ok=True)
    write_plan(build_scenario(cfg), out / "contacts.csv", out / "nodes.json")
    (out / "scenario.json").write_text(cfg.to_json())
    print(json.dumps({"out": str(out), "files": ["contacts.csv", "nodes.json", "scenario.json"]}))
    return 0


def cmd_route(args) -> int:
    plan = read_plan(args.plan, args.nodes)
    r = _load_request(args.request, plan)
    g = snapshot_for_time(plan, args.at)
    r.check(g)
    if args.algo == "vfsp":
        result = route_vfsp(g, r)
    elif args.algo == "ksp":
        result = route_ksp(g, r, KspConfig(args.k_max))
    else:
        result = brute_force_optimal(g, r)
    out = result.to_dict(g.nodes.names)
    out["window"] = [g.window.t_start, g.window.t_end]
    print(json.dumps(out))
    return 0


def _parse_values(spec: str | None, param: str) -> list:
    """``a,b,c`` or an inclusive ``start:stop:step`` range, evaluated exactly."""
    if param == "none":
        return []
    if not spec:
        raise InputError(f"--values is required for --sweep {param}")
    if ":" in spec:
        try:
            start, stop, step = (Fraction(x) for x in spec.split(":"))
        except ValueError:
            raise InputError(f"bad range {spec!r}") from None
        if step <= 0:
            raise InputError("range step must be positive")
        raw, v = [], start
        while v <= stop:
            raw.append(v)
            v += step
    else:
        try:
            raw = [Fraction(x) for x in spec.split(",") if x.strip()]
        except ValueError:
            raise InputError(f"bad value list {spec!r}") from None
    if param == "n_satellites":
        if any(v.denominator != 1 or v < 1 for v in raw):
            raise InputError("satellite counts must be positive integers")
        return [int(v) for v in raw]
    return [float(v) for v in raw]


def cmd_simulate(args) -> int:
    cfg = SimulationConfig.from_dict(_load_json(args.config)) if args.config else SimulationConfig()
    if args.n_requests is not None:
        cfg = cfg.replace(n_requests=args.n_requests)
    if args.k_max is not None:
        cfg = cfg.replace(k_max=args.k_max)
    algos = [a.strip() for a in args.algos.split(",") if a.strip()]
    bad = set(algos) - set(ALGORITHMS)
    if bad or not algos:
        raise InputError(f"unknown algorithms {sorted(bad)}; choose from {ALGORITHMS}")
    values = _parse_values(args.values, args.sweep)
    if args.source.endswith(".json"):
        source = ScenarioConfig.from_dict(_load_json(args.source))
    else:
        source = read_plan(args.source, args.nodes)
    rows = sweep(args.sweep, values, source, cfg, algos, workers=args.workers)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    write_metrics_csv(rows, out, timing=not args.omit_timing)
    meta = metrics_metadata(args.sweep, cfg, {"source": args.source, "algorithms": algos})
    out.with_name(out.name + ".meta.json").write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")
    if args.log:
        with open(args.log, "w") as fh:
            for row in rows:
                for d in row.metrics.decisions:
                    entry = {"param_value": row.param_value, "algorithm": row.metrics.algorithm, **d}
                    fh.write(json.dumps(entry, sort_keys=True) + "\n")
    print(json.dumps({"out": str(out), "rows": len(rows)}))
    return 0


def cmd_export_lp(args) -> int:
    plan = read_plan(args.plan, args.nodes)
    r = _load_request(args.request, plan)
    g = snapshot_for_time(plan, args.at)
    m = build_model(g, r)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(export_lp(m))
    print(json.dumps({"out": str(out), "variables": 2 * len(m.links) + 1, "constraints": m.constraint_count}))
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="vfroute", description="Function-constrained routing over satellite contact plans.")
    sub = p.add_subparsers(dest="command", required=True)

    q = sub.add_parser("gen-scenario", help="generate a synthetic contact plan")
    q.add_argument("config", help="scenario config JSON (file or inline)")
    q.add_argument("--out", help=f"output directory (default ${OUTPUT_DIR_ENV} or ./scenario)")
    q.set_defaults(func=cmd_gen_scenario)

    for name, func, help_ in (("route", cmd_route, "route one request"),
                              ("export-lp", cmd_export_lp, "write the integer program for one request")):
        q = sub.add_parser(name, help=help_)
        q.add_argument("plan", help="contact-plan CSV")
        q.add_argument("request", help="request JSON (file or inline)")
        q.add_argument("--at", type=float, default=0.0, help="time in seconds selecting the snapshot")
        q.add_argument("--nodes", help="node table JSON (default: nodes.json beside the plan)")
        q.set_defaults(func=func)
        if name == "route":
            q.add_argument("--algo", choices=["ksp", "vfsp", "oracle"], default="vfsp")
            q.add_argument("--k-max", type=int, default=KspConfig.k_max)
        else:
            q.add_argument("--out", required=True)

    q = sub.add_parser("simulate", help="run admission campaigns and write metrics CSV")
    q.add_argument("source", help="contact-plan CSV, or a scenario config JSON")
    q.add_argument("--config", help="simulation config JSON (file or inline)")
    q.add_argument("--nodes", help="node table JSON for a CSV plan")
    q.add_argument("--sweep", choices=SWEEP_PARAMS, default="none")
    q.add_argument("--values", help="comma list or inclusive start:stop:step")
    q.add_argument("--algos", default="ksp,vfsp")
    q.add_argument("--n-requests", type=int)
    q.add_argument("--k-max", type=int)
    q.add_argument("--workers", type=int, default=1)
    q.add_argument("--out", required=True, help="metrics CSV path")
    q.add_argument("--log", help="write the per-request decision log (JSON lines) here")
    q.add_argument("--omit-timing", action="store_true", help="leave timing columns empty")
    q.set_defaults(func=cmd_simulate)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except InstanceTooLarge as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_GUARD
    except (InputError, PlanFormatError, ValueError, KeyError, OSError) as exc:
        msg = exc.args[0] if isinstance(exc, KeyError) and exc.args else exc
        print(f"error: {msg}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
