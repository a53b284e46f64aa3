import hashlib
import json

import pytest

from vfroute.cli import main
from vfroute.plan_io import write_plan
from vfroute.time_graph import ContactPlan

from support import g0, make_nodes

G0_REQUEST = {"source": "s", "dest": "d", "function": "f1", "capacity_mbps": 10, "delay_bound_ms": 30}
SMALL_SCENARIO = {"n_sats": 60, "horizon_s": 300, "step_s": 20, "seed": 2}


@pytest.fixture
def g0_plan(tmp_path):
    g = g0()
    records = [(l.src, l.dst, 0.0, 60.0, l.delay_ns, l.capacity_kbps) for l in g.links()]
    write_plan(ContactPlan.from_records(g.nodes, records), tmp_path / "contacts.csv", tmp_path / "nodes.json")
    (tmp_path / "req.json").write_text(json.dumps(G0_REQUEST))
    return tmp_path


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def test_route_vfsp_g0(g0_plan, capsys):
    code, out, _ = run(capsys, "route", g0_plan / "contacts.csv", g0_plan / "req.json", "--algo", "vfsp", "--at", 1)
    assert code == 0
    res = json.loads(out)
    assert res["nodes"] == ["s", "A", "B", "A", "d"] and res["delay_ms"] == "24" and res["function_node"] == "B"


def test_route_ksp_g0_infeasible(g0_plan, capsys):
    code, out, _ = run(capsys, "route", g0_plan / "contacts.csv", g0_plan / "req.json", "--algo", "ksp")
    assert code == 0 and json.loads(out)["status"] == "infeasible"


def test_route_oracle_inline_request(g0_plan, capsys):
    code, out, _ = run(capsys, "route", g0_plan / "contacts.csv", json.dumps(G0_REQUEST), "--algo", "oracle")
    assert code == 0 and json.loads(out)["delay_ms"] == "24"


def test_route_unknown_node(g0_plan, capsys):
    bad = dict(G0_REQUEST, source="nowhere")
    code, _, err = run(capsys, "route", g0_plan / "contacts.csv", json.dumps(bad))
    assert code == 2 and "unknown node" in err


def test_route_time_outside_plan(g0_plan, capsys):
    code, _, _ = run(capsys, "route", g0_plan / "contacts.csv", g0_plan / "req.json", "--at", 99)
    assert code == 2


def test_oracle_guard_exit_code(tmp_path, capsys):
    n = 16
    nodes = make_nodes([f"v{i}" for i in range(n)], ["gt", "gt"] + ["sat"] * (n - 2), budgets=[[0]] * n)
    plan = ContactPlan.from_records(nodes, [(0, 2, 0.0, 10.0, 1, 1), (2, 1, 0.0, 10.0, 1, 1)])
    write_plan(plan, tmp_path / "contacts.csv", tmp_path / "nodes.json")
    req = {"source": "v0", "dest": "v1", "function": "f1", "capacity_mbps": 0.001, "delay_bound_ms": 1}
    code, _, err = run(capsys, "route", tmp_path / "contacts.csv", json.dumps(req), "--algo", "oracle")
    assert code == 3 and "instance too large" in err


def test_export_lp(g0_plan, capsys):
    out_file = g0_plan / "lp" / "g0.lp"
    code, out, _ = run(capsys, "export-lp", g0_plan / "contacts.csv", g0_plan / "req.json", "--out", out_file)
    assert code == 0
    text = out_file.read_text()
    assert text.split("Binaries\n")[1].split("Generals\n")[0].split() == ["x_0_1", "x_1_2", "x_1_3", "x_2_1"]
    first = hashlib.sha256(out_file.read_bytes()).hexdigest()
    run(capsys, "export-lp", g0_plan / "contacts.csv", g0_plan / "req.json", "--out", out_file)
    assert hashlib.sha256(out_file.read_bytes()).hexdigest() == first


def test_gen_scenario_creates_dir_and_is_reproducible(tmp_path, capsys, monkeypatch):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps(SMALL_SCENARIO))
    monkeypatch.setenv("VFROUTE_OUTPUT_DIR", str(tmp_path / "from_env"))
    assert run(capsys, "gen-scenario", cfg)[0] == 0
    assert sorted(p.name for p in (tmp_path / "from_env").iterdir()) == ["contacts.csv", "nodes.json", "scenario.json"]
    hashes = []
    for name in ("a", "b"):
        assert run(capsys, "gen-scenario", cfg, "--out", tmp_path / name / "deep")[0] == 0
        hashes.append([hashlib.sha256((tmp_path / name / "deep" / f).read_bytes()).hexdigest()
                       for f in ("contacts.csv", "nodes.json", "scenario.json")])
    assert hashes[0] == hashes[1]


def test_gen_scenario_bad_config(tmp_path, capsys):
    code, _, err = run(capsys, "gen-scenario", json.dumps({"n_sats": 10, "bogus": 1}), "--out", tmp_path)
    assert code == 2 and "unknown" in err


def test_simulate_fraction_sweep_and_rerun(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps(SMALL_SCENARIO))
    run(capsys, "gen-scenario", cfg, "--out", tmp_path / "sc")
    plan = tmp_path / "sc" / "contacts.csv"
    sim = json.dumps({"n_requests": 4, "k_max": 20})
    args = ["simulate", plan, "--config", sim, "--sweep", "function_fraction", "--values", "0.05:1:0.05",
            "--omit-timing"]
    assert run(capsys, *args, "--out", tmp_path / "m1.csv", "--log", tmp_path / "log.jsonl")[0] == 0
    assert run(capsys, *args, "--out", tmp_path / "m2.csv")[0] == 0
    lines = (tmp_path / "m1.csv").read_text().splitlines()
    assert len(lines) == 41
    assert lines[1].startswith("0.05,ksp,") and lines[-1].startswith("1.0,vfsp,")
    assert (tmp_path / "m1.csv").read_bytes() == (tmp_path / "m2.csv").read_bytes()
    assert len((tmp_path / "log.jsonl").read_text().splitlines()) == 40 * 4
    meta = json.loads((tmp_path / "m1.csv.meta.json").read_text())
    assert "accepted requests only" in meta["averaging"]


def test_simulate_no_sweep_from_scenario(tmp_path, capsys):
    cfg = tmp_path / "scenario.json"
    cfg.write_text(json.dumps(SMALL_SCENARIO))
    code, _, _ = run(capsys, "simulate", cfg, "--n-requests", 3, "--out", tmp_path / "m.csv")
    assert code == 0
    assert len((tmp_path / "m.csv").read_text().splitlines()) == 3


def test_simulate_bad_algorithm(tmp_path, capsys):
    cfg = tmp_path / "scenario.json"
    cfg.write_text(json.dumps(SMALL_SCENARIO))
    code, _, _ = run(capsys, "simulate", cfg, "--algos", "bfs", "--out", tmp_path / "m.csv")
    assert code == 2
