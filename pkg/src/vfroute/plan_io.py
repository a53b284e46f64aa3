"""Contact-plan CSV and node-table JSON files.

CSV columns: ``from,to,t_start_s,t_end_s,delay_ms,capacity_mbps`` with node
names in the first two.  The node table is a JSON list of
``{"name", "kind", "budgets": {function: count}}`` objects; list order fixes
node ids.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from .time_graph import (
    KBPS_PER_MBPS,
    KIND_CODES,
    KIND_NAMES,
    NS_PER_MS,
    SATELLITE,
    ContactPlan,
    NodeTable,
    format_fixed,
    mbps_to_kbps,
    ms_to_ns,
)

CSV_HEADER = ["from", "to", "t_start_s", "t_end_s", "delay_ms", "capacity_mbps"]


class PlanFormatError(ValueError):
    pass


def _fmt_time(t: float) -> str:
    return repr(float(t)).removesuffix(".0") if float(t).is_integer() else repr(float(t))


def node_table_to_json(nodes: NodeTable) -> str:
    rows = []
    for i, name in enumerate(nodes.names):
        kind = int(nodes.kinds[i])
        budgets = {f: int(nodes.budgets[i, j]) for j, f in enumerate(nodes.functions)} if kind == SATELLITE else {}
        rows.append({"name": name, "kind": KIND_NAMES[kind], "budgets": budgets})
    return json.dumps(rows, indent=1) + "\n"


def node_table_from_json(text: str) -> NodeTable:
    try:
        rows = json.loads(text)
    except json.JSONDecodeError as exc:
        raise PlanFormatError(f"node table is not valid JSON: {exc}") from exc
    if not isinstance(rows, list):
        raise PlanFormatError("node table must be a JSON list")
    functions: list[str] = []
    for row in rows:
        for f in row.get("budgets", {}):
            if f not in functions:
                functions.append(f)
    names, kinds = [], []
    budgets = np.zeros((len(rows), len(functions)), dtype=np.int64)
    for i, row in enumerate(rows):
        try:
            names.append(str(row["name"]))
            kinds.append(KIND_CODES[row["kind"]])
        except KeyError as exc:
            raise PlanFormatError(f"node table row {i}: missing or invalid {exc}") from None
        for f, count in row.get("budgets", {}).items():
            budgets[i, functions.index(f)] = int(count)
    try:
        return NodeTable(tuple(names), np.array(kinds), tuple(functions), budgets)
    except ValueError as exc:
        raise PlanFormatError(str(exc)) from exc


def write_plan(plan: ContactPlan, csv_path: Path | str, nodes_path: Path | str) -> None:
    names = plan.nodes.names
    with open(csv_path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CSV_HEADER)
        for s, d, a, b, dl, cp in plan.records():
            w.writerow([names[s], names[d], _fmt_time(a), _fmt_time(b),
                        format_fixed(dl, NS_PER_MS), format_fixed(cp, KBPS_PER_MBPS)])
    Path(nodes_path).write_text(node_table_to_json(plan.nodes))


def read_plan(csv_path: Path | str, nodes_path: Path | str | None = None) -> ContactPlan:
    """Load a plan; the node table defaults to ``nodes.json`` beside the CSV."""
    csv_path = Path(csv_path)
    nodes_path = Path(nodes_path) if nodes_path else csv_path.with_name("nodes.json")
    nodes = node_table_from_json(nodes_path.read_text())
    index = nodes.index
    records = []
    with open(csv_path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != CSV_HEADER:
            raise PlanFormatError(f"unexpected CSV header {header}")
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(CSV_HEADER):
                raise PlanFormatError(f"line {lineno}: expected {len(CSV_HEADER)} fields")
            try:
                s, d = index[row[0]], index[row[1]]
            except KeyError as exc:
                raise PlanFormatError(f"line {lineno}: unknown node {exc}") from None
            try:
                records.append((s, d, float(row[2]), float(row[3]), ms_to_ns(row[4]), mbps_to_kbps(row[5])))
            except ValueError as exc:
                raise PlanFormatError(f"line {lineno}: {exc}") from None
    try:
        return ContactPlan.from_records(nodes, records)
    except ValueError as exc:
        raise PlanFormatError(str(exc)) from exc
