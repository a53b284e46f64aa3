"""The path-selection integer program for one (snapshot, request) pair.

Rows are tagged with the number of the constraint family they belong to:

  1-4   source emits one link / receives none, destination the reverse
  5-6   relay nodes carry at most two incoming / outgoing links
  7     flow conservation at relays
  8     capacity, big-M on the largest link capacity
  9     end-to-end delay bound
  10    the walk enters at least one satellite hosting the function
  11-15 hop-order variables ``y`` that rule out detached sub-tours

The total hop count ``sum(x)`` appears in families 12 and 14.  Rather than
repeating that sum in every row (quadratic model size), it is bound once to
an auxiliary integer ``h`` by row ``c12_0``.  All coefficients are exact
fixed-point integers; export renders them back in ms and Mbps.
"""

from __future__ import annotations

import io
import json
from collections import Counter
from dataclasses import dataclass, field

from ..paths import ApplicationRequest, RoutePath
from ..time_graph import KBPS_PER_MBPS, KIND_NAMES, NS_PER_MS, SATELLITE, Snapshot, format_fixed

ORDER_BIG_M = 10**6
HOP_VAR = "h"
BASIC_TAGS = frozenset(range(1, 11))
ALL_TAGS = tuple(range(1, 16))


@dataclass(frozen=True)
class Constraint:
    tag: int
    index: int
    terms: tuple[tuple[str, int], ...]
    sense: str  # "<=", ">=" or "="
    rhs: int
    subject: str
    scale: int = 1  # fixed-point denominator for export (ns per ms, kbps per Mbps)

    @property
    def name(self) -> str:
        return f"c{self.tag}_{self.index}"

    def holds(self, values: dict[str, int]) -> bool:
        lhs = sum(c * values[v] for v, c in self.terms)
        if self.sense == "<=":
            return lhs <= self.rhs
        if self.sense == ">=":
            return lhs >= self.rhs
        return lhs == self.rhs


@dataclass(frozen=True, eq=False)
class IlpModel:
    request: ApplicationRequest
    node_names: tuple[str, ...]
    node_kinds: tuple[int, ...]
    links: tuple[tuple[int, int], ...]
    objective: tuple[tuple[str, int], ...]
    constraints: tuple[Constraint, ...]
    capacity_big_m: int
    order_big_m: int = ORDER_BIG_M

    @staticmethod
    def x_name(link: tuple[int, int]) -> str:
        return f"x_{link[0]}_{link[1]}"

    @staticmethod
    def y_name(link: tuple[int, int]) -> str:
        return f"y_{link[0]}_{link[1]}"

    @property
    def x_vars(self) -> list[str]:
        return [self.x_name(l) for l in self.links]

    @property
    def y_vars(self) -> list[str]:
        return [self.y_name(l) for l in self.links]

    @property
    def constraint_count(self) -> int:
        return len(self.constraints)

    @property
    def basic_constraint_count(self) -> int:
        """Rows of families 1-10, the count the B&B complexity argument is stated in."""
        return sum(1 for c in self.constraints if c.tag in BASIC_TAGS)

    def family_counts(self) -> dict[int, int]:
        return dict(sorted(Counter(c.tag for c in self.constraints).items()))


def build_model(g: Snapshot, r: ApplicationRequest) -> IlpModel:
    if not (0 <= r.source < g.n_nodes and 0 <= r.dest < g.n_nodes):
        raise ValueError("request endpoints missing from snapshot")
    f = g.nodes.function_index(r.function)
    links = tuple(zip(g.src.tolist(), g.dst.tolist()))
    delay = g.delay_ns.tolist()
    cap = g.capacity_kbps.tolist()
    x = [IlpModel.x_name(l) for l in links]
    y = [IlpModel.y_name(l) for l in links]
    out_of: dict[int, list[int]] = {v: [] for v in range(g.n_nodes)}
    into: dict[int, list[int]] = {v: [] for v in range(g.n_nodes)}
    for i, (u, v) in enumerate(links):
        out_of[u].append(i)
        into[v].append(i)
    s, d = r.source, r.dest
    relays = [v for v in range(g.n_nodes) if v not in (s, d)]
    big_m = max(cap, default=0)
    rows: list[Constraint] = []

    def add(tag, index, terms, sense, rhs, subject, scale=1):
        rows.append(Constraint(tag, index, tuple(terms), sense, rhs, subject, scale))

    add(1, 0, [(x[i], 1) for i in out_of[s]], "=", 1, f"node {s}")
    add(2, 0, [(x[i], 1) for i in into[s]], "=", 0, f"node {s}")
    add(3, 0, [(x[i], 1) for i in into[d]], "=", 1, f"node {d}")
    add(4, 0, [(x[i], 1) for i in out_of[d]], "=", 0, f"node {d}")
    for k, v in enumerate(relays):
        add(5, k, [(x[i], 1) for i in into[v]], "<=", 2, f"node {v}")
    for k, v in enumerate(relays):
        add(6, k, [(x[i], 1) for i in out_of[v]], "<=", 2, f"node {v}")
    for k, v in enumerate(relays):
        add(7, k, [(x[i], 1) for i in into[v]] + [(x[i], -1) for i in out_of[v]], "=", 0, f"node {v}")
    # M(1 - x) + C x >= C_a  <=>  (C - M) x >= C_a - M
    for i, l in enumerate(links):
        add(8, i, [(x[i], cap[i] - big_m)], ">=", r.capacity_kbps - big_m, f"link {l[0]}->{l[1]}", KBPS_PER_MBPS)
    add(9, 0, [(x[i], delay[i]) for i in range(len(links))], "<=", r.delay_bound_ns, "path", NS_PER_MS)
    budget = g.budgets[:, f].tolist()
    kinds = g.kinds.tolist()
    add(10, 0, [(x[i], budget[v]) for i, (_, v) in enumerate(links) if kinds[v] == SATELLITE and budget[v] > 0],
        ">=", 1, "path")
    for i, l in enumerate(links):
        add(11, 2 * i, [(x[i], 1), (y[i], -1)], "<=", 0, f"link {l[0]}->{l[1]}")
        add(11, 2 * i + 1, [(y[i], 1), (x[i], -ORDER_BIG_M)], "<=", 0, f"link {l[0]}->{l[1]}")
    add(12, 0, [(HOP_VAR, 1)] + [(x[i], -1) for i in range(len(links))], "=", 0, "hop count")
    for i, l in enumerate(links):
        add(12, i + 1, [(y[i], 1), (HOP_VAR, -1)], "<=", 0, f"link {l[0]}->{l[1]}")
    add(13, 0, [(y[i], 1) for i in out_of[s]], "=", 1, f"node {s}")
    add(14, 0, [(y[i], 1) for i in into[d]] + [(HOP_VAR, -1)], "=", 0, f"node {d}")
    for k, v in enumerate(relays):
        terms = [(y[i], 1) for i in into[v]] + [(x[i], 1) for i in into[v]] + [(y[i], -1) for i in out_of[v]]
        add(15, k, terms, "=", 0, f"node {v}")

    return IlpModel(
        request=r,
        node_names=g.nodes.names,
        node_kinds=tuple(kinds),
        links=links,
        objective=tuple((x[i], delay[i]) for i in range(len(links))),
        constraints=tuple(rows),
        capacity_big_m=big_m,
    )


@dataclass(frozen=True)
class VariableAssignment:
    x: dict[tuple[int, int], int]
    y: dict[tuple[int, int], int]


def encode_path(p: RoutePath, g: Snapshot) -> VariableAssignment:
    """Binary link selection plus 1-based hop index for each link on ``p``."""
    x = {l: 0 for l in zip(g.src.tolist(), g.dst.tolist())}
    y = dict(x)
    for hop, link in enumerate(p.links, start=1):
        key = (link.src, link.dst)
        if key not in x:
            raise ValueError(f"path uses link {key[0]}->{key[1]} absent from snapshot")
        if x[key]:
            raise ValueError(f"path repeats link {key[0]}->{key[1]}; not representable")
        x[key] = 1
        y[key] = hop
    return VariableAssignment(x, y)


@dataclass
class ConstraintReport:
    violations: dict[int, list[str]] = field(default_factory=dict)
    objective_ns: int = 0

    def satisfied(self, tag: int) -> bool:
        return not self.violations.get(tag)

    @property
    def violated_tags(self) -> set[int]:
        return {t for t, w in self.violations.items() if w}

    @property
    def all_satisfied(self) -> bool:
        return not self.violated_tags

    def to_json(self) -> str:
        rows = [{"eq_tag": t, "status": "satisfied" if self.satisfied(t) else "violated",
                 "witness": self.violations.get(t, [])} for t in ALL_TAGS]
        return json.dumps({"constraints": rows, "objective_ms": format_fixed(self.objective_ns, NS_PER_MS)})


def check_assignment(m: IlpModel, a: VariableAssignment) -> ConstraintReport:
    """Evaluate every row of ``m`` under ``a``; ``h`` takes its defining value ``sum(x)``."""
    missing = [l for l in m.links if l not in a.x or l not in a.y]
    if missing:
        raise ValueError(f"assignment lacks variables for links {missing[:5]}")
    values = {}
    for l in m.links:
        values[m.x_name(l)] = int(a.x[l])
        values[m.y_name(l)] = int(a.y[l])
    values[HOP_VAR] = sum(int(a.x[l]) for l in m.links)
    report = ConstraintReport({t: [] for t in ALL_TAGS})
    for c in m.constraints:
        if not c.holds(values):
            report.violations[c.tag].append(f"{c.name} ({c.subject})")
    report.objective_ns = sum(c * values[v] for v, c in m.objective)
    return report


def _format_terms(terms, scale: int) -> list[str]:
    out = []
    for var, coef in terms:
        sign = "-" if coef < 0 else "+"
        mag = format_fixed(abs(coef), scale)
        out.append(f"{sign} {var}" if mag == "1" else f"{sign} {mag} {var}")
    if not out:
        out.append(f"+ 0 {HOP_VAR}")
    if out[0].startswith("+ "):
        out[0] = out[0][2:]
    return out


def _write_expr(buf: io.StringIO, head: str, parts: list[str], tail: str = "") -> None:
    per_line = 8
    lines = [" ".join(parts[i:i + per_line]) for i in range(0, len(parts), per_line)]
    buf.write(f" {head} {lines[0]}")
    for line in lines[1:]:
        buf.write(f"\n   {line}")
    buf.write(f"{tail}\n")


def export_lp(m: IlpModel) -> str:
    """CPLEX LP text: delays in ms, capacities in Mbps, links ordered by (from, to)."""
    r = m.request
    buf = io.StringIO()
    buf.write("\\ minimum-delay function-constrained path selection\n")
    buf.write(f"\\ source {r.source} dest {r.dest} function {r.function} "
              f"capacity {format_fixed(r.capacity_kbps, KBPS_PER_MBPS)} Mbps "
              f"delay bound {format_fixed(r.delay_bound_ns, NS_PER_MS)} ms\n")
    for i, (name, kind) in enumerate(zip(m.node_names, m.node_kinds)):
        buf.write(f"\\ node {i} {name} {KIND_NAMES[kind]}\n")
    buf.write("Minimize\n")
    _write_expr(buf, "obj:", _format_terms(m.objective, NS_PER_MS))
    buf.write("Subject To\n")
    for c in m.constraints:
        rhs = format_fixed(c.rhs, c.scale)
        _write_expr(buf, f"{c.name}:", _format_terms(c.terms, c.scale), f" {c.sense} {rhs}")
    n_links = len(m.links)
    buf.write("Bounds\n")
    for y in m.y_vars:
        buf.write(f" 0 <= {y} <= {n_links}\n")
    buf.write(f" 0 <= {HOP_VAR} <= {n_links}\n")
    buf.write("Binaries\n")
    for x in m.x_vars:
        buf.write(f" {x}\n")
    buf.write("Generals\n")
    for y in m.y_vars + [HOP_VAR]:
        buf.write(f" {y}\n")
    buf.write("End\n")
    return buf.getvalue()
