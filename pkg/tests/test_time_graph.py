from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from vfroute.time_graph import (
    ContactPlan,
    TimeWindow,
    build_snapshots,
    filter_by_capacity,
    format_fixed,
    functional_satellites,
    mbps_to_kbps,
    ms_to_ns,
    reverse_graph,
    snapshot_at,
    snapshot_for_time,
    window_boundaries,
)

from support import g0, instance_set, make_nodes, make_snapshot


def test_unit_conversion_is_exact():
    assert ms_to_ns("5.1") == 5_100_000
    assert ms_to_ns(5.1) == 5_100_000
    assert ms_to_ns(Fraction(1, 3)) == 333_333
    assert mbps_to_kbps(0.3) == 300
    assert format_fixed(5_100_000, 1_000_000) == "5.1"
    assert format_fixed(24_000_000, 1_000_000) == "24"
    assert format_fixed(-1500, 1000) == "-1.5"


@given(st.integers(-10**12, 10**12))
def test_format_fixed_round_trips(v):
    assert ms_to_ns(format_fixed(v, 1_000_000)) == v


def test_empty_window_rejected():
    with pytest.raises(ValueError):
        TimeWindow(3.0, 3.0)


def test_parallel_links_and_self_loops_rejected():
    nodes = make_nodes(["a", "b"], ["gt", "sat"])
    with pytest.raises(ValueError, match="parallel"):
        make_snapshot(nodes, [("a", "b", 1, 1), ("a", "b", 2, 1)])
    with pytest.raises(ValueError):
        make_snapshot(nodes, [("a", "a", 1, 1)])


def test_ground_terminal_budget_rejected():
    with pytest.raises(ValueError, match="ground terminals"):
        make_nodes(["a", "b"], ["gt", "sat"], budgets=[[1], [0]])


def test_filter_by_capacity_keeps_nodes():
    nodes = make_nodes(["a", "b", "c"], ["gt", "sat", "gt"])
    g = make_snapshot(nodes, [("a", "b", 5, 10), ("b", "c", 5, 50), ("c", "a", 5, 49.999)])
    h = filter_by_capacity(g, mbps_to_kbps(50))
    assert h.n_nodes == 3
    assert [(l.src, l.dst) for l in h.links()] == [(1, 2)]
    with pytest.raises(ValueError):
        filter_by_capacity(g, -1)


def test_filter_preserves_cross_section():
    for g, _ in instance_set(3, 20):
        c = int(np.median(g.capacity_kbps)) if g.n_links else 0
        h = filter_by_capacity(g, c)
        assert set(h.links()) == {l for l in g.links() if l.capacity_kbps >= c}


def test_reverse_is_involution():
    for g, _ in instance_set(5, 20, symmetric=False):
        rr = reverse_graph(reverse_graph(g))
        assert rr.structurally_equal(g)
        assert {(l.dst, l.src, l.delay_ns) for l in reverse_graph(g).links()} == \
            {(l.src, l.dst, l.delay_ns) for l in g.links()}


def test_functional_satellites_g0():
    assert functional_satellites(g0(), "f1") == {2}
    with pytest.raises(KeyError):
        functional_satellites(g0(), "f9")


def test_with_budgets_is_a_view():
    g = g0()
    h = g.with_budgets(np.zeros((4, 1), dtype=np.int64))
    assert h.topology is g.topology
    assert functional_satellites(h, "f1") == frozenset()
    assert functional_satellites(g, "f1") == {2}


def _plan(records, n=3):
    nodes = make_nodes([f"v{i}" for i in range(n)], ["gt"] + ["sat"] * (n - 1))
    return ContactPlan.from_records(nodes, records)


def test_time_division_splits_at_every_event():
    plan = _plan([(0, 1, 0.0, 10.0, 1, 1), (1, 2, 2.0, 6.0, 1, 1), (2, 1, 4.0, 12.0, 1, 1)])
    snaps = build_snapshots(plan, TimeWindow(0.0, 10.0))
    assert [(s.window.t_start, s.window.t_end) for s in snaps] == [(0, 2), (2, 4), (4, 6), (6, 10)]
    assert [s.n_links for s in snaps] == [1, 2, 3, 2]
    assert snapshot_at(snaps, 4.0) is snaps[2]
    assert snapshot_at(snaps, 10.0) is snaps[3]
    with pytest.raises(ValueError):
        snapshot_at(snaps, 10.5)


def test_single_snapshot_for_time_matches_full_division():
    plan = _plan([(0, 1, 0.0, 10.0, 1, 1), (1, 2, 2.0, 6.0, 1, 1), (2, 1, 4.0, 12.0, 1, 1)])
    h = TimeWindow(0.0, 10.0)
    snaps = build_snapshots(plan, h)
    for t in (0.0, 1.9, 2.0, 5.0, 9.99, 10.0):
        assert snapshot_for_time(plan, t, h).structurally_equal(snapshot_at(snaps, t))


def test_contacts_clipped_to_horizon():
    plan = _plan([(0, 1, -5.0, 3.0, 1, 1), (1, 2, 8.0, 20.0, 1, 1)])
    assert window_boundaries(plan, TimeWindow(0.0, 10.0)).tolist() == [0.0, 3.0, 8.0, 10.0]


def test_parallel_contacts_keep_best_capacity():
    plan = _plan([(0, 1, 0.0, 10.0, 9, 5), (0, 1, 0.0, 10.0, 3, 7), (0, 1, 0.0, 10.0, 2, 7)])
    (snap,) = build_snapshots(plan, TimeWindow(0.0, 10.0))
    assert list(snap.links())[0].delay_ns == 2 and snap.n_links == 1


@settings(max_examples=60, deadline=None)
@given(st.lists(st.tuples(st.integers(0, 3), st.integers(0, 3), st.integers(0, 40), st.integers(1, 20)),
                min_size=1, max_size=25))
def test_windows_tile_horizon_and_are_constant(raw):
    records = [(a, b, float(t), float(t + dt), 1, 1) for a, b, t, dt in raw if a != b]
    if not records:
        return
    plan = _plan(records, n=4)
    h = TimeWindow(0.0, 50.0)
    snaps = build_snapshots(plan, h)
    assert snaps[0].window.t_start == h.t_start and snaps[-1].window.t_end == h.t_end
    for a, b in zip(snaps, snaps[1:]):
        assert a.window.t_end == b.window.t_start
    for s in snaps:
        w = s.window
        for _, _, t0, t1, _, _ in plan.records():
            assert not (w.t_start < t0 < w.t_end) and not (w.t_start < t1 < w.t_end)
