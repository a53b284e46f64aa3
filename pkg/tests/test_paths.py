import pytest

from vfroute.paths import ApplicationRequest, Infeasible, path_from_nodes, route_problems

from support import g0, g0_request


def test_request_check():
    g = g0()
    g0_request().check(g)
    with pytest.raises(ValueError, match="ground terminals"):
        ApplicationRequest.from_units(0, 1, "f1", 10, 30).check(g)
    with pytest.raises(ValueError, match="coincide"):
        ApplicationRequest.from_units(0, 0, "f1", 10, 30).check(g)
    with pytest.raises(KeyError):
        ApplicationRequest.from_units(0, 3, "nope", 10, 30).check(g)


def test_route_problems_accepts_g0_walk():
    g = g0()
    p = path_from_nodes(g, [0, 1, 2, 1, 3], 2)
    assert route_problems(p, g, g0_request()) == []
    assert not p.is_simple()
    assert p.delay_ns == 24_000_000
    assert route_problems(p, g, g0_request(20)) == ["delay bound exceeded"]
    assert "function node not on path interior" in route_problems(path_from_nodes(g, [0, 1, 3], 2), g, g0_request())
    assert route_problems(p, g, g0_request(), max_visits=1) == ["node 1 visited 2 times"]


def test_path_from_nodes_rejects_missing_link():
    with pytest.raises(ValueError):
        path_from_nodes(g0(), [0, 2, 3], 2)


def test_infeasible_is_falsy_and_serialises():
    res = Infeasible("no path")
    assert not res
    assert res.to_dict() == {"status": "infeasible", "reason": "no path"}


def test_to_dict_uses_names():
    g = g0()
    d = path_from_nodes(g, [0, 1, 2, 1, 3], 2).to_dict(g.nodes.names)
    assert d["nodes"] == ["s", "A", "B", "A", "d"]
    assert d["delay_ms"] == "24" and d["function_node"] == "B"
