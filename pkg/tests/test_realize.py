import json
import math
from pathlib import Path

import numpy as np
import pytest

from algdomain.curvegeo import check_nonsingular
from algdomain.domain import Scene, build_domain, classify_morse
from algdomain.errors import ClearanceTooSmall, InvalidEmbedding
from algdomain.oracle import grid_reeb
from algdomain.realize import (EmbeddedGraph, TubeSpec, _fit_box, expected_pole_count, fit_tube_polynomial,
                               realize_domain, split_vertices, tube_field)
from algdomain.reeb import path_graph, poincare_reeb, vdigraph_isomorphic

GRAPHS = Path(__file__).resolve().parent.parent / "graphs"


def load(name):
    return EmbeddedGraph.from_json(json.loads((GRAPHS / f"{name}.json").read_text()))


def G(verts, edges):
    return EmbeddedGraph.from_json({"vertices": [{"id": i, "x": a, "y": b} for i, (a, b) in enumerate(verts)],
                                    "edges": [{"a": a, "b": b} for a, b in edges]})


@pytest.fixture(scope="module", params=["path", "cycle", "y"])
def realized(request):
    g = load(request.param)
    log = {}
    delta = 0.3 if request.param == "path" else 0.15
    dom = realize_domain(g, TubeSpec(delta), log=log)
    return request.param, g, dom, log


def test_realized_graph_matches(realized):
    _name, g, dom, log = realized
    got = poincare_reeb(dom, "X")
    assert vdigraph_isomorphic(got, g.vdigraph(), "height_order", tol=1e-9)
    assert classify_morse(dom).morse
    assert log["tube_poles"] == log["expected_poles"] == expected_pole_count(g)


def test_disks_disjoint(realized):
    _name, _g, _dom, log = realized
    cs = log["circles"]
    for i in range(len(cs)):
        for j in range(i + 1, len(cs)):
            assert math.dist(cs[i]["center"], cs[j]["center"]) > cs[i]["radius"] + cs[j]["radius"]


def test_grid_oracle_agrees(realized):
    name, g, dom, _log = realized
    grid = grid_reeb(dom.scene, "X", 512)
    assert vdigraph_isomorphic(grid, g.vdigraph(), "height_order", tol=4 * dom.box.width / 512)


def test_split_vertices():
    p = load("path")
    assert split_vertices(p).extra_segments == []
    y = split_vertices(load("y"), 0.15)
    assert len(y.extra_segments) == 1
    (a, b) = y.extra_segments[0]
    assert a[0] == b[0] and b[1] > a[1]


def test_stadium_fit():
    g = load("path")
    spec = TubeSpec(0.3, fit_degree=8)
    F = fit_tube_polynomial(g, spec)
    box = _fit_box(g, spec.delta)
    assert check_nonsingular(F, box).status == "NonSingular"
    dom = build_domain(Scene([F], box, (0.0, 0.0)))
    assert vdigraph_isomorphic(poincare_reeb(dom, "X"), path_graph(-1.3, 1.3), "height_order")


def test_tube_field_sign():
    g = load("path")
    P = np.array([[0.0, 0.0], [0.0, 0.29], [0.0, 0.31], [1.5, 0.0]])
    v = tube_field(g, 0.3, P)
    assert v[0] < 0 and v[1] < 0 and v[2] > 0 and v[3] > 0


def test_expected_poles():
    assert expected_pole_count(load("path")) == 2
    assert expected_pole_count(load("cycle")) == 4
    assert expected_pole_count(load("y")) == 4


def test_invalid_embeddings():
    with pytest.raises(InvalidEmbedding):
        G([(0, 0), (1, 0)], []).validate()
    # a degree-two local extremum
    with pytest.raises(InvalidEmbedding):
        G([(0, 0), (1, 0), (0, 1)], [(0, 1), (1, 2)]).validate()
    # crossing edges
    with pytest.raises(InvalidEmbedding):
        G([(0, 0), (1, 1), (0, 1), (1, 0), (2, 0.5)], [(0, 1), (2, 3), (1, 4), (3, 4)]).validate()
    # non-monotone polyline
    bad = EmbeddedGraph.from_json({"vertices": [{"id": 0, "x": 0, "y": 0}, {"id": 1, "x": 1, "y": 0}],
                                   "edges": [{"a": 0, "b": 1, "polyline": [[0, 0], [1.2, 0.3], [1, 0]]}]})
    with pytest.raises(InvalidEmbedding):
        bad.validate()


def test_clearance_too_small():
    g = G([(0, 0), (1, 0), (1.1, 0), (2, 0)], [(0, 1), (1, 2), (2, 3)])
    with pytest.raises(ClearanceTooSmall):
        realize_domain(g, TubeSpec(0.3))


def test_spec_validation():
    with pytest.raises(ValueError):
        TubeSpec(0.0)
    with pytest.raises(ValueError):
        TubeSpec(0.1, fit_degree=12, degree_cap=10)


def test_json_round_trip():
    g = load("cycle")
    h = EmbeddedGraph.from_json(g.to_json())
    assert h.positions == g.positions
    assert all(np.array_equal(a[2], b[2]) for a, b in zip(g.edges, h.edges))
