import json
from pathlib import Path

import pytest

from algdomain.domain import (Scene, build_domain, characteristic_set, check_flags, classify_morse,
                              contains_point, report)
from algdomain.errors import (CurveMissesClosure, OnCurve, OutsideBox, SeedOnCurve, TangentialCrossing,
                              TriplePoint, UnboundedDomain)
from algdomain.polynomials import Box, Poly2
from conftest import scene_stacked

x, y = Poly2.x(), Poly2.y()
SCENES = Path(__file__).resolve().parent.parent / "scenes"


def locs(pts, nd=6):
    return sorted(tuple(round(v, nd) + 0.0 for v in p.location) for p in pts)


def test_unit_disk(unit_disk):
    assert unit_disk.crossings == []
    assert contains_point(unit_disk, (0.5, 0))
    assert not contains_point(unit_disk, (1.5, 0))
    assert locs(characteristic_set(unit_disk, "X")) == [(-1.0, 0.0), (1.0, 0.0)]
    m = classify_morse(unit_disk)
    assert m.morse and m.g_morse
    f = check_flags(unit_disk)
    assert f.nip and f.ndtl and f.ncv


def test_annulus(annulus):
    assert annulus.crossings == []
    assert not contains_point(annulus, (0, 0))
    assert contains_point(annulus, (0, -0.75))
    assert not contains_point(annulus, (1.2, 1.2))
    assert locs(characteristic_set(annulus, "X")) == [(-1.0, 0.0), (-0.5, 0.0), (0.5, 0.0), (1.0, 0.0)]
    assert classify_morse(annulus).g_morse


def test_circle_parabola(circle_parabola):
    xs = characteristic_set(circle_parabola, "X")
    crossings = [p for p in xs if p.kind == "Crossing"]
    assert len(crossings) == 2
    for p in crossings:
        assert p.curves == (0, 1)
        assert abs(p.x ** 2 + p.y ** 2 - 1) < 1e-12 and abs(p.y - p.x ** 2 + 0.5) < 1e-12
    # the circle's X poles lie below the parabola, so only the crossings remain
    assert [p for p in xs if p.kind == "Pole"] == []
    ys = [p for p in characteristic_set(circle_parabola, "Y") if p.kind == "Pole"]
    assert locs(ys) == [(0.0, -0.5), (0.0, 1.0)]


def test_query_errors(unit_disk):
    with pytest.raises(OutsideBox):
        contains_point(unit_disk, (3, 0))
    with pytest.raises(OnCurve):
        contains_point(unit_disk, (1, 0))


def test_stacked_circles_not_g_morse():
    dom = build_domain(scene_stacked())
    m = classify_morse(dom)
    assert m.morse and not m.g_morse
    assert m.g_witnesses["X"]


def test_crossing_at_pole_is_not_morse():
    # the circle crosses the cubic where the cubic has a horizontal tangent
    dom = build_domain(Scene([y - x ** 3, (x - 1) ** 2 + (y - 1) ** 2 - 2], Box(-4, 4, -4, 4), (1.0, 1.5)))
    m = classify_morse(dom)
    assert not m.morse
    assert any(abs(w.x) < 1e-9 and abs(w.y) < 1e-9 for w in m.witnesses)
    f = check_flags(dom)
    assert not f.nip
    assert locs(f.witnesses["nip"]) == [(0.0, 0.0)]


def test_ndtl_witnesses(quartic_line):
    f = check_flags(quartic_line)
    assert not f.ndtl
    assert len(f.witnesses["ndtl"]) >= 2


def test_ndtl_same_curve_only_reading():
    from conftest import scene_quartic_line
    dom = build_domain(scene_quartic_line(), ndtl_same_curve_only=True)
    assert not check_flags(dom).ndtl


def test_triple_point_rejected():
    with pytest.raises(TriplePoint):
        build_domain(Scene.from_json(json.loads((SCENES / "triple_point.json").read_text())))


def test_tangential_crossing_rejected():
    with pytest.raises(TangentialCrossing):
        build_domain(Scene([x * x + y * y - 1, (x - 2) ** 2 + y * y - 1, x * x / 9 + y * y / 4 - 1],
                           Box(-4, 4, -4, 4), (0.0, 1.5)))


def test_missing_curve_rejected():
    with pytest.raises(CurveMissesClosure):
        build_domain(Scene([x * x + y * y - 1, (x - 2.5) ** 2 + y * y - 0.25], Box(-4, 4, -4, 4), (0.0, 0.0)))


def test_unbounded_rejected():
    with pytest.raises(UnboundedDomain):
        build_domain(Scene([y - x * x], Box(-2, 2, -2, 2), (0.0, 1.0)))


def test_seed_on_curve_rejected():
    with pytest.raises(SeedOnCurve):
        build_domain(Scene([x * x + y * y - 1], Box(-2, 2, -2, 2), (1.0, 0.0)))


def test_report_shape(unit_disk):
    r = report(unit_disk)
    assert set(r["flags"]) == {"morse", "g_morse", "nip", "ndtl", "ncv"}
    assert [p["kind"] for p in r["characteristic_sets"]["X"]] == ["Pole(X)", "Pole(X)"]
    short = report(unit_disk, differential=False)
    assert set(short["flags"]) == {"morse", "g_morse"}


def test_scene_json_round_trip():
    s = scene_stacked()
    t = Scene.from_json(json.loads(json.dumps(s.to_json())))
    assert t.curves == s.curves and t.box == s.box and t.seed == s.seed and t.tol == s.tol


def test_tolerance_halving_is_stable(cubic_circle):
    sc = cubic_circle.scene
    half = Scene(sc.curves, sc.box, sc.seed, {**sc.tol, "solver": sc.tol["solver"] / 2})
    d2 = build_domain(half)
    for a in ("X", "Y"):
        assert locs(characteristic_set(d2, a)) == locs(characteristic_set(cubic_circle, a))
