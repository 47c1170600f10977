import math

import numpy as np
import pytest

from algdomain.curvegeo import (bitangent_contacts, check_nonsingular, curvature_at, curvature_numerator,
                                curvature_points, find_bitangents, find_curvature_vertices, find_inflections,
                                find_poles, tangent_at, trace_curve)
from algdomain.errors import SingularPoint
from algdomain.polynomials import Box, Poly2

x, y = Poly2.x(), Poly2.y()
B2 = Box(-2, 2, -2, 2)
B1 = Box(-1, 1, -1, 1)
CIRCLE = x * x + y * y - 1
ELLIPSE = x * x / 4 + y * y - 1


def locs(pts, nd=6):
    return sorted(tuple(round(v, nd) + 0.0 for v in p.location) for p in pts)


def test_check_nonsingular_examples():
    assert check_nonsingular(CIRCLE, B2).status == "NonSingular"
    v = check_nonsingular(y * y - x * x * (x + 1), B2)
    assert v.status == "SingularAt"
    assert len(v.points) == 1 and v.points[0] == pytest.approx((0, 0), abs=1e-9)
    assert check_nonsingular(x * x + y * y + 1, B2).status == "EmptyZeroSet"


def test_trace_circle():
    c = trace_curve(CIRCLE, B2, 0.01)
    assert c.closed_flags == [True]
    assert c.components[0].length == pytest.approx(2 * math.pi, rel=1e-2)
    pts = c.all_points()
    assert np.max(np.abs(CIRCLE.evaluate(pts[:, 0], pts[:, 1]))) <= 1e-9
    d = np.hypot(*np.diff(np.vstack([pts, pts[:1]]), axis=0).T)
    assert d.max() < 2 * 0.01


def test_trace_open_cubic():
    c = trace_curve(y - x ** 3, B1, 0.01)
    assert c.closed_flags == [False]
    assert c.distance_to((0, 0)) < 1e-3


def test_trace_two_ovals():
    f = ((x - 2) ** 2 + y * y - 1) * ((x + 2) ** 2 + y * y - 1)
    c = trace_curve(f, Box(-4, 4, -2, 2), 0.02)
    assert c.closed_flags == [True, True]


def test_tangent_examples():
    t = tangent_at(CIRCLE, (1, 0))
    assert abs(t.direction[0]) < 1e-15 and abs(abs(t.direction[1]) - 1) < 1e-15
    assert t.distance((1, 5)) == pytest.approx(0, abs=1e-12)
    t = tangent_at(y - x * x, (0, 0))
    assert t.distance((7, 0)) == pytest.approx(0, abs=1e-12)
    t = tangent_at(y - x ** 3, (1, 1))
    d = np.array(t.direction)
    assert abs(d[0] * 3 - d[1]) < 1e-12
    a, b, _c = t.implicit
    assert a * d[0] + b * d[1] == pytest.approx(0, abs=1e-15) and a * a + b * b == pytest.approx(1)
    with pytest.raises(SingularPoint):
        tangent_at(y * y - x * x * (x + 1), (0, 0))


def test_curvature_examples():
    for r in (0.5, 1.0, 3.0):
        f = x * x + y * y - r * r
        for th in np.linspace(0, 2 * math.pi, 7):
            assert curvature_at(f, (r * math.cos(th), r * math.sin(th))) == pytest.approx(1 / r, rel=1e-12)
    assert curvature_at(x + y - 1, (0.3, 0.7)) == 0.0
    assert abs(curvature_at(y - x * x, (0, 0))) == pytest.approx(2.0)


def test_curvature_matches_parametric_formula():
    # ellipse (2 cos t, sin t): kappa = det(c', c'') / |c'|^3 = 2 / (4 sin^2 + cos^2)^1.5
    for t in np.linspace(0.1, 6.2, 9):
        p = (2 * math.cos(t), math.sin(t))
        expect = 2 / (4 * math.sin(t) ** 2 + math.cos(t) ** 2) ** 1.5
        assert curvature_at(ELLIPSE, p) == pytest.approx(expect, rel=1e-12)


def test_curvature_symmetry_on_ellipse():
    c = trace_curve(ELLIPSE, Box(-3, 3, -3, 3))
    P = c.all_points()
    k1 = curvature_points(ELLIPSE, P)
    k2 = curvature_points(ELLIPSE, -P)
    assert np.max(np.abs(k1 - k2)) < 1e-8


def test_poles():
    c = trace_curve(CIRCLE, B2)
    assert locs(find_poles(c, "X")) == [(-1.0, 0.0), (1.0, 0.0)]
    assert locs(find_poles(c, "Y")) == [(0.0, -1.0), (0.0, 1.0)]
    assert find_poles(trace_curve(x - 0.5, B2), "X") == []
    assert locs(find_poles(trace_curve(y - x ** 3, B1), "Y"), 4) == [(0.0, 0.0)]


def test_pole_curvature_numerator_identity():
    # at an X pole f_y = 0, so N(f) reduces to f_x^2 f_yy
    f = x ** 3 / 3 + y * y + x * y / 2 - 1
    c = trace_curve(f, Box(-3, 3, -3, 3))
    N = curvature_numerator(f)
    for p in find_poles(c, "X"):
        assert N(*p.location) == pytest.approx(f.dx(*p.location) ** 2 * f.dy.dy(*p.location), rel=1e-9, abs=1e-12)


def test_inflections():
    assert locs(find_inflections(trace_curve(y - x ** 3, B1)), 6) == [(0.0, 0.0)]
    assert find_inflections(trace_curve(CIRCLE, B2)) == []
    assert find_inflections(trace_curve(y - x ** 4, B1)) == []


def test_bitangents():
    c = trace_curve(y - x ** 4 + 2 * x * x, Box(-2, 2, -2, 2))
    bts = find_bitangents(c)
    assert len(bts) == 1
    a, b, cc = bts[0].line.implicit
    # the line y = -1
    assert abs(a) < 1e-8 and abs(-cc / b + 1) < 1e-8
    contacts = sorted(bts[0].contacts)
    assert contacts[0] == pytest.approx((-1, -1), abs=1e-8)
    assert contacts[1] == pytest.approx((1, -1), abs=1e-8)
    assert locs(bitangent_contacts(c, bts), 8) == [(-1.0, -1.0), (1.0, -1.0)]
    assert find_bitangents(trace_curve(ELLIPSE, Box(-3, 3, -3, 3))) == []
    assert find_bitangents(trace_curve(CIRCLE, B2)) == []


def test_curvature_vertices():
    assert find_curvature_vertices(trace_curve(CIRCLE, B2)) == []
    cv = find_curvature_vertices(trace_curve(ELLIPSE, Box(-3, 3, -3, 3)))
    got = locs(cv, 6)
    assert got == [(-2.0, 0.0), (0.0, -1.0), (0.0, 1.0), (2.0, 0.0)]
    assert locs(find_curvature_vertices(trace_curve(y - x * x, B2)), 6) == [(0.0, 0.0)]


def test_line_has_nothing():
    c = trace_curve(x + 2 * y - 0.3, B2)
    assert find_inflections(c) == [] and find_bitangents(c) == [] and find_curvature_vertices(c) == []
