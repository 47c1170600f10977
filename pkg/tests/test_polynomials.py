import math

import numpy as np
import pytest

from algdomain.errors import DegeneratePoints, IdenticallyZero
from algdomain.polynomials import (Box, Poly1, Poly2, differentiate, eval_poly, isolate_univariate_roots,
                                   restrict_to_segment, roots_on_segment)

x, y = Poly2.x(), Poly2.y()


def test_eval_examples():
    assert eval_poly(x * x + y * y - 1, (1, 0)) == 0.0
    assert eval_poly(Poly2(), (3, 4)) == 0.0
    assert eval_poly(y - x ** 3, (2, 1)) == -7.0


def test_zero_polynomial_conventions():
    z = Poly2()
    assert z.degree == -1
    assert len(z) == 0
    assert (x - x).degree == -1


def test_no_zero_coefficients_stored():
    p = Poly2({(1, 0): 1.0, (0, 1): 0.0, (2, 2): 3.0})
    assert dict(p.terms) == {(1, 0): 1.0, (2, 2): 3.0}
    assert p.degree == 4


def test_differentiate_examples():
    assert differentiate(x * x + y * y - 1, "Y") == 2 * y
    assert differentiate(y - x ** 3, "X", 2) == -6 * x
    assert differentiate(Poly2.const(5.0), "X").degree == -1


def test_restrict_examples():
    p = restrict_to_segment(x * x + y * y - 1, (-2, 0), (2, 0)).expanded()
    np.testing.assert_allclose(p.coeffs, [3, -16, 16])
    q = restrict_to_segment(y, (0, 1), (1, 1)).expanded()
    np.testing.assert_allclose(q.coeffs, [1.0])
    r = restrict_to_segment(x, (0, 0), (1, 0)).expanded()
    np.testing.assert_allclose(r.coeffs, [0.0, 1.0])


def test_restrict_matches_evaluation():
    p = (x - 0.3) ** 5 * (y + 0.2) ** 3 + x * y - 2
    a, b = (-1.5, 0.25), (2.0, -0.75)
    r = restrict_to_segment(p, a, b)
    for t in np.linspace(0, 1, 11):
        q = ((1 - t) * a[0] + t * b[0], (1 - t) * a[1] + t * b[1])
        assert r(t) == pytest.approx(p(*q), rel=1e-12, abs=1e-12)


def test_restrict_degenerate():
    with pytest.raises(DegeneratePoints):
        restrict_to_segment(x, (1, 1), (1, 1))


def test_isolate_examples():
    r = isolate_univariate_roots(Poly1([-1, 0, 1]), -2, 2, 1e-9)
    assert len(r) == 2
    assert r[0].lo <= -1 <= r[0].hi and r[1].lo <= 1 <= r[1].hi
    assert all(i.width <= 1e-9 and i.odd for i in r)
    assert isolate_univariate_roots(Poly1([1, 0, 1]), -2, 2, 1e-9) == []
    r = isolate_univariate_roots(Poly1([3, -16, 16]), 0, 1, 1e-12)
    assert [round(i.mid, 9) for i in r] == [0.25, 0.75]


def test_isolate_identically_zero():
    with pytest.raises(IdenticallyZero):
        isolate_univariate_roots(Poly1([]), 0, 1, 1e-9)
    with pytest.raises(ValueError):
        isolate_univariate_roots(Poly1([1, 1]), 0, 1, 0.0)


def test_double_root_is_even_cluster():
    # (t - 0.4)^2 (t - 0.7)
    p = Poly1(np.polynomial.polynomial.polyfromroots([0.4, 0.4, 0.7]))
    r = isolate_univariate_roots(p, 0, 1, 1e-10)
    assert len(r) == 2
    assert not r[0].odd and abs(r[0].mid - 0.4) < 1e-6
    assert r[1].odd and abs(r[1].mid - 0.7) < 1e-9


def test_wilkinson_like_cluster_separation():
    roots = [0.1 * k for k in range(1, 10)]
    p = Poly1(np.polynomial.polynomial.polyfromroots(roots))
    r = isolate_univariate_roots(p, 0, 1, 1e-12)
    assert len(r) == 9
    for ri, t in zip(r, roots):
        # the stored coefficients are rounded, so the enclosed root may move by ~1e-12
        assert abs(ri.mid - t) < 1e-9
        assert p(ri.lo) * p(ri.hi) <= 0


def test_centered_poly1_evaluation_and_derivative():
    p = Poly1([1.0, 2.0, 3.0], center=0.5, half=0.5)  # 1 + 2s + 3s^2, s = 2t - 1
    for t in (0.0, 0.3, 1.0):
        s = 2 * t - 1
        assert p(t) == pytest.approx(1 + 2 * s + 3 * s * s)
        assert p.derivative()(t) == pytest.approx(2 * (2 + 6 * s))
    np.testing.assert_allclose(p.expanded().coeffs, [2.0, -8.0, 12.0])


def test_roots_on_segment_circle():
    r = roots_on_segment(x * x + y * y - 1, (-2, 0.5), (2, 0.5))
    xs = [-2 + 4 * i.mid for i in r]
    assert xs == pytest.approx([-math.sqrt(0.75), math.sqrt(0.75)], abs=1e-9)


def test_high_degree_restriction_is_well_conditioned():
    # degree 12 in y, roots far from the segment start; every root is simple
    # and no spurious tangency cluster may appear
    levels = [-2.2 + 0.4 * k for k in range(12)]
    p = Poly2.const(1.0)
    for c in levels:
        p = p * (y - c)
    p = p + 1e-3 * x
    r = roots_on_segment(p, (0.0, -2.5), (0.0, 2.5), 1e-12)
    ys = [-2.5 + 5 * i.mid for i in r]
    assert ys == pytest.approx(levels, abs=1e-9)
    assert all(i.odd for i in r)


def test_json_round_trip():
    p = 0.1 * x ** 3 - y * x + 1 / 3
    q = Poly2.from_json(p.to_json())
    assert q == p
    with pytest.raises(ValueError):
        Poly2.from_json({"monomials": [[-1, 0, 1.0]]})


def test_enclosure_contains_samples():
    p = (x - 0.3) ** 4 - 2 * x * y ** 3 + 0.5 * y - 1
    for box in [(-1, 1, -1, 1), (0.2, 0.3, -0.9, -0.8), (1.5, 2.5, 1.0, 1.1)]:
        lo, hi = p.enclose(*box)
        clo, chi = p.enclose_centered(*box)
        tlo, thi = p.enclose_tight(*box)
        xs = np.linspace(box[0], box[1], 41)
        ys = np.linspace(box[2], box[3], 41)
        X, Y = np.meshgrid(xs, ys)
        v = p.evaluate(X.ravel(), Y.ravel())
        for a, b in ((lo, hi), (clo, chi), (tlo, thi)):
            assert a <= v.min() and v.max() <= b
        assert thi - tlo <= min(hi - lo, chi - clo) + 1e-15


def test_box_validation():
    with pytest.raises(ValueError):
        Box(1, 0, 0, 1)
    b = Box.from_list([-1, 1, -2, 2])
    assert b.to_list() == [-1.0, 1.0, -2.0, 2.0]
    assert b.size == 4.0 and b.center == (0.0, 0.0)
