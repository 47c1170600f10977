import os
import subprocess
import sys

import numpy as np
import pytest

from algdomain import kernels
from algdomain import _pykernels as py
from algdomain.polynomials import Poly2

ck = kernels.compiled_backend()
needs_compiled = pytest.mark.skipif(ck is None, reason="compiled extension not built")

x, y = Poly2.x(), Poly2.y()
POLYS = [x * x + y * y - 1, (x - 0.3) ** 5 * (y + 0.2) ** 3 + x * y - 2, 0.1 * x ** 7 - y ** 4 + 3 * x * y]


@needs_compiled
def test_eval_parity():
    rng = np.random.default_rng(1)
    for p in POLYS:
        hc, hp = ck.prepare(p.dense), py.prepare(p.dense)
        for u, v in rng.uniform(-2, 2, (50, 2)):
            assert ck.eval2(hc, u, v) == py.eval2(hp, u, v)
        xs, ys = rng.uniform(-2, 2, (2, 200))
        np.testing.assert_array_equal(ck.eval2_points(p.dense, xs, ys), py.eval2_points(p.dense, xs, ys))


@needs_compiled
def test_enclose_parity():
    rng = np.random.default_rng(2)
    for p in POLYS:
        hc, hp = ck.prepare(p.dense), py.prepare(p.dense)
        for _ in range(50):
            a, b = np.sort(rng.uniform(-2, 2, 2))
            c, d = np.sort(rng.uniform(-2, 2, 2))
            assert tuple(ck.enclose2(hc, a, b, c, d)) == tuple(py.enclose2(hp, a, b, c, d))


@needs_compiled
def test_project_parity():
    p = POLYS[1]
    hp = [py.prepare(q.dense) for q in (p, p.dx, p.dy)]
    hc = [ck.prepare(q.dense) for q in (p, p.dx, p.dy)]
    for u, v in [(1.0, 1.0), (0.5, -0.5), (2.0, 0.1)]:
        a = ck.project(*hc, u, v, 1e-12, 30)
        b = py.project(*hp, u, v, 1e-12, 30)
        assert a[2] == b[2]
        assert a[0] == pytest.approx(b[0], abs=1e-12) and a[1] == pytest.approx(b[1], abs=1e-12)


@needs_compiled
def test_column_runs_parity():
    rng = np.random.default_rng(3)
    m = rng.random((64, 80)) < 0.4
    assert ck.column_runs(m) == py.column_runs(m)


def test_runs_simple():
    m = np.array([[0, 1, 1], [1, 0, 1], [1, 0, 1]], dtype=bool)
    # columns are indexed by the second axis; runs are half-open row ranges
    assert kernels.column_runs(m) == [[(1, 3)], [(0, 1)], [(0, 3)]]


def test_pure_switch():
    code = "from algdomain import kernels; print(kernels.BACKEND)"
    env = dict(os.environ, ALGDOMAIN_PURE="1")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"
