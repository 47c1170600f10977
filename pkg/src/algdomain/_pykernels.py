"""Pure-Python implementations of the numeric hot loops.

Every function here has a twin in ``_ckernels.pyx`` with the same signature
and the same floating-point operation order, so both backends return
bit-identical results on scalar paths.
"""

from __future__ import annotations

import math

import numpy as np

BACKEND = "python"

_EPS = 2.220446049250313e-16


def prepare(coeffs: np.ndarray):
    """Convert a dense coefficient matrix ``C[i, j]`` (x^i y^j) to the
    backend's preferred handle."""
    return [list(map(float, row)) for row in np.asarray(coeffs, dtype=float)]


def eval2(h, x: float, y: float) -> float:
    acc = 0.0
    for row in reversed(h):
        r = 0.0
        for c in reversed(row):
            r = r * y + c
        acc = acc * x + r
    return acc


def eval2_points(coeffs: np.ndarray, xs: np.ndarray, ys: np.ndarray) -> np.ndarray:
    C = np.asarray(coeffs, dtype=float)
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    acc = np.zeros(np.broadcast(xs, ys).shape)
    for i in range(C.shape[0] - 1, -1, -1):
        r = np.zeros_like(acc)
        for j in range(C.shape[1] - 1, -1, -1):
            r = r * ys + C[i, j]
        acc = acc * xs + r
    return acc


def _imul(alo, ahi, blo, bhi):
    p1 = alo * blo
    p2 = alo * bhi
    p3 = ahi * blo
    p4 = ahi * bhi
    return min(p1, p2, p3, p4), max(p1, p2, p3, p4)


def enclose2(h, xlo: float, xhi: float, ylo: float, yhi: float):
    """Interval Horner enclosure of the polynomial over a box, widened to
    absorb floating-point rounding."""
    ax = max(abs(xlo), abs(xhi))
    ay = max(abs(ylo), abs(yhi))
    lo = hi = 0.0
    mag = 0.0
    nops = 0
    for row in reversed(h):
        rlo = rhi = 0.0
        rmag = 0.0
        for c in reversed(row):
            rlo, rhi = _imul(rlo, rhi, ylo, yhi)
            rlo += c
            rhi += c
            rmag = rmag * ay + abs(c)
            nops += 2
        lo, hi = _imul(lo, hi, xlo, xhi)
        lo += rlo
        hi += rhi
        mag = mag * ax + rmag
        nops += 2
    err = (nops + 4) * _EPS * mag
    return lo - err, hi + err


def project(hf, hx, hy, x: float, y: float, tol: float, maxit: int):
    """Move (x, y) onto f = 0 along the gradient (Newton on the normal line).

    Returns ``(x, y, converged)``.
    """
    for _ in range(maxit):
        f = eval2(hf, x, y)
        gx = eval2(hx, x, y)
        gy = eval2(hy, x, y)
        g2 = gx * gx + gy * gy
        if g2 == 0.0 or not math.isfinite(g2):
            return x, y, False
        s = f / g2
        x -= s * gx
        y -= s * gy
        if abs(f) <= tol and abs(s) * math.sqrt(g2) <= tol:
            return x, y, True
    f = eval2(hf, x, y)
    return x, y, abs(f) <= tol


def column_runs(mask: np.ndarray):
    """Half-open runs ``[start, end)`` of True cells in every column."""
    m = np.asarray(mask, dtype=bool)
    out = []
    pad = np.zeros((1, m.shape[1]), dtype=np.int8)
    d = np.diff(np.vstack([pad, m.astype(np.int8), pad]), axis=0)
    for col in range(m.shape[1]):
        starts = np.flatnonzero(d[:, col] == 1)
        ends = np.flatnonzero(d[:, col] == -1)
        out.append(list(zip(starts.tolist(), ends.tolist())))
    return out
