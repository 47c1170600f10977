# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled twins of the routines in ``_pykernels``."""

import numpy as np
cimport numpy as cnp
from libc.math cimport fabs, sqrt, isfinite

cnp.import_array()

BACKEND = "cython"

cdef double _EPS = 2.220446049250313e-16


def prepare(coeffs):
    return np.ascontiguousarray(coeffs, dtype=np.float64)


cdef inline double _eval2(const double[:, ::1] C, double x, double y) noexcept nogil:
    cdef Py_ssize_t i, j
    cdef Py_ssize_t ni = C.shape[0], nj = C.shape[1]
    cdef double acc = 0.0, r
    for i in range(ni - 1, -1, -1):
        r = 0.0
        for j in range(nj - 1, -1, -1):
            r = r * y + C[i, j]
        acc = acc * x + r
    return acc


def eval2(const double[:, ::1] h, double x, double y):
    return _eval2(h, x, y)


def eval2_points(coeffs, xs, ys):
    cdef const double[:, ::1] C = np.ascontiguousarray(coeffs, dtype=np.float64)
    bx, by = np.broadcast_arrays(np.asarray(xs, dtype=np.float64),
                                 np.asarray(ys, dtype=np.float64))
    shape = bx.shape
    cdef const double[::1] X = np.ascontiguousarray(bx).ravel()
    cdef const double[::1] Y = np.ascontiguousarray(by).ravel()
    out = np.empty(X.shape[0], dtype=np.float64)
    cdef double[::1] O = out
    cdef Py_ssize_t k
    with nogil:
        for k in range(X.shape[0]):
            O[k] = _eval2(C, X[k], Y[k])
    return out.reshape(shape)


cdef inline void _imul(double alo, double ahi, double blo, double bhi,
                       double* lo, double* hi) noexcept nogil:
    cdef double p1 = alo * blo
    cdef double p2 = alo * bhi
    cdef double p3 = ahi * blo
    cdef double p4 = ahi * bhi
    cdef double mn = p1, mx = p1
    if p2 < mn: mn = p2
    if p3 < mn: mn = p3
    if p4 < mn: mn = p4
    if p2 > mx: mx = p2
    if p3 > mx: mx = p3
    if p4 > mx: mx = p4
    lo[0] = mn
    hi[0] = mx


def enclose2(const double[:, ::1] C, double xlo, double xhi, double ylo, double yhi):
    cdef Py_ssize_t i, j
    cdef Py_ssize_t ni = C.shape[0], nj = C.shape[1]
    cdef double ax = fabs(xlo) if fabs(xlo) > fabs(xhi) else fabs(xhi)
    cdef double ay = fabs(ylo) if fabs(ylo) > fabs(yhi) else fabs(yhi)
    cdef double lo = 0.0, hi = 0.0, mag = 0.0
    cdef double rlo, rhi, rmag, c, err
    cdef long nops = 0
    for i in range(ni - 1, -1, -1):
        rlo = 0.0
        rhi = 0.0
        rmag = 0.0
        for j in range(nj - 1, -1, -1):
            c = C[i, j]
            _imul(rlo, rhi, ylo, yhi, &rlo, &rhi)
            rlo += c
            rhi += c
            rmag = rmag * ay + fabs(c)
            nops += 2
        _imul(lo, hi, xlo, xhi, &lo, &hi)
        lo += rlo
        hi += rhi
        mag = mag * ax + rmag
        nops += 2
    err = (nops + 4) * _EPS * mag
    return lo - err, hi + err


def project(const double[:, ::1] hf, const double[:, ::1] hx, const double[:, ::1] hy,
            double x, double y, double tol, int maxit):
    cdef int it
    cdef double f, gx, gy, g2, s
    for it in range(maxit):
        f = _eval2(hf, x, y)
        gx = _eval2(hx, x, y)
        gy = _eval2(hy, x, y)
        g2 = gx * gx + gy * gy
        if g2 == 0.0 or not isfinite(g2):
            return x, y, False
        s = f / g2
        x -= s * gx
        y -= s * gy
        if fabs(f) <= tol and fabs(s) * sqrt(g2) <= tol:
            return x, y, True
    f = _eval2(hf, x, y)
    return x, y, fabs(f) <= tol


def column_runs(mask):
    cdef const cnp.npy_bool[:, :] m = np.ascontiguousarray(mask, dtype=np.bool_)
    cdef Py_ssize_t nr = m.shape[0], nc = m.shape[1]
    cdef Py_ssize_t r, col, start
    out = []
    for col in range(nc):
        runs = []
        start = -1
        for r in range(nr):
            if m[r, col]:
                if start < 0:
                    start = r
            elif start >= 0:
                runs.append((start, r))
                start = -1
        if start >= 0:
            runs.append((start, nr))
        out.append(runs)
    return out
