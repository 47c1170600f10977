"""Certified solving of small square polynomial systems inside boxes.

Boxes are discarded by interval exclusion, certified by the Krawczyk
operator (which proves existence and uniqueness of a root in an inflated
box), and otherwise bisected. Certified roots are polished by Newton.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import BudgetExceeded, Diverged, SingularCluster, SingularJacobian
from .polynomials import Poly2

_EPS = 2.220446049250313e-16
TIGHT_DEGREE = 6


class PolyN:
    """Sparse real polynomial in ``n`` variables (n <= 4 in practice)."""

    __slots__ = ("n", "exps", "coeffs", "_grad")

    def __init__(self, n: int, terms: dict | None = None):
        self.n = n
        terms = {tuple(int(e) for e in k): float(v) for k, v in (terms or {}).items() if v != 0.0}
        keys = sorted(terms)
        self.exps = np.array(keys, dtype=int).reshape(len(keys), n)
        self.coeffs = np.array([terms[k] for k in keys], dtype=float)
        self._grad = None

    @classmethod
    def lift(cls, p: Poly2, n: int, xi: int, yi: int) -> "PolyN":
        """Embed a bivariate polynomial using variables ``xi`` and ``yi``."""
        t = {}
        for (i, j), c in p:
            e = [0] * n
            e[xi] += i
            e[yi] += j
            t[tuple(e)] = t.get(tuple(e), 0.0) + c
        return cls(n, t)

    @classmethod
    def var(cls, n: int, k: int) -> "PolyN":
        e = [0] * n
        e[k] = 1
        return cls(n, {tuple(e): 1.0})

    def _as_dict(self) -> dict:
        return {tuple(e): c for e, c in zip(self.exps.tolist(), self.coeffs.tolist())}

    def __add__(self, other):
        if not isinstance(other, PolyN):
            other = PolyN(self.n, {(0,) * self.n: float(other)})
        t = self._as_dict()
        for k, v in other._as_dict().items():
            t[k] = t.get(k, 0.0) + v
        return PolyN(self.n, t)

    __radd__ = __add__

    def __neg__(self):
        return PolyN(self.n, {k: -v for k, v in self._as_dict().items()})

    def __sub__(self, other):
        return self + (-other if isinstance(other, PolyN) else -float(other))

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, PolyN):
            return PolyN(self.n, {k: v * float(other) for k, v in self._as_dict().items()})
        t: dict = {}
        for e1, c1 in zip(self.exps.tolist(), self.coeffs.tolist()):
            for e2, c2 in zip(other.exps.tolist(), other.coeffs.tolist()):
                k = tuple(a + b for a, b in zip(e1, e2))
                t[k] = t.get(k, 0.0) + c1 * c2
        return PolyN(self.n, t)

    __rmul__ = __mul__

    def diff(self, k: int) -> "PolyN":
        t = {}
        for e, c in zip(self.exps.tolist(), self.coeffs.tolist()):
            if e[k] == 0:
                continue
            e2 = list(e)
            e2[k] -= 1
            t[tuple(e2)] = t.get(tuple(e2), 0.0) + c * e[k]
        return PolyN(self.n, t)

    @property
    def grad(self) -> list["PolyN"]:
        if self._grad is None:
            self._grad = [self.diff(k) for k in range(self.n)]
        return self._grad

    def __call__(self, x) -> float:
        if len(self.coeffs) == 0:
            return 0.0
        x = np.asarray(x, dtype=float)
        return float(np.prod(x[None, :] ** self.exps, axis=1) @ self.coeffs)

    def gradient(self, x) -> np.ndarray:
        return np.array([g(x) for g in self.grad])

    def magnitude(self, x) -> float:
        if len(self.coeffs) == 0:
            return 0.0
        x = np.abs(np.asarray(x, dtype=float))
        return float(np.prod(x[None, :] ** self.exps, axis=1) @ np.abs(self.coeffs))

    def enclose(self, lo, hi) -> tuple[float, float]:
        if len(self.coeffs) == 0:
            return 0.0, 0.0
        lo = np.asarray(lo, dtype=float)
        hi = np.asarray(hi, dtype=float)
        m_lo = np.ones(len(self.coeffs))
        m_hi = np.ones(len(self.coeffs))
        for k in range(self.n):
            e = self.exps[:, k]
            a, b = lo[k] ** e, hi[k] ** e
            plo, phi = np.minimum(a, b), np.maximum(a, b)
            straddle = (lo[k] < 0) & (hi[k] > 0) & (e % 2 == 0) & (e > 0)
            plo = np.where(straddle, 0.0, plo)
            p = np.stack([m_lo * plo, m_lo * phi, m_hi * plo, m_hi * phi])
            m_lo, m_hi = p.min(axis=0), p.max(axis=0)
        c = self.coeffs
        tlo = np.where(c >= 0, c * m_lo, c * m_hi)
        thi = np.where(c >= 0, c * m_hi, c * m_lo)
        mag = np.abs(c) @ np.maximum(np.abs(m_lo), np.abs(m_hi))
        err = 4.0 * (self.exps.sum() + len(c) + 2) * _EPS * mag
        return float(tlo.sum() - err), float(thi.sum() + err)


class Poly2Eq:
    """A bivariate polynomial exposed through the solver's equation protocol,
    backed by the compiled kernels."""

    __slots__ = ("p", "n")

    def __init__(self, p: Poly2):
        self.p = p
        self.n = 2

    def __call__(self, x) -> float:
        return self.p(x[0], x[1])

    def gradient(self, x) -> np.ndarray:
        return np.array([self.p.dx(x[0], x[1]), self.p.dy(x[0], x[1])])

    def magnitude(self, x) -> float:
        return self._abs(abs(x[0]), abs(x[1]))

    @property
    def _abs(self) -> Poly2:
        return self.p.cached("abs", lambda: Poly2({k: abs(c) for k, c in self.p}))

    def _enc(self, q: Poly2, lo, hi):
        # Horner enclosures are loose for high degree; add the centred form there
        if self.p.degree >= TIGHT_DEGREE:
            return q.enclose_tight(lo[0], hi[0], lo[1], hi[1])
        return q.enclose(lo[0], hi[0], lo[1], hi[1])

    def enclose(self, lo, hi) -> tuple[float, float]:
        return self._enc(self.p, lo, hi)

    def enclose_grad(self, lo, hi):
        gx = self._enc(self.p.dx, lo, hi)
        gy = self._enc(self.p.dy, lo, hi)
        return np.array([gx[0], gy[0]]), np.array([gx[1], gy[1]])


def _as_eq(e):
    if isinstance(e, Poly2):
        return Poly2Eq(e)
    return e


def _enclose_grad(eq, lo, hi):
    if hasattr(eq, "enclose_grad"):
        return eq.enclose_grad(lo, hi)
    pairs = [g.enclose(lo, hi) for g in eq.grad]
    return np.array([p[0] for p in pairs]), np.array([p[1] for p in pairs])


@dataclass(frozen=True)
class CertifiedPoint:
    location: tuple
    radius: float
    residual: float
    # False for a cluster reported at the resolution limit (no uniqueness proof)
    isolated: bool = True

    @property
    def x(self) -> float:
        return self.location[0]

    @property
    def y(self) -> float:
        return self.location[1]

    def as_array(self) -> np.ndarray:
        return np.array(self.location)


def _residual(eqs, x) -> float:
    return max(abs(e(x)) for e in eqs)


def _jacobian(eqs, x) -> np.ndarray:
    return np.array([e.gradient(x) for e in eqs])


def _scaled_tol(eqs, x, tol) -> float:
    return tol * max(1.0, max(e.magnitude(x) for e in eqs))


def polish_newton(eqs: Sequence, start, tol: float = 1e-12, maxit: int = 60) -> CertifiedPoint:
    """Damped Newton iteration from ``start``.

    Raises SingularJacobian when the linearization is numerically singular
    and Diverged when the residual does not reach ``tol`` (scaled by the
    rounding magnitude of the equations at the iterate).
    """
    eqs = [_as_eq(e) for e in eqs]
    x = np.array(start, dtype=float)
    r = _residual(eqs, x)
    last_step = math.inf
    for _ in range(maxit):
        J = _jacobian(eqs, x)
        F = np.array([e(x) for e in eqs])
        if not np.all(np.isfinite(J)) or not np.all(np.isfinite(F)):
            raise Diverged("non-finite iterate", start=list(map(float, start)))
        try:
            cond = np.linalg.cond(J)
        except np.linalg.LinAlgError:
            cond = math.inf
        if not math.isfinite(cond) or cond > 1e14:
            # a root where the curves are tangent: accept once the residual is small
            if r <= _scaled_tol(eqs, x, tol):
                break
            raise SingularJacobian("singular Jacobian during Newton", at=x.tolist())
        step = np.linalg.solve(J, F)
        lam = 1.0
        while True:
            xn = x - lam * step
            rn = _residual(eqs, xn)
            if rn <= r or lam < 1e-4:
                break
            lam *= 0.5
        snorm = float(np.max(np.abs(lam * step)))
        x, r = xn, rn
        last_step = snorm
        if snorm <= 4 * _EPS * (1.0 + float(np.max(np.abs(x)))) and r <= _scaled_tol(eqs, x, tol):
            break
    if not np.all(np.isfinite(x)) or r > _scaled_tol(eqs, x, tol):
        raise Diverged("Newton did not reach tolerance", residual=r, start=list(map(float, start)))
    radius = max(2.0 * last_step, 4 * _EPS * (1.0 + float(np.max(np.abs(x)))))
    return CertifiedPoint(tuple(float(v) for v in x), radius, float(r))


def _krawczyk(eqs, lo, hi):
    """Return ('unique', box_lo, box_hi) / ('none',) / ('unknown',) for the box."""
    c = 0.5 * (lo + hi)
    r = 0.5 * (hi - lo)
    Jc = _jacobian(eqs, c)
    try:
        Y = np.linalg.inv(Jc)
    except np.linalg.LinAlgError:
        return ("unknown",)
    if not np.all(np.isfinite(Y)):
        return ("unknown",)
    F = np.array([e(c) for e in eqs])
    g = [_enclose_grad(e, lo, hi) for e in eqs]
    Jlo = np.array([t[0] for t in g])
    Jhi = np.array([t[1] for t in g])
    Jmid = 0.5 * (Jlo + Jhi)
    Jrad = 0.5 * (Jhi - Jlo)
    k = c - Y @ F
    M_mid = np.eye(len(c)) - Y @ Jmid
    M_rad = np.abs(Y) @ Jrad
    s = (np.abs(M_mid) + M_rad) @ r
    # generous allowance for the rounding in the point evaluations
    s = s * (1 + 1e-12) + 1e-15 * (np.abs(k) + 1.0)
    d = np.abs(k - c)
    if np.all(d + s < r):
        return ("unique", k - s, k + s)
    if np.any(d - s > r):
        return ("none",)
    return ("unknown",)


def _excluded(eqs, lo, hi, glo=None, ghi=None) -> bool:
    c = 0.5 * (lo + hi)
    r = 0.5 * (hi - lo)
    for idx, e in enumerate(eqs):
        a, b = e.enclose(lo, hi)
        if a > 0 or b < 0:
            return True
        # mean-value form
        if glo is not None:
            gl, gh = glo[idx], ghi[idx]
            spread = float(np.maximum(np.abs(gl), np.abs(gh)) @ r)
            fc = e(c)
            err = 8 * _EPS * e.magnitude(c)
            if fc - spread - err > 0 or fc + spread + err < 0:
                return True
    return False


def solve_system(eqs: Sequence, lo, hi, tol: float = 1e-12, *, max_nodes: int = 200000,
                 min_width: float = 1e-10, seeds: Sequence | None = None,
                 clusters: str = "raise") -> list[CertifiedPoint]:
    """All solutions of the square system ``eqs = 0`` in the box [lo, hi].

    ``eqs`` are Poly2 (2 unknowns) or PolyN objects. When ``seeds`` is given
    the box is not subdivided; each seed is polished by Newton and then
    certified by a Krawczyk test on a small box around it.

    With ``clusters="collect"`` a box that shrinks below ``min_width`` without
    a uniqueness proof is reported as a point with ``isolated=False`` and its
    neighbourhood is skipped, instead of raising SingularCluster.
    """
    if clusters not in ("raise", "collect"):
        raise ValueError("clusters must be 'raise' or 'collect'")
    eqs = [_as_eq(e) for e in eqs]
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    n = len(lo)
    if not 1 <= n <= 4 or len(eqs) != n:
        raise ValueError("need a square system with 1..4 unknowns")
    if any(e.n != n for e in eqs):
        raise ValueError("equation arity does not match the box dimension")
    if tol <= 0:
        raise ValueError("tol must be positive")

    found: list[tuple[np.ndarray, float]] = []
    if seeds is not None:
        for s in seeds:
            try:
                cp = polish_newton(eqs, s, tol)
            except (Diverged, SingularJacobian):
                continue
            x = np.array(cp.location)
            if np.any(x < lo) or np.any(x > hi):
                continue
            rad = _certify_point(eqs, x)
            if rad is not None:
                found.append((x, rad))
    else:
        found, cl = _subdivide(eqs, lo, hi, tol, max_nodes, min_width, clusters == "collect")
        return _finalize(eqs, found, tol) + _cluster_points(eqs, cl, found)

    return _finalize(eqs, found, tol)


def _certify_point(eqs, x) -> float | None:
    for w in (1e-9, 1e-7, 1e-5):
        rad = w * (1.0 + float(np.max(np.abs(x))))
        res = _krawczyk(eqs, x - rad, x + rad)
        if res[0] == "unique":
            return rad
    return None


def _subdivide(eqs, lo, hi, tol, max_nodes, min_width, collect=False):
    span = float(np.max(hi - lo))
    stack = [(lo, hi)]
    found = []
    clusters: list[np.ndarray] = []
    guard = 1e3 * min_width * max(1.0, span)
    nodes = 0
    while stack:
        blo, bhi = stack.pop()
        if clusters and any(np.all(blo >= c - guard) and np.all(bhi <= c + guard) for c in clusters):
            continue
        nodes += 1
        if nodes > max_nodes:
            raise BudgetExceeded("subdivision node budget exhausted", nodes=nodes)
        w = bhi - blo
        pad = 0.05 * w + 1e-15 * (1.0 + np.abs(blo) + np.abs(bhi))
        ilo, ihi = blo - pad, bhi + pad
        g = [_enclose_grad(e, ilo, ihi) for e in eqs]
        if _excluded(eqs, blo, bhi, [t[0] for t in g], [t[1] for t in g]):
            continue
        res = _krawczyk(eqs, ilo, ihi)
        if res[0] == "none":
            continue
        if res[0] == "unique":
            start = 0.5 * (res[1] + res[2])
            try:
                cp = polish_newton(eqs, start, tol)
                x = np.array(cp.location)
            except (Diverged, SingularJacobian):
                x = start
            if np.all(x >= res[1] - 1e-12) and np.all(x <= res[2] + 1e-12):
                if np.all(x >= lo) and np.all(x <= hi):
                    found.append((x, float(np.max(ihi - ilo)) * 0.5))
                continue
        if float(np.max(w)) < min_width * max(1.0, span):
            if collect:
                clusters.append(0.5 * (blo + bhi))
                continue
            raise SingularCluster("cannot separate solutions at the resolution limit",
                                  center=(0.5 * (blo + bhi)).tolist(), width=float(np.max(w)))
        k = int(np.argmax(w))
        cut = blo[k] + 0.4990234375 * w[k]
        left_hi = bhi.copy()
        left_hi[k] = cut
        right_lo = blo.copy()
        right_lo[k] = cut
        stack.append((right_lo, bhi))
        stack.append((blo, left_hi))
    return found, clusters


def _cluster_points(eqs, clusters, found) -> list[CertifiedPoint]:
    """Merge cluster boxes lying within the guard distance of each other."""
    out: list[CertifiedPoint] = []
    groups: list[list[np.ndarray]] = []
    for c in clusters:
        for g in groups:
            if float(np.max(np.abs(g[0] - c))) < 1e-6 * (1.0 + float(np.max(np.abs(c)))):
                g.append(c)
                break
        else:
            groups.append([c])
    for g in groups:
        pts = np.array(g)
        x = pts.mean(axis=0)
        rad = float(np.max(np.abs(pts - x))) + 1e-10 * (1.0 + float(np.max(np.abs(x))))
        out.append(CertifiedPoint(tuple(float(v) for v in x), rad, _residual(eqs, x), False))
    return out


def _finalize(eqs, found, tol) -> list[CertifiedPoint]:
    found = sorted(found, key=lambda t: tuple(t[0]))
    uniq: list[list] = []
    for x, rad in found:
        dup = False
        for u in uniq:
            if float(np.max(np.abs(u[0] - x))) <= max(u[1], rad):
                dup = True
                if rad < u[1]:
                    u[0], u[1] = x, rad
                break
        if not dup:
            uniq.append([x, rad])
    out = []
    for idx, (x, rad) in enumerate(uniq):
        dmin = math.inf
        for jdx, (y, _) in enumerate(uniq):
            if jdx != idx:
                dmin = min(dmin, float(np.max(np.abs(x - y))))
        radius = min(rad, 0.49 * dmin) if math.isfinite(dmin) else rad
        tight = _certify_point(eqs, x)
        if tight is not None:
            radius = min(radius, tight)
        out.append(CertifiedPoint(tuple(float(v) for v in x), float(radius), _residual(eqs, x)))
    out.sort(key=lambda cp: cp.location)
    return out
