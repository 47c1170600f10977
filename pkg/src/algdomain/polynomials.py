"""Sparse bivariate polynomials, their restrictions to segments, and
certified real-root isolation for the resulting univariate polynomials."""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
from numpy.polynomial import polynomial as npoly

from . import kernels
from .errors import DegeneratePoints, IdenticallyZero, ToleranceTooCoarse

_EPS = 2.220446049250313e-16
ZERO_SCALE = 1e-13


@dataclass(frozen=True)
class Box:
    x_lo: float
    x_hi: float
    y_lo: float
    y_hi: float

    def __post_init__(self):
        for k in ("x_lo", "x_hi", "y_lo", "y_hi"):
            object.__setattr__(self, k, float(getattr(self, k)))
        if not (self.x_lo < self.x_hi and self.y_lo < self.y_hi):
            raise ValueError(f"degenerate box {self}")

    @classmethod
    def from_list(cls, v: Sequence[float]) -> "Box":
        return cls(*(float(t) for t in v))

    def to_list(self) -> list[float]:
        return [self.x_lo, self.x_hi, self.y_lo, self.y_hi]

    @property
    def width(self) -> float:
        return self.x_hi - self.x_lo

    @property
    def height(self) -> float:
        return self.y_hi - self.y_lo

    @property
    def size(self) -> float:
        return max(self.width, self.height)

    @property
    def center(self) -> tuple[float, float]:
        return 0.5 * (self.x_lo + self.x_hi), 0.5 * (self.y_lo + self.y_hi)

    def contains(self, p, margin: float = 0.0) -> bool:
        return (self.x_lo + margin <= p[0] <= self.x_hi - margin
                and self.y_lo + margin <= p[1] <= self.y_hi - margin)

    def range(self, axis: int) -> tuple[float, float]:
        return (self.x_lo, self.x_hi) if axis == 0 else (self.y_lo, self.y_hi)

    def boundary_distance(self, p) -> float:
        return min(p[0] - self.x_lo, self.x_hi - p[0], p[1] - self.y_lo, self.y_hi - p[1])


class Poly2:
    """Sparse real polynomial in x and y.

    Stored as ``{(i, j): coeff}`` for the monomial ``x**i * y**j``; zero
    coefficients are never stored. Instances are treated as immutable.
    """

    __slots__ = ("_terms", "_dense", "_handle", "_hash", "_cache")

    def __init__(self, terms=None):
        items: dict[tuple[int, int], float] = {}
        if terms:
            it = terms.items() if isinstance(terms, dict) else ((tuple(t[:2]), t[2]) for t in terms)
            for (i, j), c in it:
                i, j, c = int(i), int(j), float(c)
                if i < 0 or j < 0:
                    raise ValueError("negative exponent")
                if not math.isfinite(c):
                    raise ValueError("non-finite coefficient")
                if c != 0.0:
                    items[(i, j)] = items.get((i, j), 0.0) + c
        self._terms = {k: v for k, v in sorted(items.items()) if v != 0.0}
        self._dense = None
        self._handle = None
        self._hash = None
        self._cache = {}

    # construction helpers
    @classmethod
    def const(cls, c: float) -> "Poly2":
        return cls({(0, 0): c})

    @classmethod
    def x(cls) -> "Poly2":
        return cls({(1, 0): 1.0})

    @classmethod
    def y(cls) -> "Poly2":
        return cls({(0, 1): 1.0})

    @classmethod
    def from_dense(cls, C) -> "Poly2":
        C = np.asarray(C, dtype=float)
        return cls({(i, j): C[i, j] for i in range(C.shape[0]) for j in range(C.shape[1]) if C[i, j] != 0.0})

    @classmethod
    def circle(cls, cx: float, cy: float, r: float) -> "Poly2":
        x, y = cls.x(), cls.y()
        return (x - cx) ** 2 + (y - cy) ** 2 - r * r

    @classmethod
    def ellipse(cls, cx: float, cy: float, a: float, b: float, angle: float = 0.0) -> "Poly2":
        """Ellipse with semi-axes a (along ``angle``) and b, scaled so the
        leading form matches the unit-radius circle convention."""
        x, y = cls.x() - cx, cls.y() - cy
        c, s = math.cos(angle), math.sin(angle)
        u = x * c + y * s
        v = y * c - x * s
        return u * u * (1.0 / (a * a)) + v * v * (1.0 / (b * b)) - 1.0

    # container protocol
    @property
    def terms(self) -> dict[tuple[int, int], float]:
        return dict(self._terms)

    def __iter__(self):
        return iter(self._terms.items())

    def __len__(self) -> int:
        return len(self._terms)

    @property
    def degree(self) -> int:
        if not self._terms:
            return -1
        return max(i + j for i, j in self._terms)

    @property
    def is_zero(self) -> bool:
        return not self._terms

    @property
    def coeff_scale(self) -> float:
        return max((abs(c) for c in self._terms.values()), default=0.0)

    def coeff(self, i: int, j: int) -> float:
        return self._terms.get((i, j), 0.0)

    def __eq__(self, other) -> bool:
        return isinstance(other, Poly2) and self._terms == other._terms

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash(tuple(self._terms.items()))
        return self._hash

    def __repr__(self) -> str:
        if not self._terms:
            return "Poly2(0)"
        parts = []
        for (i, j), c in sorted(self._terms.items(), key=lambda kv: (-(kv[0][0] + kv[0][1]), kv[0])):
            mono = "*".join(p for p in (_pow("x", i), _pow("y", j)) if p)
            parts.append(f"{c:+.6g}" + (f"*{mono}" if mono else ""))
        return "Poly2(" + " ".join(parts) + ")"

    # dense / kernel handles
    @property
    def dense(self) -> np.ndarray:
        if self._dense is None:
            di = max((i for i, _ in self._terms), default=0)
            dj = max((j for _, j in self._terms), default=0)
            C = np.zeros((di + 1, dj + 1))
            for (i, j), c in self._terms.items():
                C[i, j] = c
            C.setflags(write=False)
            self._dense = C
        return self._dense

    @property
    def handle(self):
        if self._handle is None:
            self._handle = kernels.prepare(self.dense)
        return self._handle

    # arithmetic
    def _coerce(self, other) -> "Poly2":
        if isinstance(other, Poly2):
            return other
        return Poly2.const(float(other))

    def __add__(self, other) -> "Poly2":
        o = self._coerce(other)
        t = dict(self._terms)
        for k, v in o._terms.items():
            t[k] = t.get(k, 0.0) + v
        return Poly2(t)

    __radd__ = __add__

    def __neg__(self) -> "Poly2":
        return Poly2({k: -v for k, v in self._terms.items()})

    def __sub__(self, other) -> "Poly2":
        return self + (-self._coerce(other))

    def __rsub__(self, other) -> "Poly2":
        return self._coerce(other) - self

    def __mul__(self, other) -> "Poly2":
        if not isinstance(other, Poly2):
            c = float(other)
            return Poly2({k: v * c for k, v in self._terms.items()})
        t: dict[tuple[int, int], float] = {}
        for (i1, j1), c1 in self._terms.items():
            for (i2, j2), c2 in other._terms.items():
                k = (i1 + i2, j1 + j2)
                t[k] = t.get(k, 0.0) + c1 * c2
        return Poly2(t)

    __rmul__ = __mul__

    def __truediv__(self, other) -> "Poly2":
        if isinstance(other, Poly2):
            return NotImplemented
        c = float(other)
        if c == 0.0:
            raise ZeroDivisionError("division of a polynomial by zero")
        return Poly2({k: v / c for k, v in self._terms.items()})

    def __pow__(self, n: int) -> "Poly2":
        if n < 0:
            raise ValueError("negative power")
        out = Poly2.const(1.0)
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    def compose(self, px: "Poly2", py: "Poly2") -> "Poly2":
        """Substitute x -> px(x, y), y -> py(x, y)."""
        C = self.dense
        acc = Poly2()
        for i in range(C.shape[0] - 1, -1, -1):
            row = Poly2()
            for j in range(C.shape[1] - 1, -1, -1):
                row = row * py + C[i, j]
            acc = acc * px + row
        return acc

    def affine(self, ax: float, bx: float, ay: float, by: float) -> "Poly2":
        """p(ax*x + bx, ay*y + by)."""
        return self.compose(Poly2({(1, 0): ax, (0, 0): bx}), Poly2({(0, 1): ay, (0, 0): by}))

    # evaluation
    def __call__(self, x: float, y: float) -> float:
        return kernels.eval2(self.handle, float(x), float(y))

    def evaluate(self, xs, ys) -> np.ndarray:
        return kernels.eval2_points(self.dense, xs, ys)

    def diff(self, axis: int, order: int = 1) -> "Poly2":
        key = ("d", axis, order)
        hit = self._cache.get(key)
        if hit is not None:
            return hit
        if order < 1:
            raise ValueError("order must be >= 1")
        t = {}
        for (i, j), c in self._terms.items():
            e = i if axis == 0 else j
            if e < order:
                continue
            f = float(math.prod(range(e - order + 1, e + 1)))
            k = (i - order, j) if axis == 0 else (i, j - order)
            t[k] = c * f
        out = Poly2(t)
        self._cache[key] = out
        return out

    @property
    def dx(self) -> "Poly2":
        return self.diff(0)

    @property
    def dy(self) -> "Poly2":
        return self.diff(1)

    def gradient(self, x: float, y: float) -> np.ndarray:
        return np.array([self.dx(x, y), self.dy(x, y)])

    def hessian(self, x: float, y: float) -> np.ndarray:
        fxy = self.dx.dy(x, y)
        return np.array([[self.dx.dx(x, y), fxy], [fxy, self.dy.dy(x, y)]])

    def enclose(self, xlo: float, xhi: float, ylo: float, yhi: float) -> tuple[float, float]:
        """Rigorous (rounding-aware) range enclosure over the box."""
        if not self._terms:
            return 0.0, 0.0
        return kernels.enclose2(self.handle, xlo, xhi, ylo, yhi)

    def enclose_centered(self, xlo: float, xhi: float, ylo: float, yhi: float) -> tuple[float, float]:
        """Enclosure from the Taylor expansion at the box centre. Much tighter
        than Horner on small boxes away from the origin."""
        C = self.dense
        mx, my = 0.5 * (xlo + xhi), 0.5 * (ylo + yhi)
        hx, hy = 0.5 * (xhi - xlo), 0.5 * (yhi - ylo)
        Sx, Ax = _shift_matrix(C.shape[0], mx)
        Sy, Ay = _shift_matrix(C.shape[1], my)
        Q = Sx @ C @ Sy.T
        mag = Ax @ np.abs(C) @ Ay.T
        px = hx ** np.arange(C.shape[0])
        py = hy ** np.arange(C.shape[1])
        W = np.abs(Q) * np.outer(px, py)
        rad = float(W.sum() - W[0, 0])
        err = 4.0 * (C.shape[0] + C.shape[1] + 2) * _EPS * float((mag * np.outer(px, py)).sum())
        return float(Q[0, 0]) - rad - err, float(Q[0, 0]) + rad + err

    def enclose_tight(self, xlo: float, xhi: float, ylo: float, yhi: float) -> tuple[float, float]:
        a, b = self.enclose(xlo, xhi, ylo, yhi)
        c, d = self.enclose_centered(xlo, xhi, ylo, yhi)
        return max(a, c), min(b, d)

    def cached(self, key, build):
        """Memoize a derived object on this (immutable) polynomial."""
        hit = self._cache.get(key)
        if hit is None:
            hit = build()
            self._cache[key] = hit
        return hit

    # serialization
    def to_json(self) -> dict:
        return {"monomials": [[i, j, c] for (i, j), c in self._terms.items()]}

    @classmethod
    def from_json(cls, obj) -> "Poly2":
        mons = obj["monomials"] if isinstance(obj, dict) else obj
        for m in mons:
            if len(m) != 3 or int(m[0]) != m[0] or int(m[1]) != m[1] or m[0] < 0 or m[1] < 0:
                raise ValueError(f"bad monomial {m!r}")
        return cls([(int(m[0]), int(m[1]), float(m[2])) for m in mons])


@functools.lru_cache(maxsize=64)
def _binom_upper(n: int) -> tuple[np.ndarray, np.ndarray]:
    """comb(j, i) for i <= j < n, and the exponent j - i (zero below)."""
    B = np.zeros((n, n))
    for j in range(n):
        for i in range(j + 1):
            B[i, j] = math.comb(j, i)
    k = np.arange(n)
    E = np.maximum(k[None, :] - k[:, None], 0)
    return B, E


def _shift_matrix(n: int, m: float) -> tuple[np.ndarray, np.ndarray]:
    """S with S @ c = coefficients of p(m + t) in t, and its absolute version."""
    B, E = _binom_upper(n)
    P = float(m) ** E
    return B * P, B * np.abs(P)


def _pow(v: str, e: int) -> str:
    if e == 0:
        return ""
    return v if e == 1 else f"{v}^{e}"


class Poly1:
    """Univariate polynomial in the shifted variable ``s = (t - center) / half``.

    ``coeffs[k]`` multiplies ``s**k``; the defaults give the plain monomial
    basis in ``t``. Expanding about the middle of the interval of interest
    keeps the coefficients of high-degree restrictions well conditioned.
    """

    __slots__ = ("coeffs", "scale", "center", "half")

    def __init__(self, coeffs: Iterable[float], scale: float | None = None,
                 center: float = 0.0, half: float = 1.0):
        c = np.trim_zeros(np.asarray(list(coeffs), dtype=float), "b")
        self.coeffs = c
        # magnitude of the data this polynomial was derived from; used to
        # decide when rounding residue means "identically zero"
        self.scale = float(scale) if scale is not None else float(np.max(np.abs(c), initial=0.0))
        if half == 0.0:
            raise ValueError("half must be nonzero")
        self.center = float(center)
        self.half = float(half)

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def __call__(self, t):
        s = (t - self.center) / self.half
        acc = 0.0
        for c in self.coeffs[::-1]:
            acc = acc * s + c
        return acc

    def expanded(self) -> "Poly1":
        """The same polynomial with coefficients in the plain variable t."""
        if self.center == 0.0 and self.half == 1.0:
            return self
        acc = np.zeros(1)
        lin = [-self.center / self.half, 1.0 / self.half]
        for c in self.coeffs[::-1]:
            acc = npoly.polyadd(npoly.polymul(acc, lin), [c])
        return Poly1(acc, self.scale)

    def derivative(self) -> "Poly1":
        if self.degree <= 0:
            return Poly1([], self.scale, self.center, self.half)
        d = self.coeffs[1:] * np.arange(1, len(self.coeffs)) / self.half
        return Poly1(d, self.scale, self.center, self.half)

    def __eq__(self, other) -> bool:
        return (isinstance(other, Poly1) and np.array_equal(self.coeffs, other.coeffs)
                and self.center == other.center and self.half == other.half)

    def __repr__(self) -> str:
        if self.center == 0.0 and self.half == 1.0:
            return f"Poly1({self.coeffs.tolist()})"
        return f"Poly1({self.coeffs.tolist()}, center={self.center!r}, half={self.half!r})"


@dataclass(frozen=True)
class RootInterval:
    lo: float
    hi: float
    odd: bool

    @property
    def multiplicity_parity(self) -> str:
        return "odd" if self.odd else "even-or-unknown"

    @property
    def mid(self) -> float:
        return 0.5 * (self.lo + self.hi)

    @property
    def width(self) -> float:
        return self.hi - self.lo


def eval_poly(p: Poly2, q) -> float:
    return p(q[0], q[1])


def differentiate(p: Poly2, axis, order: int = 1) -> Poly2:
    return p.diff(_axis_index(axis), order)


def _axis_index(axis) -> int:
    if axis in (0, 1):
        return int(axis)
    a = str(axis).lower()
    if a == "x":
        return 0
    if a == "y":
        return 1
    raise ValueError(f"unknown axis {axis!r}")


def restrict_to_segment(p: Poly2, a, b) -> Poly1:
    """The univariate polynomial t -> p((1-t) a + t b).

    The expansion is about the midpoint, in ``s = 2t - 1``.
    """
    ax, ay = float(a[0]), float(a[1])
    bx, by = float(b[0]), float(b[1])
    if ax == bx and ay == by:
        raise DegeneratePoints("segment endpoints coincide")
    if p.is_zero:
        return Poly1([], 0.0, 0.5, 0.5)
    mx, my = 0.5 * (ax + bx), 0.5 * (ay + by)
    hx, hy = 0.5 * (bx - ax), 0.5 * (by - ay)
    C = p.dense
    # Horner over powers of x then y with univariate polynomial arithmetic
    lx = np.array([mx, hx])
    ly = np.array([my, hy])
    acc = np.zeros(1)
    for i in range(C.shape[0] - 1, -1, -1):
        row = np.zeros(1)
        for j in range(C.shape[1] - 1, -1, -1):
            row = npoly.polyadd(npoly.polymul(row, ly), [C[i, j]])
        acc = npoly.polyadd(npoly.polymul(acc, lx), row)
    m = max(abs(mx), abs(my)) + max(abs(hx), abs(hy)) + 1.0
    scale = sum(abs(c) * m ** (i + j) for (i, j), c in p)
    return Poly1(acc, scale, 0.5, 0.5)


def _bernstein_horner(c: np.ndarray, l0: float, l1: float) -> np.ndarray:
    """Bernstein coefficients on [0, 1] of u -> sum c_k l(u)^k, where l is
    the affine map with l(0) = l0 and l(1) = l1. Every step is a convex
    combination, so no cancellation is introduced."""
    acc = np.array([c[-1]], dtype=float)
    for ck in c[-2::-1]:
        d = len(acc) - 1
        k = np.arange(d + 2)
        new = np.zeros(d + 2)
        new[: d + 1] += (d + 1 - k[: d + 1]) / (d + 1) * acc * l0
        new[1:] += k[1:] / (d + 1) * acc * l1
        acc = new + ck
    return acc


def _de_casteljau(b: np.ndarray, s: float):
    n = len(b) - 1
    left = np.empty(n + 1)
    right = np.empty(n + 1)
    w = b.copy()
    left[0] = w[0]
    right[n] = w[n]
    for r in range(1, n + 1):
        w[: n - r + 1] = (1.0 - s) * w[: n - r + 1] + s * w[1: n - r + 2]
        left[r] = w[0]
        right[n - r] = w[n - r]
    return left, right


def _variations(b: np.ndarray, thr: float) -> tuple[int, bool]:
    """Sign variations among coefficients above the noise floor, plus a flag
    telling whether any coefficient was indistinguishable from zero."""
    fuzzy = bool(np.any(np.abs(b) <= thr))
    s = np.sign(b[np.abs(b) > thr])
    if len(s) == 0:
        return 0, True
    return int(np.count_nonzero(s[1:] != s[:-1])), fuzzy


def isolate_univariate_roots(p: Poly1, lo: float, hi: float, tol: float,
                             max_nodes: int = 200000) -> list[RootInterval]:
    """Isolate every real root of ``p`` in ``[lo, hi]``.

    Bernstein-basis bisection: an interval whose Bernstein coefficients show
    no sign change is discarded, exactly one change certifies a single simple
    root (then refined by sign bisection). Leaves narrower than ``tol`` that
    are still undecided are clusters; neighbouring clusters merge, and a
    cluster whose end values share a sign is reported with even-or-unknown
    parity (a tangency).
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    if not lo < hi:
        raise ValueError("empty interval")
    c = p.coeffs
    if len(c) == 0 or np.all(np.abs(c) <= ZERO_SCALE * max(p.scale, 1e-300)):
        raise IdenticallyZero("polynomial vanishes identically on the interval")
    if p.degree == 0:
        return []

    # a sliver of margin so roots sitting exactly on lo/hi are interior
    pad = 1e-12 * (hi - lo)
    a0, a1 = lo - pad, hi + pad
    w = a1 - a0
    # ends of [a0, a1] in the polynomial's own variable
    l0, l1 = (a0 - p.center) / p.half, (a1 - p.center) / p.half
    m = max(abs(l0), abs(l1))
    mag = float(sum(abs(ck) * m ** k for k, ck in enumerate(c)))
    n = p.degree
    thr = 16.0 * (n + 1) ** 2 * _EPS * mag

    def val(t: float) -> float:
        return p(t)

    b0 = _bernstein_horner(c, l0, l1)
    stack = [(0.0, 1.0, b0)]
    simple: list[tuple[float, float]] = []
    clusters: list[tuple[float, float]] = []
    utol = tol / w
    nodes = 0
    while stack:
        nodes += 1
        if nodes > max_nodes:
            raise ToleranceTooCoarse("root isolation node budget exhausted")
        u0, u1, b = stack.pop()
        if np.all(b > thr) or np.all(b < -thr):
            continue
        v, fuzzy = _variations(b, thr)
        x0, x1 = a0 + u0 * w, a0 + u1 * w
        if np.all(np.abs(b) <= thr):
            # below the rounding floor everywhere: a tangency cluster
            clusters.append((x0, x1))
            continue
        if v == 0 and not fuzzy:
            continue
        if v == 1 and not fuzzy:
            f0, f1 = val(x0), val(x1)
            if f0 * f1 < 0:
                simple.append((x0, x1))
                continue
        if u1 - u0 <= utol:
            # Bernstein hull still straddles zero at this width
            if np.min(b) <= thr and np.max(b) >= -thr:
                clusters.append((x0, x1))
            continue
        s = _split_point(b, thr)
        left, right = _de_casteljau(b, s)
        um = u0 + s * (u1 - u0)
        # right pushed first so the left half is processed first
        stack.append((um, u1, right))
        stack.append((u0, um, left))

    out: list[RootInterval] = []
    for x0, x1 in simple:
        out.append(_refine_simple(val, x0, x1, tol))
    out.extend(_merge_clusters(val, clusters, thr, tol))
    out.sort(key=lambda r: r.lo)
    return [r for r in out if r.hi >= lo and r.lo <= hi]


def _split_point(b: np.ndarray, thr: float) -> float:
    """Split near the middle, avoiding points where the polynomial is at the
    noise floor so exact roots do not land on subdivision boundaries."""
    for s in (0.5, 0.4921875, 0.5078125, 0.46875, 0.53125):
        left, _ = _de_casteljau(b, s)
        if abs(left[-1]) > 64.0 * thr:
            return s
    return 0.5


def _refine_simple(val, x0: float, x1: float, tol: float) -> RootInterval:
    f0, f1 = val(x0), val(x1)
    while x1 - x0 > tol:
        xm = 0.5 * (x0 + x1)
        if xm <= x0 or xm >= x1:
            break
        fm = val(xm)
        if fm == 0.0:
            d = 0.25 * tol
            l, r = xm - d, xm + d
            fl, fr = val(l), val(r)
            if fl * fr < 0 and l > x0 and r < x1:
                return RootInterval(l, r, True)
            break
        if (fm < 0) == (f0 < 0):
            x0, f0 = xm, fm
        else:
            x1, f1 = xm, fm
    return RootInterval(x0, x1, True)


def _merge_clusters(val, clusters, thr, tol) -> list[RootInterval]:
    if not clusters:
        return []
    clusters.sort()
    groups = [[clusters[0][0], clusters[0][1]]]
    for x0, x1 in clusters[1:]:
        if x0 <= groups[-1][1] * (1 + 4 * _EPS) + 4 * _EPS:
            groups[-1][1] = max(groups[-1][1], x1)
        else:
            groups.append([x0, x1])
    out = []
    for x0, x1 in groups:
        f0, f1 = val(x0), val(x1)
        if f0 * f1 < 0:
            out.append(RootInterval(x0, x1, True))
        else:
            xm = 0.5 * (x0 + x1)
            if abs(val(xm)) <= thr or min(abs(f0), abs(f1)) <= thr:
                out.append(RootInterval(x0, x1, False))
    return out


def roots_on_segment(p: Poly2, a, b, tol: float = 1e-12) -> list[RootInterval]:
    """Roots of p along the segment a->b, as intervals of the parameter t."""
    return isolate_univariate_roots(restrict_to_segment(p, a, b), 0.0, 1.0, tol)
