"""Geometry of a single non-singular curve f = 0.

Curvature uses the implicit form with tangent (-f_y, f_x):

    kappa = N / |grad f|^3,   N = f_y^2 f_xx - 2 f_x f_y f_xy + f_x^2 f_yy.

Along the curve d(kappa)/ds = M / G^3 with G = f_x^2 + f_y^2 and

    M = (G grad N - 1.5 N grad G) . (-f_y, f_x),

so inflections are the points of {f = 0, N = 0} where N changes sign and
curvature vertices are the points of {f = 0, M = 0}. Both are polynomial
systems solved by ``systems.solve_system``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import cKDTree

from . import kernels
from .errors import (BudgetExceeded, Diverged, IdenticallyZero, SignUndetermined, SingularCluster,
                     SingularJacobian, SingularPoint, TraceStalled)
from .polynomials import Box, Poly2, roots_on_segment
from .systems import CertifiedPoint, PolyN, polish_newton, solve_system

AXES = ("X", "Y")


def axis_name(axis) -> str:
    if axis in (0, "x", "X"):
        return "X"
    if axis in (1, "y", "Y"):
        return "Y"
    raise ValueError(f"bad axis {axis!r}")


# ---------------------------------------------------------------- data types

@dataclass(frozen=True)
class CharPoint:
    kind: str  # Crossing | Pole | Inflection | BitangentContact | CurvatureVertex
    location: tuple
    curves: tuple
    radius: float = 0.0
    residual: float = 0.0
    axis: str | None = None  # poles only
    isolated: bool = True

    @property
    def x(self) -> float:
        return self.location[0]

    @property
    def y(self) -> float:
        return self.location[1]

    def coord(self, axis) -> float:
        return self.location[0 if axis_name(axis) == "X" else 1]

    @property
    def label(self) -> str:
        return f"Pole({self.axis})" if self.kind == "Pole" else self.kind

    def to_json(self) -> dict:
        out = {"kind": self.label, "location": list(self.location), "curves": list(self.curves),
               "radius": self.radius, "residual": self.residual}
        if not self.isolated:
            out["isolated"] = False
        return out


@dataclass(frozen=True)
class TangentLine:
    base: tuple
    direction: tuple
    implicit: tuple  # (a, b, c), a x + b y + c = 0, a^2 + b^2 = 1

    def distance(self, p) -> float:
        a, b, c = self.implicit
        return a * p[0] + b * p[1] + c


@dataclass(frozen=True)
class Bitangent:
    line: TangentLine
    contacts: tuple  # (p, q)
    residuals: tuple = ()


@dataclass
class Polyline:
    points: np.ndarray
    closed: bool

    @property
    def arclength(self) -> np.ndarray:
        pts = self.points
        if self.closed:
            pts = np.vstack([pts, pts[:1]])
        d = np.hypot(*np.diff(pts, axis=0).T)
        return np.concatenate([[0.0], np.cumsum(d)])

    @property
    def length(self) -> float:
        return float(self.arclength[-1])

    def segments(self) -> tuple[np.ndarray, np.ndarray]:
        a = self.points
        b = np.roll(a, -1, axis=0) if self.closed else a[1:]
        return (a if self.closed else a[:-1]), b


@dataclass
class Curve:
    poly: Poly2
    box: Box
    components: list
    step: float
    tol: float
    index: int = 0
    _tree: object = field(default=None, repr=False)

    @property
    def closed_flags(self) -> list[bool]:
        return [c.closed for c in self.components]

    def all_points(self) -> np.ndarray:
        if not self.components:
            return np.zeros((0, 2))
        return np.vstack([c.points for c in self.components])

    def distance_to(self, p) -> float:
        """Distance from p to the traced polylines."""
        best = math.inf
        p = np.asarray(p, dtype=float)
        for c in self.components:
            a, b = c.segments()
            if len(a) == 0:
                best = min(best, float(np.min(np.hypot(*(c.points - p).T))))
                continue
            best = min(best, float(np.min(_seg_dist(p, a, b))))
        return best


def _seg_dist(p, a, b) -> np.ndarray:
    ab = b - a
    L2 = np.einsum("ij,ij->i", ab, ab)
    t = np.where(L2 > 0, np.einsum("ij,ij->i", p - a, ab) / np.where(L2 > 0, L2, 1.0), 0.0)
    t = np.clip(t, 0.0, 1.0)
    q = a + t[:, None] * ab
    return np.hypot(*(q - p).T)


# ---------------------------------------------------------------- derived polynomials

def curvature_numerator(f: Poly2) -> Poly2:
    def build():
        fx, fy = f.dx, f.dy
        return fy * fy * fx.dx - 2.0 * fx * fy * fx.dy + fx * fx * fy.dy
    return f.cached("N", build)


def gradient_norm2(f: Poly2) -> Poly2:
    return f.cached("G", lambda: f.dx * f.dx + f.dy * f.dy)


def curvature_derivative_numerator(f: Poly2) -> Poly2:
    def build():
        N = curvature_numerator(f)
        G = gradient_norm2(f)
        ax = G * N.dx - 1.5 * N * G.dx
        ay = G * N.dy - 1.5 * N * G.dy
        return ay * f.dx - ax * f.dy
    return f.cached("M", build)


def default_tol(f: Poly2) -> float:
    return 1e-12 * max(1.0, f.coeff_scale)


def _box_lohi(box: Box):
    return [box.x_lo, box.y_lo], [box.x_hi, box.y_hi]


# ---------------------------------------------------------------- non-singularity

@dataclass(frozen=True)
class Verdict:
    status: str  # NonSingular | SingularAt | EmptyZeroSet
    points: tuple = ()

    def __bool__(self) -> bool:
        return self.status == "NonSingular"


def check_nonsingular(f: Poly2, box: Box, tol: float = 1e-9, max_nodes: int = 200000) -> Verdict:
    """Decide whether f has a singular zero in the box.

    Boxes are discarded when the interval enclosure of f, f_x or f_y excludes
    zero; boxes surviving down to ``tol`` relative width host singular points.
    """
    if f.is_zero:
        raise IdenticallyZero("zero polynomial defines no curve")
    fx, fy = f.dx, f.dy
    minw = tol * box.size
    stack = [(box.x_lo, box.x_hi, box.y_lo, box.y_hi)]
    hits = []
    touched = False
    nodes = 0
    while stack:
        x0, x1, y0, y1 = stack.pop()
        nodes += 1
        if nodes > max_nodes:
            raise BudgetExceeded("non-singularity check exhausted its budget", nodes=nodes)
        lo, hi = f.enclose_tight(x0, x1, y0, y1)
        if lo > 0 or hi < 0:
            continue
        touched = True
        a, b = fx.enclose_tight(x0, x1, y0, y1)
        c, d = fy.enclose_tight(x0, x1, y0, y1)
        if a > 0 or b < 0 or c > 0 or d < 0:
            continue
        if max(x1 - x0, y1 - y0) < minw:
            hits.append((0.5 * (x0 + x1), 0.5 * (y0 + y1)))
            continue
        if x1 - x0 >= y1 - y0:
            m = x0 + 0.4990234375 * (x1 - x0)
            stack += [(m, x1, y0, y1), (x0, m, y0, y1)]
        else:
            m = y0 + 0.4990234375 * (y1 - y0)
            stack += [(x0, x1, m, y1), (x0, x1, y0, m)]
    if hits:
        pts = [_polish_singular(f, p, 1e3 * minw) for p in _cluster(np.array(hits), 1e3 * minw)]
        return Verdict("SingularAt", tuple(tuple(float(v) for v in p) for p in pts))
    if not touched or not _has_zero(f, box):
        return Verdict("EmptyZeroSet")
    return Verdict("NonSingular")


def _polish_singular(f: Poly2, p, radius: float):
    # nodes have a regular Hessian, so Newton on the gradient converges; cusps keep the cluster centre
    try:
        q = polish_newton([f.dx, f.dy], p).as_array()
    except (Diverged, SingularJacobian):
        return p
    return q if np.max(np.abs(q - p)) <= radius else p


def _cluster(pts: np.ndarray, radius: float) -> list[np.ndarray]:
    groups: list[list[np.ndarray]] = []
    for p in pts:
        for g in groups:
            if np.max(np.abs(g[0] - p)) <= radius:
                g.append(p)
                break
        else:
            groups.append([p])
    return [np.mean(g, axis=0) for g in groups]


def _has_zero(f: Poly2, box: Box) -> bool:
    """True when f changes sign in the box (non-singular zeros always do)."""
    xs = np.linspace(box.x_lo, box.x_hi, 129)
    ys = np.linspace(box.y_lo, box.y_hi, 129)
    v = f.evaluate(xs[:, None], ys[None, :])
    if v.min() <= 0 <= v.max():
        return True
    # a small oval missed by the grid still has an X-pole, a critical point of x on f=0
    lo, hi = _box_lohi(box)
    try:
        sols = solve_system([f, f.dy], lo, hi, 1e-12, clusters="collect")
    except BudgetExceeded:
        return True
    return bool(sols)


# ---------------------------------------------------------------- tangent and curvature

def tangent_at(f: Poly2, p, tol: float | None = None) -> TangentLine:
    gx, gy = f.dx(p[0], p[1]), f.dy(p[0], p[1])
    g = math.hypot(gx, gy)
    if g == 0.0 or g <= 1e-14 * max(1.0, f.coeff_scale):
        raise SingularPoint("gradient vanishes", at=list(p))
    tol = default_tol(f) if tol is None else tol
    if abs(f(p[0], p[1])) > 1e3 * tol * max(1.0, g):
        raise SingularPoint("point is not on the curve", at=list(p), value=f(p[0], p[1]))
    a, b = gx / g, gy / g
    c = -(a * p[0] + b * p[1])
    return TangentLine((float(p[0]), float(p[1])), (-b, a), (a, b, c))


def curvature_at(f: Poly2, p) -> float:
    x, y = p[0], p[1]
    G = gradient_norm2(f)(x, y)
    if not G > 0.0:
        raise SingularPoint("gradient vanishes", at=[x, y])
    return curvature_numerator(f)(x, y) / G ** 1.5


def curvature_points(f: Poly2, pts: np.ndarray) -> np.ndarray:
    N = curvature_numerator(f).evaluate(pts[:, 0], pts[:, 1])
    G = gradient_norm2(f).evaluate(pts[:, 0], pts[:, 1])
    return N / G ** 1.5


def unit_tangent(f: Poly2, p) -> np.ndarray:
    gx, gy = f.dx(p[0], p[1]), f.dy(p[0], p[1])
    g = math.hypot(gx, gy)
    if g == 0.0:
        raise SingularPoint("gradient vanishes", at=list(p))
    return np.array([-gy / g, gx / g])


def move_along(f: Poly2, p, ds: float, tol: float | None = None) -> np.ndarray:
    """Approximate the curve point at signed arc-length offset ds from p."""
    tol = default_tol(f) if tol is None else tol
    hf, hx, hy = f.handle, f.dx.handle, f.dy.handle
    q = np.array(p, dtype=float)
    n = max(1, int(math.ceil(abs(ds) / 1e-3)))
    h = ds / n
    for _ in range(n):
        t = unit_tangent(f, q)
        x, y, _ok = kernels.project(hf, hx, hy, q[0] + h * t[0], q[1] + h * t[1], tol, 30)
        q = np.array([x, y])
    return q


# ---------------------------------------------------------------- tracing

def default_step(box: Box) -> float:
    return box.size / 400.0


def trace_curve(f: Poly2, box: Box, step: float | None = None, tol: float | None = None,
                index: int = 0) -> Curve:
    """Trace every branch of f = 0 meeting the box into polylines.

    Seeds are the curve's axis poles (every closed oval has them) plus the
    roots of f on the four box edges (every open branch has them), plus a
    coarse grid of sign changes as a safety net.
    """
    step = default_step(box) if step is None else float(step)
    tol = default_tol(f) if tol is None else float(tol)
    key = ("trace", box, step, tol)
    hit = f._cache.get(key)
    if hit is not None:
        return Curve(f, box, hit.components, step, tol, index)
    curve = _trace(f, box, step, tol)
    f._cache[key] = curve
    return Curve(f, box, curve.components, step, tol, index)


def _trace(f: Poly2, box: Box, step: float, tol: float) -> Curve:
    seeds = _trace_seeds(f, box, step, tol)
    comps: list[Polyline] = []
    covered_pts: list[np.ndarray] = []
    tree = None
    for s in seeds:
        if tree is not None:
            d, _ = tree.query(s, k=1)
            if d < 2.0 * step and _near_polylines(s, comps, 0.02 * step + 1e3 * tol):
                continue
        comp = _trace_component(f, s, box, step, tol)
        comps.append(comp)
        covered_pts.append(comp.points)
        tree = cKDTree(np.vstack(covered_pts))
    comps.sort(key=lambda c: tuple(c.points[np.lexsort(c.points.T[::-1])[0]]))
    return Curve(f, box, comps, step, tol)


def _near_polylines(p, comps, thr) -> bool:
    for c in comps:
        a, b = c.segments()
        if len(a) and float(np.min(_seg_dist(p, a, b))) < thr:
            return True
    return False


def _trace_seeds(f: Poly2, box: Box, step: float, tol: float) -> list[np.ndarray]:
    seeds = []
    lo, hi = _box_lohi(box)
    for d in (f.dy, f.dx):
        if d.is_zero:
            continue
        try:
            for cp in solve_system([f, d], lo, hi, 1e-12, clusters="collect"):
                seeds.append(np.array(cp.location))
        except BudgetExceeded:
            pass
    corners = [(box.x_lo, box.y_lo), (box.x_hi, box.y_lo), (box.x_hi, box.y_hi), (box.x_lo, box.y_hi)]
    for k in range(4):
        a, b = np.array(corners[k]), np.array(corners[(k + 1) % 4])
        try:
            ris = roots_on_segment(f, a, b, 1e-13)
        except IdenticallyZero:
            raise SingularPoint("curve contains a box edge", edge=[a.tolist(), b.tolist()])
        for ri in ris:
            seeds.append(a + ri.mid * (b - a))
    # safety net: grid sign changes, projected
    n = 65
    xs = np.linspace(box.x_lo, box.x_hi, n)
    ys = np.linspace(box.y_lo, box.y_hi, n)
    v = np.sign(f.evaluate(xs[:, None], ys[None, :]))
    hf, hx, hy = f.handle, f.dx.handle, f.dy.handle
    ch = (v[:-1, :] != v[1:, :])
    for i, j in zip(*np.nonzero(ch)):
        x, y, ok = kernels.project(hf, hx, hy, 0.5 * (xs[i] + xs[i + 1]), ys[j], tol, 50)
        if ok and box.contains((x, y)):
            seeds.append(np.array([x, y]))
    return seeds


def _trace_component(f: Poly2, seed, box: Box, step: float, tol: float) -> Polyline:
    fwd, closed = _march(f, seed, +1.0, box, step, tol, True)
    if closed:
        return Polyline(np.array(fwd), True)
    bwd, _ = _march(f, seed, -1.0, box, step, tol, False)
    pts = list(reversed(bwd[1:])) + fwd
    return Polyline(np.array(pts), False)


def _march(f: Poly2, p0, sign: float, box: Box, step: float, tol: float, detect_loop: bool):
    hf, hx, hy = f.handle, f.dx.handle, f.dy.handle
    p = np.array(p0, dtype=float)
    start = p.copy()
    pts = [p.copy()]
    t_prev = sign * unit_tangent(f, p)
    h = step
    hmin = 1e-7 * step
    travelled = 0.0
    cos_max = math.cos(0.25)
    limit = int(1e6)
    while True:
        if len(pts) > limit:
            raise TraceStalled("trace did not terminate", at=p.tolist())
        qx, qy = p + h * t_prev
        x, y, ok = kernels.project(hf, hx, hy, qx, qy, tol, 30)
        new = np.array([x, y])
        d = float(np.hypot(*(new - p)))
        good = ok and 0.3 * h < d < 1.5 * h
        if good:
            try:
                t_new = sign * unit_tangent(f, new)
            except SingularPoint:
                good = False
        if not good or float(t_new @ t_prev) < cos_max:
            h *= 0.5
            if h < hmin:
                raise TraceStalled("step underflow while tracing", at=p.tolist())
            continue
        if not box.contains(new):
            pts.append(_box_exit(f, p, new, box, tol))
            return pts, False
        if detect_loop and travelled > 2.0 * step:
            if float(_seg_dist(start, p[None, :], new[None, :])[0]) < 0.1 * h:
                return pts, True
        pts.append(new)
        travelled += d
        p, t_prev = new, t_new
        h = min(step, 1.5 * h)


def _box_exit(f: Poly2, p_in, p_out, box: Box, tol: float) -> np.ndarray:
    hf, hx, hy = f.handle, f.dx.handle, f.dy.handle
    a, b = 0.0, 1.0
    best = np.array(p_in)
    for _ in range(60):
        m = 0.5 * (a + b)
        q = p_in + m * (p_out - p_in)
        x, y, _ok = kernels.project(hf, hx, hy, q[0], q[1], tol, 30)
        if box.contains((x, y)):
            a, best = m, np.array([x, y])
        else:
            b = m
    return np.array([min(max(best[0], box.x_lo), box.x_hi), min(max(best[1], box.y_lo), box.y_hi)])


# ---------------------------------------------------------------- characteristic points

def _solve_on_curve(f: Poly2, g: Poly2, box: Box, tol: float) -> list[CertifiedPoint]:
    lo, hi = _box_lohi(box)
    key = ("solve", g, box, tol)
    return f.cached(key, lambda: solve_system([f, g], lo, hi, tol, clusters="collect"))


def find_poles(curve: Curve, axis, box: Box | None = None, tol: float = 1e-12) -> list[CharPoint]:
    """Points where the projection onto ``axis`` restricted to the curve is
    singular: f = f_y = 0 for axis X, f = f_x = 0 for axis Y."""
    ax = axis_name(axis)
    f = curve.poly
    box = curve.box if box is None else box
    d = f.dy if ax == "X" else f.dx
    if d.is_zero:
        return []
    out = []
    for cp in _solve_on_curve(f, d, box, tol):
        out.append(CharPoint("Pole", cp.location, (curve.index,), cp.radius, cp.residual, ax, cp.isolated))
    return out


def _sign_change(f: Poly2, g: Poly2, p, delta: float) -> bool | None:
    """Does g change sign along f = 0 across p? None when undecidable."""
    a = move_along(f, p, -delta)
    b = move_along(f, p, +delta)
    ga, gb = g(a[0], a[1]), g(b[0], b[1])
    noise = 1e-12 * max(1.0, g.coeff_scale) * max(1.0, float(np.max(np.abs(p)))) ** max(g.degree, 0)
    if abs(ga) <= noise or abs(gb) <= noise:
        return None
    return (ga > 0) != (gb > 0)


def _probe_delta(curve: Curve) -> float:
    return max(1e-4 * curve.box.size, 1e-3 * curve.step)


def find_inflections(curve: Curve, box: Box | None = None, tol: float = 1e-12) -> list[CharPoint]:
    f = curve.poly
    box = curve.box if box is None else box
    N = curvature_numerator(f)
    if N.is_zero or N.coeff_scale <= 1e-13 * max(1.0, f.coeff_scale) ** 3:
        return []  # straight line
    out = []
    delta = _probe_delta(curve)
    for cp in _solve_on_curve(f, N, box, tol):
        ch = _sign_change(f, N, cp.location, delta)
        if ch is None:
            raise SignUndetermined("curvature sign undecided near candidate", at=list(cp.location))
        if ch:
            out.append(CharPoint("Inflection", cp.location, (curve.index,), cp.radius, cp.residual,
                                 None, cp.isolated))
    return out


def curvature_is_constant(curve: Curve, tol: float = 1e-9) -> bool:
    pts = curve.all_points()
    if len(pts) == 0:
        return True
    k = curvature_points(curve.poly, pts)
    return float(np.max(k) - np.min(k)) <= tol * (1.0 + float(np.max(np.abs(k))))


def find_curvature_vertices(curve: Curve, box: Box | None = None, tol: float = 1e-12) -> list[CharPoint]:
    """Isolated critical points of curvature along the curve."""
    f = curve.poly
    box = curve.box if box is None else box
    if curvature_is_constant(curve):
        return []
    M = curvature_derivative_numerator(f)
    if M.is_zero:
        return []
    out = []
    for cp in _solve_on_curve(f, M, box, tol):
        out.append(CharPoint("CurvatureVertex", cp.location, (curve.index,), cp.radius, cp.residual,
                             None, cp.isolated))
    return out


# ---------------------------------------------------------------- bitangents

def _bitangent_system(f: Poly2) -> list[PolyN]:
    def build():
        fp = PolyN.lift(f, 4, 0, 1)
        fq = PolyN.lift(f, 4, 2, 3)
        dx = PolyN.var(4, 2) - PolyN.var(4, 0)
        dy = PolyN.var(4, 3) - PolyN.var(4, 1)
        g1 = PolyN.lift(f.dx, 4, 0, 1) * dx + PolyN.lift(f.dy, 4, 0, 1) * dy
        g2 = PolyN.lift(f.dx, 4, 2, 3) * dx + PolyN.lift(f.dy, 4, 2, 3) * dy
        return [fp, fq, g1, g2]
    return f.cached("bitangent_system", build)


def _resample(curve: Curve, n_max: int = 1500) -> tuple[np.ndarray, np.ndarray]:
    """Vertices (subsampled) with their component arc-length coordinates."""
    pts, arcs = [], []
    total = sum(c.length for c in curve.components) or 1.0
    offset = 0.0
    for c in curve.components:
        s = c.arclength[: len(c.points)]
        k = max(8, int(n_max * c.length / total))
        idx = np.unique(np.linspace(0, len(c.points) - 1, min(k, len(c.points))).astype(int))
        pts.append(c.points[idx])
        arcs.append(s[idx] + offset)
        offset += c.length + 1e6
    return np.vstack(pts), np.concatenate(arcs)


def find_bitangents(curve: Curve, box: Box | None = None, tol: float = 1e-10) -> list[Bitangent]:
    f = curve.poly
    box = curve.box if box is None else box
    if curvature_numerator(f).is_zero or not curve.components:
        return []
    pts, arcs = _resample(curve)
    sep_min = max(10 * tol, 2 * curve.step, 0.02 * box.size)
    G = np.stack([f.dx.evaluate(pts[:, 0], pts[:, 1]), f.dy.evaluate(pts[:, 0], pts[:, 1])], axis=1)
    G /= np.hypot(*G.T)[:, None]
    D = pts[None, :, :] - pts[:, None, :]  # D[i, j] = q_j - p_i
    g1 = np.einsum("ik,ijk->ij", G, D)
    g2 = np.einsum("jk,ijk->ij", G, D)
    far = np.abs(arcs[:, None] - arcs[None, :]) > sep_min
    s1, s2 = np.sign(g1), np.sign(g2)

    def cell_change(s):
        a, b, c, d = s[:-1, :-1], s[1:, :-1], s[:-1, 1:], s[1:, 1:]
        return ~((a == b) & (b == c) & (c == d))

    cand = cell_change(s1) & cell_change(s2) & far[:-1, :-1] & far[1:, 1:]
    cand &= np.triu(np.ones_like(cand, dtype=bool), 1)
    seeds = [np.concatenate([0.5 * (pts[i] + pts[i + 1]), 0.5 * (pts[j] + pts[j + 1])])
             for i, j in zip(*np.nonzero(cand))]
    if not seeds:
        return []
    eqs = _bitangent_system(f)
    lo = [box.x_lo, box.y_lo, box.x_lo, box.y_lo]
    hi = [box.x_hi, box.y_hi, box.x_hi, box.y_hi]
    sols = solve_system(eqs, lo, hi, tol, seeds=seeds)
    out: dict[tuple, Bitangent] = {}
    scale = 1.0 + f.coeff_scale
    for cp in sols:
        p, q = np.array(cp.location[:2]), np.array(cp.location[2:])
        if float(np.hypot(*(q - p))) < sep_min:
            continue
        if tuple(q) < tuple(p):
            p, q = q, p
        res = tuple(abs(e(np.concatenate([p, q]))) for e in eqs)
        if max(res) > tol * scale * 10:
            continue
        key = tuple(np.round(np.concatenate([p, q]) / (1e-7 * box.size)).astype(int))
        if key in out:
            continue
        d = (q - p) / float(np.hypot(*(q - p)))
        a, b = -d[1], d[0]
        line = TangentLine(tuple(map(float, p)), (float(d[0]), float(d[1])),
                           (float(a), float(b), float(-(a * p[0] + b * p[1]))))
        out[key] = Bitangent(line, (tuple(map(float, p)), tuple(map(float, q))), res)
    return [out[k] for k in sorted(out)]


def bitangent_contacts(curve: Curve, bitangents: list[Bitangent]) -> list[CharPoint]:
    out = []
    for bt in bitangents:
        for c in bt.contacts:
            out.append(CharPoint("BitangentContact", c, (curve.index,), 0.0, max(bt.residuals)))
    return out
