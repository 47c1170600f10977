"""Realize a height-labelled planar graph as the Poincaré-Reeb graph of a domain.

The graph is thickened into a tube whose boundary is the zero set of a
least-squares polynomial fit of a smoothed signed distance field. The tube
boundary has one pole of the first projection per degree-one vertex and per
sector between consecutive edges leaving a branching vertex on the same
side. Circles are then added around those poles: at a branching vertex the
circle is centred at the pole and passes through the point of the pole's
fiber at the vertex height, so the branching happens exactly at that
height; at a degree-one vertex a larger circle cuts the cap obliquely so
that the extremum becomes a crossing and the new arc is monotone.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial import chebyshev as C

from . import curvegeo as cg
from .domain import Domain, Scene, build_domain, classify_morse
from .errors import (AlgDomainError, ClearanceTooSmall, FitFailed, GraphMismatch, InvalidEmbedding,
                     PlacementFailed, SingularFit)
from .oracle import _runs_graph, cell_tolerance, grid_reeb
from .polynomials import Box, Poly2
from .reeb import VDigraph, poincare_reeb, vdigraph_isomorphic
from .surgery import _candidate

DEFAULT_DEGREE = 10
DEGREE_CAP = 16
DEFAULT_GRID = 256


@dataclass
class TubeSpec:
    delta: float
    fit_degree: int = DEFAULT_DEGREE
    degree_cap: int = DEGREE_CAP
    grid: int = DEFAULT_GRID

    def __post_init__(self):
        if not self.delta > 0:
            raise ValueError("tube width must be positive")
        if self.fit_degree < 2 or self.degree_cap < self.fit_degree:
            raise ValueError("bad fit degrees")


@dataclass
class EmbeddedGraph:
    positions: dict  # id -> (x, y)
    edges: list  # [(a, b, polyline ndarray from a to b)]
    extra_segments: list = field(default_factory=list)  # vertical joints added by splitting

    @classmethod
    def from_json(cls, obj) -> "EmbeddedGraph":
        pos = {int(v["id"]): (float(v["x"]), float(v["y"])) for v in obj["vertices"]}
        edges = []
        for e in obj["edges"]:
            a, b = int(e["a"]), int(e["b"])
            pl = e.get("polyline") or [pos[a], pos[b]]
            edges.append((a, b, np.asarray(pl, dtype=float)))
        return cls(pos, edges)

    def to_json(self) -> dict:
        return {"vertices": [{"id": k, "x": p[0], "y": p[1]} for k, p in sorted(self.positions.items())],
                "edges": [{"a": a, "b": b, "polyline": pl.tolist()} for a, b, pl in self.edges]}

    def oriented(self):
        """Edges as (low, high, polyline low->high)."""
        out = []
        for a, b, pl in self.edges:
            if pl[0, 0] > pl[-1, 0]:
                out.append((b, a, pl[::-1]))
            else:
                out.append((a, b, pl))
        return out

    def degrees(self) -> dict:
        d = {k: [0, 0] for k in self.positions}
        for lo, hi, _pl in self.oriented():
            d[lo][1] += 1
            d[hi][0] += 1
        return d

    def extremal(self) -> list:
        return [k for k, (i, o) in self.degrees().items() if i == 0 or o == 0]

    def segments(self) -> list:
        segs = []
        for _a, _b, pl in self.edges:
            segs += [(pl[i], pl[i + 1]) for i in range(len(pl) - 1)]
        return segs + [(np.asarray(a), np.asarray(b)) for a, b in self.extra_segments]

    def validate(self) -> None:
        if not self.edges:
            raise InvalidEmbedding("graph has no edges")
        for a, b, pl in self.edges:
            if a not in self.positions or b not in self.positions:
                raise InvalidEmbedding("edge refers to an unknown vertex", edge=[a, b])
            if len(pl) < 2 or not (np.allclose(pl[0], self.positions[a]) and np.allclose(pl[-1], self.positions[b])):
                raise InvalidEmbedding("polyline does not join its endpoints", edge=[a, b])
            dx = np.diff(pl[:, 0])
            if not (np.all(dx > 0) or np.all(dx < 0)):
                raise InvalidEmbedding("x is not strictly monotone along an edge", edge=[a, b])
        for k, (i, o) in self.degrees().items():
            if (i == 0 or o == 0) and i + o != 1:
                raise InvalidEmbedding("a local extremum must have degree one", vertex=k)
        # pairwise segment intersections away from shared endpoints
        labelled = []
        for n, (_a, _b, pl) in enumerate(self.edges):
            labelled += [(n, pl[i], pl[i + 1]) for i in range(len(pl) - 1)]
        for i in range(len(labelled)):
            for j in range(i + 1, len(labelled)):
                ni, p, q = labelled[i]
                nj, r, s = labelled[j]
                if ni == nj:
                    continue
                if _segments_cross(p, q, r, s):
                    raise InvalidEmbedding("edges intersect", edges=[ni, nj])

    def vdigraph(self) -> VDigraph:
        ids = sorted(self.positions)
        idx = {k: n for n, k in enumerate(ids)}
        verts = [{"id": idx[k], "height": self.positions[k][0], "provenance": {"input": k}} for k in ids]
        return VDigraph(verts, sorted((idx[lo], idx[hi]) for lo, hi, _pl in self.oriented()))

    def bounds(self) -> tuple:
        pts = np.vstack([pl for _a, _b, pl in self.edges])
        return pts[:, 0].min(), pts[:, 0].max(), pts[:, 1].min(), pts[:, 1].max()


def _segments_cross(p, q, r, s) -> bool:
    shared = any(np.allclose(u, v) for u in (p, q) for v in (r, s))

    def orient(a, b, c):
        return (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
    d1, d2 = orient(r, s, p), orient(r, s, q)
    d3, d4 = orient(p, q, r), orient(p, q, s)
    if shared:
        # collinear overlap beyond the shared point is the only failure
        if not (abs(d1) < 1e-15 and abs(d2) < 1e-15 and abs(d3) < 1e-15 and abs(d4) < 1e-15):
            return False
        c = next(u for u in (p, q) if any(np.allclose(u, v) for v in (r, s)))
        u = q if np.allclose(c, p) else p
        w = s if np.allclose(c, r) else r
        return float(np.dot(np.subtract(u, c), np.subtract(w, c))) > 0
    return (d1 * d2 < 0) and (d3 * d4 < 0)


def _seg_dist(P: np.ndarray, a, b) -> np.ndarray:
    ab = np.asarray(b) - np.asarray(a)
    t = np.clip(((P - a) @ ab) / max(ab @ ab, 1e-300), 0.0, 1.0)
    proj = np.asarray(a) + t[:, None] * ab
    return np.hypot(*(P - proj).T)


def _clearance(g: EmbeddedGraph, k) -> float:
    """Distance from vertex k to edges not incident to it."""
    p = np.asarray(g.positions[k])[None, :]
    best = math.inf
    for a, b, pl in g.edges:
        if k in (a, b):
            continue
        for i in range(len(pl) - 1):
            best = min(best, float(_seg_dist(p, pl[i], pl[i + 1])[0]))
    return best


def _edge_gap(pa: np.ndarray, pb: np.ndarray) -> float:
    # disjoint polylines: the closest pair always involves a vertex of one of them
    best = math.inf
    for P, Q in ((pa, pb), (pb, pa)):
        for i in range(len(Q) - 1):
            best = min(best, float(_seg_dist(P, Q[i], Q[i + 1]).min()))
    return best


def check_clearance(g: EmbeddedGraph, delta: float) -> None:
    """Tubes of radius delta around edges without a common vertex must not touch."""
    for i in range(len(g.edges)):
        for j in range(i + 1, len(g.edges)):
            a1, b1, p1 = g.edges[i]
            a2, b2, p2 = g.edges[j]
            if {a1, b1} & {a2, b2}:
                continue
            gap = _edge_gap(p1, p2)
            if gap <= 2.0 * delta:
                raise ClearanceTooSmall("tube width exceeds the clearance between edges",
                                        edges=[[a1, b1], [a2, b2]], clearance=gap, delta=delta)


def split_vertices(g: EmbeddedGraph, delta: float | None = None) -> EmbeddedGraph:
    """Move the departing edges of every branching vertex v to v' = v + (0, s)
    and join v to v' by a vertical segment."""
    g.validate()
    deg = g.degrees()
    edges = [(a, b, pl.copy()) for a, b, pl in g.edges]
    extra = list(g.extra_segments)
    for k, (i, o) in sorted(deg.items()):
        if i == 0 or o == 0 or (i <= 1 and o <= 1):
            continue
        clr = _clearance(g, k)
        # nearest departing edge turn also bounds the shift
        s = 0.5 * min(delta if delta is not None else clr, clr)
        v = np.asarray(g.positions[k], dtype=float)
        vp = v + np.array([0.0, s])
        for n, (a, b, pl) in enumerate(edges):
            if a == k and pl[-1, 0] > pl[0, 0]:
                pl[0] = vp
            elif b == k and pl[0, 0] > pl[-1, 0]:
                pl[-1] = vp
        extra.append((tuple(v), tuple(vp)))
    out = EmbeddedGraph(dict(g.positions), [(a, b, pl) for a, b, pl in edges], extra)
    # the moved edges must still be embedded and monotone
    for a, b, pl in out.edges:
        dx = np.diff(pl[:, 0])
        if not (np.all(dx > 0) or np.all(dx < 0)):
            raise ClearanceTooSmall("splitting broke monotonicity", edge=[a, b])
    labelled = []
    for n, (_a, _b, pl) in enumerate(out.edges):
        labelled += [(n, pl[i], pl[i + 1]) for i in range(len(pl) - 1)]
    for i in range(len(labelled)):
        for j in range(i + 1, len(labelled)):
            if labelled[i][0] != labelled[j][0] and _segments_cross(*labelled[i][1:], *labelled[j][1:]):
                raise ClearanceTooSmall("splitting made edges cross")
    return out


def _edge_distances(g: EmbeddedGraph, P: np.ndarray) -> np.ndarray:
    """Per-edge distance, vertical joints folded into the edges they touch."""
    cols = []
    for _a, _b, pl in g.edges:
        d = np.full(len(P), np.inf)
        for i in range(len(pl) - 1):
            d = np.minimum(d, _seg_dist(P, pl[i], pl[i + 1]))
        cols.append(d)
    for a, b in g.extra_segments:
        cols.append(_seg_dist(P, np.asarray(a), np.asarray(b)))
    return np.column_stack(cols)


def tube_field(g: EmbeddedGraph, delta: float, P: np.ndarray) -> np.ndarray:
    """Signed field, negative inside the tube: distance to the graph (with a
    soft minimum of radius delta/2 across edges) minus delta."""
    D = _edge_distances(g, P)
    tau = delta / 8.0
    m = D.min(axis=1)
    soft = m - tau * np.log(np.exp(-(D - m[:, None]) / tau).sum(axis=1))
    # the soft minimum only differs from the hard one within about delta/2 of a joint
    return soft - delta


def _fit_box(g: EmbeddedGraph, delta: float) -> Box:
    x0, x1, y0, y1 = g.bounds()
    pad = 3.0 * delta + 0.1 * max(x1 - x0, y1 - y0)
    return Box(x0 - pad, x1 + pad, y0 - pad, y1 + pad)


def _cheb_to_poly(coef: np.ndarray, box: Box) -> Poly2:
    n = coef.shape[0]
    T = np.zeros((n, n))
    for k in range(n):
        e = np.zeros(n)
        e[k] = 1.0
        c = C.cheb2poly(e)
        T[: len(c), k] = c
    P = T @ coef @ T.T
    cx, cy = box.center
    hx, hy = 0.5 * box.width, 0.5 * box.height
    return Poly2.from_dense(P).affine(1.0 / hx, -cx / hx, 1.0 / hy, -cy / hy)


def _lstsq_fit(g: EmbeddedGraph, spec: TubeSpec, box: Box, degree: int) -> Poly2:
    n = spec.grid
    u = np.cos(np.pi * (np.arange(n) + 0.5) / n)[::-1]  # Chebyshev nodes
    U, V = np.meshgrid(u, u)
    cx, cy = box.center
    P = np.column_stack([cx + 0.5 * box.width * U.ravel(), cy + 0.5 * box.height * V.ravel()])
    phi = tube_field(g, spec.delta, P) / spec.delta
    # samples near the tube boundary dominate; far ones only pin the sign
    w = 1.0 / (1.0 + phi ** 2)
    Tx = C.chebvander(U.ravel(), degree)
    Ty = C.chebvander(V.ravel(), degree)
    idx = [(i, j) for i in range(degree + 1) for j in range(degree + 1 - i)]
    A = np.column_stack([Tx[:, i] * Ty[:, j] for i, j in idx])
    sol, *_ = np.linalg.lstsq(A * w[:, None], phi * w, rcond=None)
    coef = np.zeros((degree + 1, degree + 1))
    for (i, j), c in zip(idx, sol):
        coef[i, j] = c
    F = _cheb_to_poly(coef, box)
    return F * (1.0 / F.coeff_scale)


def _seed_point(g: EmbeddedGraph, avoid=()) -> tuple:
    best, bd = None, -math.inf
    for _a, _b, pl in g.edges:
        for i in range(len(pl) - 1):
            for t in np.linspace(0.1, 0.9, 9):
                q = pl[i] + t * (pl[i + 1] - pl[i])
                d = min([math.dist(q, c) - r for c, r in avoid] + [math.inf])
                if d > bd:
                    best, bd = q, d
    return (float(best[0]), float(best[1]))


def _verify_fit(F: Poly2, g: EmbeddedGraph, spec: TubeSpec, box: Box) -> tuple[bool, str]:
    n = 160
    xs = np.linspace(box.x_lo, box.x_hi, n)
    ys = np.linspace(box.y_lo, box.y_hi, n)
    X, Y = np.meshgrid(xs, ys)
    P = np.column_stack([X.ravel(), Y.ravel()])
    phi = tube_field(g, spec.delta, P)
    val = F.evaluate(P[:, 0], P[:, 1])
    inner = phi < -0.5 * spec.delta
    outer = phi > 0.5 * spec.delta
    if np.any(val[inner] >= 0) or np.any(val[outer] <= 0):
        return False, "sign"
    v = cg.check_nonsingular(F, box)
    if v.status == "SingularAt":
        return False, "singular"
    res = 512
    seed = _seed_point(g)
    try:
        fitted = grid_reeb(Scene([F], box, seed), "X", res)
    except AlgDomainError:
        return False, "raster"
    xs = box.x_lo + (np.arange(res) + 0.5) * box.width / res
    ys = box.y_lo + (np.arange(res) + 0.5) * box.height / res
    X, Y = np.meshgrid(xs, ys)
    tube = tube_field(g, spec.delta, np.column_stack([X.ravel(), Y.ravel()])).reshape(X.shape) < 0
    ref = _runs_graph(tube, xs)
    if not vdigraph_isomorphic(fitted, ref, "height_order", 4 * box.width / res):
        return False, "reeb"
    return True, ""


def fit_tube_polynomial(g: EmbeddedGraph, spec: TubeSpec) -> Poly2:
    box = _fit_box(g, spec.delta)
    last = ""
    for degree in range(spec.fit_degree, spec.degree_cap + 1, 2):
        F = _lstsq_fit(g, spec, box, degree)
        ok, why = _verify_fit(F, g, spec, box)
        if ok:
            return F
        last = why
    if last == "singular":
        raise SingularFit("fitted polynomial has singular points", degree=spec.degree_cap)
    raise FitFailed("no polynomial up to the degree cap reproduces the tube", reason=last,
                    degree=spec.degree_cap)


def expected_pole_count(g: EmbeddedGraph) -> int:
    return sum(1 if i + o == 1 else max(i - 1, 0) + max(o - 1, 0) for i, o in g.degrees().values())


def _classify_poles(g: EmbeddedGraph, poles, delta: float):
    """Assign every tube pole to a degree-one vertex cap or a branching sector."""
    deg = g.degrees()
    caps, saddles = {}, []
    for p in poles:
        best, bd = None, math.inf
        for k, pos in g.positions.items():
            d = math.dist(p.location, pos)
            if d < bd:
                best, bd = k, d
        i, o = deg[best]
        if i + o == 1:
            caps.setdefault(best, []).append(p)
        else:
            saddles.append((best, p))
    return caps, saddles


def _cap_circle(dom: Domain, g: EmbeddedGraph, k, pole: cg.CharPoint, delta: float):
    """Circle cutting the cap at degree-one vertex k obliquely."""
    lo_hi = g.degrees()[k]
    v = np.asarray(g.positions[k], dtype=float)
    pl = next(pl if a == k else pl[::-1] for a, b, pl in g.edges if k in (a, b))
    d = pl[1] - pl[0]
    d /= np.linalg.norm(d)
    inward = 1.0 if lo_hi[1] == 1 else -1.0  # minimum: domain lies to the right
    gap = max(1e-6 * dom.box.size, 1e3 * dom.scene.merge_tol)
    for R in (2.0 * delta, 1.5 * delta, 3.0 * delta, 1.2 * delta):
        for psi_deg in (45.0, 35.0, 55.0, 25.0, 65.0):
            for s in (1.0, -1.0):
                psi = math.radians(psi_deg) * s
                m = np.array([inward * math.cos(psi), math.sin(psi)])
                for a in (0.0, 0.3, -0.3, 0.6):
                    q = v + a * delta * d
                    c = q - R * m
                    if math.dist(c, pole.location) >= R:
                        continue
                    res = _candidate(dom, pole, tuple(c), R, gap, axes=("X",))
                    if res is not None:
                        return tuple(map(float, c)), R
    raise PlacementFailed("no admissible circle at a degree-one vertex", vertex=k)


def realize_domain(g: EmbeddedGraph, spec: TubeSpec, *, log: dict | None = None) -> Domain:
    g.validate()
    check_clearance(g, spec.delta)
    gs = split_vertices(g, spec.delta)
    F = fit_tube_polynomial(gs, spec)
    box = _fit_box(gs, spec.delta)
    tube = build_domain(Scene([F], box, _seed_point(gs)))
    poles = [p for p in tube.char_sets["X"] if p.kind == "Pole"]
    expected = expected_pole_count(g)
    if len(poles) != expected:
        raise FitFailed("tube boundary poles do not match the graph", found=len(poles), expected=expected)
    caps, saddles = _classify_poles(g, poles, spec.delta)
    circles = []
    for k, p in saddles:
        vx = g.positions[k][0]
        r = abs(p.location[0] - vx)
        circles.append((p.location, r, "saddle", k))
    for k, ps in sorted(caps.items()):
        if len(ps) != 1:
            raise PlacementFailed("degree-one vertex without a single cap pole", vertex=k)
        c, r = _cap_circle(tube, g, k, ps[0], spec.delta)
        circles.append((c, r, "extremum", k))
    for i in range(len(circles)):
        for j in range(i + 1, len(circles)):
            (c1, r1, *_), (c2, r2, *_) = circles[i], circles[j]
            if math.dist(c1, c2) <= r1 + r2:
                raise PlacementFailed("inserted disks overlap")
    seed = _seed_point(gs, [(c, r) for c, r, *_ in circles])
    scene = Scene([F] + [Poly2.circle(c[0], c[1], r) for c, r, *_ in circles], box, seed)
    try:
        dom = build_domain(scene)
    except AlgDomainError as e:
        raise PlacementFailed("realized scene is not a valid domain", cause=e.code) from e
    if not classify_morse(dom).morse:
        raise GraphMismatch("realized domain is not Morse")
    got = poincare_reeb(dom, "X")
    if not vdigraph_isomorphic(got, g.vdigraph(), "height_order", tol=1e-9 * box.size):
        raise GraphMismatch("realized Poincaré-Reeb graph differs from the input")
    if log is not None:
        log.update({"degree": F.degree, "tube_poles": len(poles), "expected_poles": expected,
                    "circles": [{"center": list(c), "radius": r, "kind": kind, "vertex": k}
                                for c, r, kind, k in circles]})
    return dom
