"""Refined algebraic domains: validation, membership and characteristic sets."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import curvegeo as cg
from .errors import (ClosureMembershipUndecided, CurveMissesClosure, IdenticallyZero,
                     MembershipUndecided, OnCurve, OutsideBox, SeedOnCurve, SingularCurve,
                     SweepMatchingAmbiguous, TangentialCrossing, TriplePoint, UnboundedDomain)
from .polynomials import Box, Poly2, roots_on_segment
from .sweep import OUTSIDE, Sweep, transpose
from .systems import solve_system

DEFAULT_TOL = {"solver": 1e-12, "geom": 1e-9, "trace_step": None, "morse": 1e-8}


@dataclass
class Scene:
    curves: list
    box: Box
    seed: tuple
    tol: dict = field(default_factory=dict)

    def __post_init__(self):
        self.curves = list(self.curves)
        self.seed = (float(self.seed[0]), float(self.seed[1]))
        self.tol = {**DEFAULT_TOL, **(self.tol or {})}

    @property
    def geom_tol(self) -> float:
        """Absolute distance below which two points or coordinates coincide."""
        return self.tol["geom"] * self.box.size

    @property
    def merge_tol(self) -> float:
        return 10.0 * self.geom_tol

    @property
    def step(self) -> float:
        s = self.tol.get("trace_step")
        return cg.default_step(self.box) if s is None else float(s)

    def with_curve(self, p: Poly2) -> "Scene":
        return Scene(self.curves + [p], self.box, self.seed, dict(self.tol))

    def to_json(self) -> dict:
        tol = {k: v for k, v in self.tol.items() if v is not None}
        return {"curves": [c.to_json() for c in self.curves], "box": self.box.to_list(),
                "seed": list(self.seed), "tol": tol}

    @classmethod
    def from_json(cls, obj) -> "Scene":
        return cls([Poly2.from_json(c) for c in obj["curves"]], Box.from_list(obj["box"]),
                   tuple(obj["seed"]), dict(obj.get("tol", {})))


@dataclass
class Flags:
    nip: bool
    ndtl: bool
    ncv: bool
    witnesses: dict

    def get(self, mode: str) -> bool:
        return getattr(self, mode)

    def to_json(self) -> dict:
        return {"nip": self.nip, "ndtl": self.ndtl, "ncv": self.ncv,
                "witnesses": {k: [w.to_json() for w in v] for k, v in self.witnesses.items()}}


@dataclass
class MorseReport:
    morse: bool
    g_morse: bool
    witnesses: list
    g_witnesses: dict

    def to_json(self) -> dict:
        return {"morse": self.morse, "g_morse": self.g_morse,
                "witnesses": [w.to_json() for w in self.witnesses],
                "g_morse_witnesses": {k: [[a.to_json(), b.to_json()] for a, b in v]
                                      for k, v in self.g_witnesses.items()}}


@dataclass
class Domain:
    scene: Scene
    curves: list
    crossings: list  # every crossing in the box, tangential ones flagged (isolated=False)
    poles: dict  # axis -> all poles of all curves in the box
    sweeps: dict  # axis -> Sweep in (u, v) coordinates
    faces: dict  # axis -> union-find representative of the seed component
    boundary_arcs: list = field(default_factory=list)
    char_sets: dict = field(default_factory=dict)
    ndtl_same_curve_only: bool = False
    _flags: Flags | None = None
    _morse: MorseReport | None = None

    @property
    def box(self) -> Box:
        return self.scene.box

    def in_domain(self, node, axis="X") -> bool:
        return self.sweeps[axis].face(node) == self.faces[axis]

    # membership of curve points in the closure
    def on_closure(self, p, j: int) -> bool:
        for axis in ("X", "Y"):
            u, v = (p[0], p[1]) if axis == "X" else (p[1], p[0])
            try:
                nodes = self.sweeps[axis].adjacent_nodes(u, v, j)
            except MembershipUndecided:
                continue
            return any(self.in_domain(n, axis) for n in nodes)
        raise ClosureMembershipUndecided("cannot decide closure membership", at=list(p), curve=j)

    def boundary_points(self):
        for j, pts in self.boundary_arcs:
            yield j, pts


def _transversality(f: Poly2, g: Poly2, p) -> float:
    a, b = f.gradient(*p), g.gradient(*p)
    na, nb = float(np.hypot(*a)), float(np.hypot(*b))
    return abs(a[0] * b[1] - a[1] * b[0]) / (na * nb)


def _edge_events(polys, box: Box, axis: str) -> list[float]:
    """Sweep coordinates where curves meet the two box edges parallel to the sweep."""
    out = []
    if axis == "X":
        edges = [((box.x_lo, box.y_lo), (box.x_hi, box.y_lo)), ((box.x_lo, box.y_hi), (box.x_hi, box.y_hi))]
    else:
        edges = [((box.x_lo, box.y_lo), (box.x_lo, box.y_hi)), ((box.x_hi, box.y_lo), (box.x_hi, box.y_hi))]
    k = 0 if axis == "X" else 1
    for f in polys:
        for a, b in edges:
            try:
                ris = roots_on_segment(f, a, b, 1e-13)
            except IdenticallyZero:
                raise UnboundedDomain("a curve runs along the box boundary")
            for r in ris:
                out.append(a[k] + r.mid * (b[k] - a[k]))
    return out


def build_domain(scene: Scene, *, ndtl_same_curve_only: bool = False) -> Domain:
    box = scene.box
    sx, sy = scene.seed
    if not box.contains(scene.seed, margin=0.0) or box.boundary_distance(scene.seed) <= 0:
        raise OutsideBox("seed is not strictly inside the box", seed=list(scene.seed))
    if not scene.curves:
        raise UnboundedDomain("no curves: the complement is the whole box")
    for j, f in enumerate(scene.curves):
        g = float(np.hypot(*f.gradient(sx, sy)))
        if abs(f(sx, sy)) <= max(cg.default_tol(f), scene.geom_tol * g):
            raise SeedOnCurve("seed lies on a curve", curve=j)
    curves = []
    for j, f in enumerate(scene.curves):
        v = cg.check_nonsingular(f, box)
        if v.status == "SingularAt":
            raise SingularCurve("curve has singular points", curve=j, points=[list(p) for p in v.points])
        if v.status == "EmptyZeroSet":
            raise CurveMissesClosure("curve has no real points in the box", curve=j)
        curves.append(cg.trace_curve(f, box, scene.step, index=j))

    tol = scene.tol["solver"]
    poles = {"X": [], "Y": []}
    for c in curves:
        for axis in ("X", "Y"):
            poles[axis] += cg.find_poles(c, axis, box, tol)
    crossings = []
    lo, hi = [box.x_lo, box.y_lo], [box.x_hi, box.y_hi]
    for i in range(len(curves)):
        for j in range(i + 1, len(curves)):
            fi, fj = scene.curves[i], scene.curves[j]
            for cp in solve_system([fi, fj], lo, hi, tol, clusters="collect"):
                iso = cp.isolated and _transversality(fi, fj, cp.location) > scene.tol["morse"]
                crossings.append(cg.CharPoint("Crossing", cp.location, (i, j), cp.radius, cp.residual,
                                              None, iso))

    sweeps = {}
    faces = {}
    for axis in ("X", "Y"):
        k = 0 if axis == "X" else 1
        polys = scene.curves if axis == "X" else [transpose(f) for f in scene.curves]
        events = [p.location[k] for p in poles[axis]] + [c.location[k] for c in crossings]
        events += _edge_events(scene.curves, box, axis)
        ubox = (box.x_lo, box.x_hi, box.y_lo, box.y_hi) if axis == "X" else (box.y_lo, box.y_hi, box.x_lo, box.x_hi)
        try:
            sw = Sweep(polys, ubox, events, scene.merge_tol)
        except SweepMatchingAmbiguous:
            # a tangential crossing breaks the root order; report the cause instead
            bad = [c for c in crossings if not c.isolated]
            if bad:
                raise TangentialCrossing("curves meet tangentially", at=list(bad[0].location),
                                         curves=list(bad[0].curves)) from None
            raise
        sweeps[axis] = sw
        u, v = (sx, sy) if axis == "X" else (sy, sx)
        node = sw.locate(u, v, 0.0)
        if node[0] == "on":
            raise SeedOnCurve("seed lies on a curve")
        faces[axis] = sw.face(node)
        if faces[axis] == OUTSIDE:
            raise UnboundedDomain("the seed component reaches the box boundary", axis=axis)

    dom = Domain(scene, curves, crossings, poles, sweeps, faces, ndtl_same_curve_only=ndtl_same_curve_only)
    _validate(dom)
    dom.boundary_arcs = _boundary_arcs(dom)
    for axis in ("X", "Y"):
        dom.char_sets[axis] = _characteristic(dom, axis)
    return dom


def _validate(dom: Domain) -> None:
    scene = dom.scene
    on = [c for c in dom.crossings if dom.on_closure(c.location, c.curves[0])]
    for c in on:
        if not c.isolated:
            raise TangentialCrossing("curves meet tangentially on the closure", at=list(c.location),
                                     curves=list(c.curves))
    for a in range(len(on)):
        for b in range(a + 1, len(on)):
            p, q = on[a], on[b]
            if set(p.curves) != set(q.curves) and math.dist(p.location, q.location) <= scene.merge_tol:
                raise TriplePoint("three curves meet at one point", at=list(p.location))
    for c in on:
        for k, f in enumerate(scene.curves):
            if k in c.curves:
                continue
            g = float(np.hypot(*f.gradient(*c.location)))
            if abs(f(*c.location)) <= scene.merge_tol * max(g, 1e-300):
                raise TriplePoint("three curves meet at one point", at=list(c.location))
    sw = dom.sweeps["X"]
    touched = {j for c in on for j in c.curves}
    for s, roots in enumerate(sw.slab_roots):
        for i, (_v, j) in enumerate(roots):
            if j not in touched and (dom.in_domain(("c", s, i)) or dom.in_domain(("c", s, i + 1))):
                touched.add(j)
    for j in range(len(scene.curves)):
        if j in touched:
            continue
        if any(dom.on_closure(p.location, j) for p in dom.poles["X"] if p.curves == (j,)):
            touched.add(j)
            continue
        raise CurveMissesClosure("curve does not meet the closure of the domain", curve=j)


def _boundary_arcs(dom: Domain) -> list:
    """Polyline runs of the traced curves lying on the boundary of the domain."""
    sw = dom.sweeps["X"]
    arcs = []
    for c in dom.curves:
        for comp in c.components:
            pts = comp.points
            if comp.closed:
                pts = np.vstack([pts, pts[:1]])
            slab = np.searchsorted(sw.stations, pts[:, 0])
            cut = np.flatnonzero(np.diff(slab) != 0) + 1
            starts = np.concatenate([[0], cut])
            ends = np.concatenate([cut, [len(pts)]])
            flags = []
            for a, b in zip(starts, ends):
                mid = pts[(a + b - 1) // 2]
                try:
                    nodes = sw.adjacent_nodes(mid[0], mid[1], c.index)
                    flags.append(any(dom.in_domain(n) for n in nodes))
                except MembershipUndecided:
                    flags.append(dom.on_closure(mid, c.index))
            run = None
            for (a, b), fl in zip(zip(starts, ends), flags):
                if fl:
                    seg = pts[a:min(b + 1, len(pts))]
                    run = seg if run is None else np.vstack([run, seg[1:]])
                elif run is not None:
                    arcs.append((c.index, run))
                    run = None
            if run is not None:
                arcs.append((c.index, run))
    return arcs


def _characteristic(dom: Domain, axis: str) -> list:
    k = 0 if axis == "X" else 1
    out = [c for c in dom.crossings if dom.on_closure(c.location, c.curves[0])]
    out += [p for p in dom.poles[axis] if dom.on_closure(p.location, p.curves[0])]
    out.sort(key=lambda p: (p.location[k], p.location[1 - k]))
    return out


def contains_point(dom: Domain, q) -> bool:
    box = dom.box
    if not box.contains(q):
        raise OutsideBox("query point is outside the box", q=list(q))
    for j, f in enumerate(dom.scene.curves):
        if abs(f(q[0], q[1])) <= cg.default_tol(f):
            raise OnCurve("query point lies on a curve", curve=j)
    for axis in ("X", "Y"):
        u, v = (q[0], q[1]) if axis == "X" else (q[1], q[0])
        try:
            node = dom.sweeps[axis].locate(u, v, 0.0)
        except MembershipUndecided:
            continue
        if node[0] == "on":
            raise OnCurve("query point lies on a curve")
        return dom.in_domain(node, axis)
    raise MembershipUndecided("query point sits on stations of both sweeps", q=list(q))


def characteristic_set(dom: Domain, axis) -> list:
    return list(dom.char_sets[cg.axis_name(axis)])


def _pole_degenerate(f: Poly2, p, axis: str, thr: float) -> bool:
    fx, fy = f.dx(*p), f.dy(*p)
    g = math.hypot(fx, fy)
    second = f.dy.dy(*p) if axis == "X" else f.dx.dx(*p)
    return abs(second) <= thr * g


def classify_morse(dom: Domain) -> MorseReport:
    if dom._morse is not None:
        return dom._morse
    thr = dom.scene.tol["morse"]
    bad = []
    for axis in ("X", "Y"):
        for p in dom.char_sets[axis]:
            if p.kind == "Pole":
                f = dom.scene.curves[p.curves[0]]
                if not p.isolated or _pole_degenerate(f, p.location, axis, thr):
                    bad.append(p)
    for p in dom.char_sets["X"]:
        if p.kind != "Crossing":
            continue
        for j in p.curves:
            f = dom.scene.curves[j]
            gx, gy = f.gradient(*p.location)
            g = math.hypot(gx, gy)
            if abs(gx) <= thr * g or abs(gy) <= thr * g:
                bad.append(p)
                break
    morse = not bad
    gw = {}
    for axis in ("X", "Y"):
        k = 0 if axis == "X" else 1
        pts = dom.char_sets[axis]
        pairs = [(a, b) for i, a in enumerate(pts) for b in pts[i + 1:]
                 if abs(a.location[k] - b.location[k]) <= dom.scene.merge_tol]
        if pairs:
            gw[axis] = pairs
    dom._morse = MorseReport(morse, morse and not gw, bad, gw)
    return dom._morse


def _line_box_segment(line: cg.TangentLine, box: Box):
    (bx, by), (dx, dy) = line.base, line.direction
    t0, t1 = -math.inf, math.inf
    for p, d, lo, hi in ((bx, dx, box.x_lo, box.x_hi), (by, dy, box.y_lo, box.y_hi)):
        if abs(d) < 1e-300:
            if not lo <= p <= hi:
                return None
            continue
        a, b = (lo - p) / d, (hi - p) / d
        t0, t1 = max(t0, min(a, b)), min(t1, max(a, b))
    if not t0 < t1:
        return None
    return np.array([bx + t0 * dx, by + t0 * dy]), np.array([bx + t1 * dx, by + t1 * dy])


def curve_analysis(dom: Domain, j: int) -> dict:
    """Per-curve differential-geometric features, cached on the polynomial."""
    c = dom.curves[j]
    f = c.poly
    key = ("analysis", dom.box, c.step)

    def build():
        bts = cg.find_bitangents(c)
        return {"inflections": cg.find_inflections(c), "bitangents": bts,
                "vertices": cg.find_curvature_vertices(c)}
    res = f.cached(key, build)
    # stamp the curve index of this scene
    relabel = lambda pts: [cg.CharPoint(p.kind, p.location, (j,), p.radius, p.residual, p.axis, p.isolated)
                           for p in pts]
    return {"inflections": relabel(res["inflections"]), "bitangents": res["bitangents"],
            "vertices": relabel(res["vertices"])}


def bitangent_hits(dom: Domain, j: int, bt: cg.Bitangent) -> list:
    """Boundary points of the domain lying on a bitangent line of curve j."""
    seg = _line_box_segment(bt.line, dom.box)
    if seg is None:
        return []
    a, b = seg
    out = []
    targets = [j] if dom.ndtl_same_curve_only else range(len(dom.scene.curves))
    for k in targets:
        f = dom.scene.curves[k]
        try:
            ris = roots_on_segment(f, a, b, 1e-13)
        except IdenticallyZero:
            continue
        for r in ris:
            p = tuple(float(v) for v in a + r.mid * (b - a))
            if dom.on_closure(p, k):
                out.append(cg.CharPoint("BitangentContact", p, (k,), 0.0, abs(f(*p))))
    return out


def check_flags(dom: Domain) -> Flags:
    if dom._flags is not None:
        return dom._flags
    w = {"nip": [], "ndtl": [], "ncv": []}
    for j in range(len(dom.curves)):
        an = curve_analysis(dom, j)
        w["nip"] += [p for p in an["inflections"] if dom.on_closure(p.location, j)]
        w["ncv"] += [p for p in an["vertices"] if dom.on_closure(p.location, j)]
        for bt in an["bitangents"]:
            w["ndtl"] += bitangent_hits(dom, j, bt)
    for k in w:
        uniq = {}
        for p in w[k]:
            uniq.setdefault(tuple(np.round(np.array(p.location) / dom.scene.merge_tol)), p)
        w[k] = sorted(uniq.values(), key=lambda p: p.location)
    dom._flags = Flags(not w["nip"], not w["ndtl"], not w["ncv"], w)
    return dom._flags


def defects(dom: Domain, mode: str) -> list:
    return list(check_flags(dom).witnesses[mode])


def report(dom: Domain, differential: bool = True) -> dict:
    """Flags and characteristic points. ``differential=False`` skips the
    inflection, bitangent and vertex analysis, which is costly on curves of
    high degree."""
    m = classify_morse(dom)
    out = {"flags": {"morse": m.morse, "g_morse": m.g_morse}, "morse": m.to_json()}
    if differential:
        fl = check_flags(dom)
        out["flags"].update({"nip": fl.nip, "ndtl": fl.ndtl, "ncv": fl.ncv})
        out["defects"] = fl.to_json()["witnesses"]
    out["characteristic_sets"] = {a: [p.to_json() for p in dom.char_sets[a]] for a in ("X", "Y")}
    out["crossings"] = [c.to_json() for c in dom.crossings]
    return out
