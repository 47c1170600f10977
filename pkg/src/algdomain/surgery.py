"""Disk-insertion surgery removing inflection, bitangent and vertex defects.

A defect point p on the boundary is carved out by adding a circle whose
disk contains p. The circle is accepted only if it meets the closure of the
domain in exactly two transversal points and the arc it contributes to the
new boundary is monotone in both coordinates; that arc then adds no pole
and the only new characteristic points are the two contacts, which are
regular points of both projections. Both Poincaré-Reeb graphs are therefore
unchanged up to smoothing degree-two vertices, and this is re-checked after
every insertion.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import curvegeo as cg
from .domain import Domain, Scene, build_domain, classify_morse, contains_point, defects
from .errors import (AlgDomainError, GraphChanged, HypothesisViolated, IterationCapReached,
                     NoValidRadius, NotMorse, SeedSwallowed, ValidationFailed, ValidationError)
from .polynomials import Poly2
from .reeb import poincare_reeb, vdigraph_isomorphic
from .systems import solve_system

MODES = ("nip", "ndtl", "ncv")
MAX_HALVINGS = 40
GOLDEN = math.pi * (3.0 - math.sqrt(5.0))


@dataclass
class SurgeryPlan:
    target: cg.CharPoint
    conic: Poly2
    center: tuple
    radii: tuple
    contacts: tuple  # (p_l, p_r)
    case: str  # SingleCurve | AtCrossing
    mode: str

    def to_json(self) -> dict:
        return {"defect": self.mode, "target": self.target.to_json(), "center": list(self.center),
                "radii": list(self.radii), "contacts": [list(p) for p in self.contacts],
                "case": self.case, "conic": self.conic.to_json()}


def _pole_points(dom: Domain):
    return [p for a in ("X", "Y") for p in dom.char_sets[a] if p.kind == "Pole"]


def _check_hypothesis(dom: Domain, target: cg.CharPoint) -> None:
    near = 10 * dom.scene.merge_tol
    for p in _pole_points(dom):
        if math.dist(p.location, target.location) <= near:
            raise HypothesisViolated("defect point is a pole of a projection",
                                     at=list(target.location), axis=p.axis)


def _inward(dom: Domain, p, case_curves) -> np.ndarray:
    """Unit direction from p into the domain."""
    dirs = []
    for j in case_curves:
        f = dom.scene.curves[j]
        g = np.asarray(f.gradient(*p), dtype=float)
        # the domain lies on the seed's side of every curve
        dirs.append(math.copysign(1.0, f(*dom.scene.seed)) * g / np.linalg.norm(g))
    w = np.sum(dirs, axis=0)
    if np.linalg.norm(w) < 1e-12:
        w = dirs[0]
    w = w / np.linalg.norm(w)
    h = 1e-4 * dom.box.size
    for s in (1.0, -1.0):
        q = (p[0] + s * h * w[0], p[1] + s * h * w[1])
        try:
            if contains_point(dom, q):
                return s * w
        except AlgDomainError:
            continue
    return w


def _arc_contains(theta0: float, theta1: float, phi: float) -> bool:
    """Whether angle phi lies on the counter-clockwise arc theta0 -> theta1."""
    span = (theta1 - theta0) % (2 * math.pi)
    return (phi - theta0) % (2 * math.pi) < span


def _candidate(dom: Domain, target: cg.CharPoint, c, r: float, gap: float, axes=("X", "Y")):
    """Validate one circle; return (contacts, case) or None.

    ``axes`` names the projections that must be left intact: their
    characteristic points stay outside the disk and the new arc has no pole
    of theirs.
    """
    scene = dom.scene
    box = dom.box
    if not box.contains((c[0] - r, c[1] - r)) or not box.contains((c[0] + r, c[1] + r)):
        return None
    if box.boundary_distance(c) <= r + gap:
        return None
    if math.dist(c, scene.seed) <= r + gap:
        return None
    circle = Poly2.circle(c[0], c[1], r)
    lo = [c[0] - 1.01 * r, c[1] - 1.01 * r]
    hi = [c[0] + 1.01 * r, c[1] + 1.01 * r]
    hits = []
    for j, f in enumerate(scene.curves):
        try:
            pts = solve_system([circle, f], lo, hi, scene.tol["solver"])
        except AlgDomainError:
            return None
        for cp in pts:
            a = np.asarray(circle.gradient(*cp.location))
            b = np.asarray(f.gradient(*cp.location))
            sin = abs(a[0] * b[1] - a[1] * b[0]) / (np.linalg.norm(a) * np.linalg.norm(b))
            if sin < 1e-3:
                return None
            hits.append((cp.location, j))
    # every other component must stay clear of the disk
    for k, cur in enumerate(dom.curves):
        for comp in cur.components:
            d = np.hypot(comp.points[:, 0] - c[0], comp.points[:, 1] - c[1])
            if np.all(d < r):
                return None
    on = []
    for loc, j in hits:
        try:
            if dom.on_closure(loc, j):
                on.append((loc, j))
        except AlgDomainError:
            return None
    if len(on) != 2:
        return None
    # characteristic points other than the target must be outside the disk
    near = 10 * scene.merge_tol
    for axis in axes:
        for p in dom.char_sets[axis]:
            if math.dist(p.location, target.location) <= near:
                continue
            if math.dist(p.location, c) <= r + gap:
                return None
    th = [math.atan2(q[1] - c[1], q[0] - c[0]) for q, _j in on]
    # pick the arc lying in the domain
    arcs = [(th[0], th[1]), (th[1], th[0])]
    inside = []
    for a0, a1 in arcs:
        mid = a0 + 0.5 * ((a1 - a0) % (2 * math.pi))
        q = (c[0] + r * math.cos(mid), c[1] + r * math.sin(mid))
        try:
            inside.append(contains_point(dom, q))
        except AlgDomainError:
            return None
    if inside.count(True) != 1:
        return None
    a0, a1 = arcs[inside.index(True)]
    margin = 1e-3
    # X-poles of the circle sit at angles 0 and pi, Y-poles at +-pi/2
    poles = {"X": (0.0, math.pi), "Y": (0.5 * math.pi, 1.5 * math.pi)}
    for axis in axes:
        for phi in poles[axis]:
            for e in (-margin, 0.0, margin):
                if _arc_contains(a0, a1, phi + e):
                    return None
    (p1, j1), (p2, j2) = on
    chord = np.abs(np.subtract(p2, p1))
    # both contacts on one fiber would merge two stations
    for axis in axes:
        k = 0 if axis == "X" else 1
        if chord[k] < 1e-3 * math.hypot(*chord):
            return None
    # new sweep stations must stay apart from existing ones
    for k, sw_axis in enumerate(("X", "Y")):
        old = np.asarray(dom.sweeps[sw_axis].stations)
        new = [c[k] - r, c[k] + r] + [q[k] for q, _j in hits]
        for v in new:
            if old.size and np.min(np.abs(old - v)) < gap:
                return None
        new = sorted(new)
        if any(b - a < gap for a, b in zip(new, new[1:])):
            return None
    case = "AtCrossing" if j1 != j2 else "SingleCurve"
    return (tuple(map(float, p1)), tuple(map(float, p2))), case


def _initial_radius(dom: Domain, target: cg.CharPoint, case_curves=None) -> float:
    p = target.location
    near = 10 * dom.scene.merge_tol
    ds = [math.dist(q.location, p) for a in ("X", "Y") for q in dom.char_sets[a]
          if math.dist(q.location, p) > near]
    ds += [math.dist(q.location, p) for q in dom.crossings if math.dist(q.location, p) > near]
    ds.append(dom.box.boundary_distance(p))
    ds.append(math.dist(p, dom.scene.seed))
    skip = set(target.curves) | set(case_curves or ())
    for k, cur in enumerate(dom.curves):
        if k in skip:
            continue
        ds.append(cur.distance_to(p))
    return 0.5 * min(ds + [0.2 * dom.box.size])


def plan_disk(dom: Domain, target: cg.CharPoint, mode: str, *, r_max: float | None = None,
              n_dirs: int = 16) -> SurgeryPlan:
    if mode not in MODES:
        raise ValueError(f"unknown mode {mode!r}")
    _check_hypothesis(dom, target)
    p = np.asarray(target.location, dtype=float)
    case_curves = target.curves
    if target.kind != "Crossing":
        for c in dom.crossings:
            if math.dist(c.location, target.location) <= 10 * dom.scene.merge_tol:
                case_curves = c.curves
    w = _inward(dom, p, case_curves)
    base = math.atan2(-w[1], -w[0])
    r = _initial_radius(dom, target, case_curves)
    if r_max is not None:
        r = min(r, r_max)
    gap = max(1e-6 * dom.box.size, 1e3 * dom.scene.merge_tol)
    for _ in range(MAX_HALVINGS):
        gap_r = min(gap, 1e-3 * r)
        for i in range(n_dirs):
            # directions fan out around the outward normal, alternating sides
            k = (i + 1) // 2
            ang = base + (1 if i % 2 else -1) * k * (math.pi / (n_dirs + 2))
            ang += 0.1 * ((i * GOLDEN) % 1.0 - 0.5) * (math.pi / n_dirs)
            u = np.array([math.cos(ang), math.sin(ang)])
            for frac in (0.6, 0.8, 0.4, 0.9, 0.95, 0.98, 0.995):
                c = tuple(map(float, p + frac * r * u))
                res = _candidate(dom, target, c, r, gap_r)
                if res is not None:
                    contacts, case = res
                    return SurgeryPlan(target, Poly2.circle(c[0], c[1], r), c, (r, r),
                                       contacts, case, mode)
        r *= 0.5
    raise NoValidRadius("no admissible disk around the defect", at=list(target.location))


def apply_plan(dom: Domain, plan: SurgeryPlan) -> Domain:
    c, r = plan.center, plan.radii[0]
    if math.dist(c, dom.scene.seed) <= r:
        raise SeedSwallowed("the seed lies inside the inserted disk", seed=list(dom.scene.seed))
    scene = dom.scene.with_curve(plan.conic)
    try:
        new = build_domain(scene, ndtl_same_curve_only=dom.ndtl_same_curve_only)
    except (ValidationError, AlgDomainError) as e:
        if isinstance(e, SeedSwallowed):
            raise
        raise ValidationFailed("the modified scene is not a valid domain", cause=e.code) from e
    return new


def _same_graphs(ref: dict, dom: Domain) -> bool:
    for axis in ("X", "Y"):
        try:
            g = poincare_reeb(dom, axis)
        except AlgDomainError:
            return False
        if not vdigraph_isomorphic(ref[axis], g, "height_order", tol=1e-9 * dom.box.size):
            return False
    return True


def _key(dom: Domain, p: cg.CharPoint):
    return tuple(np.round(np.asarray(p.location) / (100 * dom.scene.merge_tol)).astype(int))


def desingularize(dom: Domain, mode: str, *, log: list | None = None) -> Domain:
    """Insert circles until the domain has no defect of the given kind."""
    if mode not in MODES:
        raise ValueError(f"unknown mode {mode!r}")
    rep = classify_morse(dom)
    if not rep.morse:
        raise NotMorse("domain is not Morse", witnesses=[list(w.location) for w in rep.witnesses])
    todo = defects(dom, mode)
    for t in todo:
        _check_hypothesis(dom, t)
    ref = {a: poincare_reeb(dom, a) for a in ("X", "Y")}
    cap = max(1, 8 * len(todo))
    cur = dom
    it = 0
    while todo:
        if it >= cap:
            raise IterationCapReached("surgery did not converge", remaining=len(todo))
        it += 1
        target = todo[0]
        r_max = None
        for _attempt in range(8):
            plan = plan_disk(cur, target, mode, r_max=r_max)
            try:
                nxt = apply_plan(cur, plan)
                ok = classify_morse(nxt).morse and _same_graphs(ref, nxt)
            except ValidationFailed:
                ok = False
            if ok:
                break
            r_max = 0.5 * plan.radii[0]
        else:
            raise GraphChanged("no admissible disk preserves the Poincaré-Reeb graphs",
                               at=list(target.location))
        if log is not None:
            log.append(plan)
        cur = nxt
        new_todo = defects(cur, mode)
        for t in new_todo:
            _check_hypothesis(cur, t)
        todo = new_todo
    if not _same_graphs(ref, cur):
        raise GraphChanged("Poincaré-Reeb graph changed by surgery")
    return cur
