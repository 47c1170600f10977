"""Cylindrical decomposition of a box cut by a family of curves.

The sweep coordinate is ``u`` and the fiber coordinate is ``v`` (for the
y-direction sweep the polynomials are transposed first). Stations are the
u-values where the arrangement changes combinatorially: poles of every
curve, pairwise crossings and the points where curves meet the two
horizontal box edges. Between stations the curves restricted to a vertical
line have a fixed number of roots in a fixed order, so the gaps between
roots ("cells") have a stable identity. Cells of neighbouring slabs are
glued through the open intervals of the station fiber; the resulting
union-find classes are the connected components ("faces") of the
complement.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import IdenticallyZero, MembershipUndecided, SweepMatchingAmbiguous
from .polynomials import Poly2, isolate_univariate_roots, restrict_to_segment

OUTSIDE = ("out",)


class UnionFind:
    def __init__(self):
        self.parent: dict = {}

    def find(self, a):
        p = self.parent.setdefault(a, a)
        if p == a:
            return a
        root = self.find(p)
        self.parent[a] = root
        return root

    def union(self, a, b):
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            # keep OUTSIDE as the representative so it is easy to test
            if rb == OUTSIDE:
                ra, rb = rb, ra
            self.parent[rb] = ra


def transpose(p: Poly2) -> Poly2:
    return Poly2({(j, i): c for (i, j), c in p})


@dataclass
class StationFiber:
    t: float
    points: list  # [(v, frozenset(curves))] sorted by v
    left_map: list  # per left-slab cell: ("iv", lo_idx, hi_idx) or ("pt", idx)
    right_map: list


class Sweep:
    def __init__(self, polys, box, events, merge_tol: float, root_tol: float | None = None):
        """``box`` is (u_lo, u_hi, v_lo, v_hi); ``events`` are candidate
        station coordinates (they are clipped and merged here)."""
        self.polys = list(polys)
        self.u_lo, self.u_hi, self.v_lo, self.v_hi = map(float, box)
        self.size = max(self.u_hi - self.u_lo, self.v_hi - self.v_lo)
        self.root_tol = root_tol if root_tol is not None else 1e-13 * self.size
        self.merge_tol = merge_tol
        self._cache: dict = {}
        self.stations, self.spreads = self._merge(sorted(e for e in events
                                                         if self.u_lo < e < self.u_hi))
        self.bounds = [self.u_lo] + self.stations + [self.u_hi]
        n = len(self.stations)
        self.eps = []
        for k in range(n):
            gap = min(self.bounds[k + 1] - self.bounds[k], self.bounds[k + 2] - self.bounds[k + 1])
            e = max(1e-7 * self.size, 4.0 * self.spreads[k])
            e = min(e, 0.25 * gap)
            if e <= self.spreads[k]:
                raise SweepMatchingAmbiguous("stations too close to separate", t=self.stations[k])
            self.eps.append(e)
        self.slab_roots = [self.roots(0.5 * (self.bounds[s] + self.bounds[s + 1]))
                           for s in range(n + 1)]
        self.slab_counts = [self._counts(r) for r in self.slab_roots]
        self.uf = UnionFind()
        self.station_fibers: list[StationFiber] = []
        self._glue()

    # ------------------------------------------------------------ roots

    def _merge(self, ev):
        groups: list[list[float]] = []
        for e in ev:
            if groups and e - groups[-1][-1] <= self.merge_tol:
                groups[-1].append(e)
            else:
                groups.append([e])
        return [0.5 * (g[0] + g[-1]) for g in groups], [g[-1] - g[0] for g in groups]

    def curve_roots(self, j: int, t: float) -> list[tuple[float, bool]]:
        """Roots (v, odd, halfwidth) of curve j on the fiber u = t."""
        key = (j, t)
        hit = self._cache.get(key)
        if hit is not None:
            return hit
        p1 = restrict_to_segment(self.polys[j], (t, self.v_lo), (t, self.v_hi))
        try:
            ris = isolate_univariate_roots(p1, 0.0, 1.0, self.root_tol / (self.v_hi - self.v_lo))
        except IdenticallyZero:
            raise IdenticallyZero("a curve contains a whole fiber line", curve=j, t=t)
        span = self.v_hi - self.v_lo
        out = [(self.v_lo + r.mid * span, r.multiplicity_parity == "odd", 0.5 * r.width * span)
               for r in ris]
        if len(self._cache) > 20000:
            self._cache.clear()
        self._cache[key] = out
        return out

    def roots(self, t: float) -> list[tuple[float, int]]:
        out = []
        for j in range(len(self.polys)):
            out += [(r[0], j) for r in self.curve_roots(j, t)]
        out.sort()
        return out

    def _counts(self, roots) -> tuple:
        c = [0] * len(self.polys)
        for _, j in roots:
            c[j] += 1
        return tuple(c)

    def slab_of(self, u: float) -> int:
        return int(np.searchsorted(self.stations, u))

    def station_near(self, u: float, frac: float = 0.5) -> int | None:
        if not self.stations:
            return None
        k = int(np.argmin(np.abs(np.array(self.stations) - u)))
        if abs(self.stations[k] - u) <= frac * self.eps[k]:
            return k
        return None

    # ------------------------------------------------------------ gluing

    def _station_points(self, t: float):
        raw = []
        for j in range(len(self.polys)):
            raw += [(r[0], j, r[2]) for r in self.curve_roots(j, t)]
        raw.sort()
        pts: list[list] = []
        tol = max(1e-9 * self.size, 4 * self.merge_tol)
        reach = -math.inf
        for v, j, hw in raw:
            if pts and v - hw - reach <= tol:
                pts[-1][0].append(v)
                pts[-1][1].add(j)
                reach = max(reach, v + hw)
            else:
                pts.append([[v], {j}])
                reach = v + hw
        return [(float(np.mean(vs)), frozenset(js)) for vs, js in pts]

    def _limit_map(self, side_roots, points):
        """Map each root of the side fiber to a station point index (or -1 /
        len(points) for the lower / upper box edge)."""
        m = len(points)
        out = []
        for v, j in side_roots:
            best, bd = None, math.inf
            for idx, (pv, js) in enumerate(points):
                if j in js and abs(pv - v) < bd:
                    best, bd = idx, abs(pv - v)
            for idx, ev in ((-1, self.v_lo), (m, self.v_hi)):
                if abs(ev - v) < bd:
                    best, bd = idx, abs(ev - v)
            if best is None:
                raise SweepMatchingAmbiguous("fiber root has no limit on the station", v=v, curve=j)
            out.append(best)
        return out

    def _consistent_limits(self, left, right, pts):
        """Limit maps for both sides. Station points whose order contradicts
        the side fibers lie inside each other's rounding clusters (possible
        only at degenerate points) and are merged."""
        for _ in range(len(pts) + 1):
            lims = [self._limit_map(left, pts), self._limit_map(right, pts)]
            bad = None
            for lim in lims:
                for a, b in zip(lim, lim[1:]):
                    if b < a:
                        bad = (b, a)
                        break
                if bad:
                    break
            if bad is None:
                return pts, lims
            i0, i1 = bad
            if i0 < 0 or i1 >= len(pts):
                break
            group = pts[i0:i1 + 1]
            merged = (float(np.mean([g[0] for g in group])), frozenset().union(*[g[1] for g in group]))
            pts = pts[:i0] + [merged] + pts[i1 + 1:]
        raise SweepMatchingAmbiguous("root order not preserved at station")

    @staticmethod
    def _cell_maps(lim, m):
        bounds = [-1] + lim + [m]
        maps = []
        for k in range(len(lim) + 1):
            a, b = bounds[k], bounds[k + 1]
            if a == b:
                maps.append(("pt", a))
            else:
                # station intervals a+1 .. b (interval i lies between points i-1 and i)
                maps.append(("iv", a + 1, b))
        return maps

    def _side_roots(self, k: int):
        """Roots on both sides of station k. The offset grows until the side
        fibers look like their slabs: near a pole the two roots stay within
        rounding noise of each other for very small offsets."""
        t = self.stations[k]
        gap = min(self.bounds[k + 1] - self.bounds[k], self.bounds[k + 2] - self.bounds[k + 1])
        e = self.eps[k]
        while True:
            left = self.roots(t - e)
            right = self.roots(t + e)
            if self._counts(left) == self.slab_counts[k] and self._counts(right) == self.slab_counts[k + 1]:
                self.eps[k] = e
                return left, right
            if e >= 0.25 * gap:
                raise SweepMatchingAmbiguous("root count changes inside a slab", t=t)
            e = min(10.0 * e, 0.25 * gap)

    def _glue(self):
        uf = self.uf
        n = len(self.stations)
        # cells touching the box boundary
        for s, roots in enumerate(self.slab_roots):
            ncell = len(roots) + 1
            uf.union(OUTSIDE, ("c", s, 0))
            uf.union(OUTSIDE, ("c", s, ncell - 1))
            if s == 0 or s == n:
                for k in range(ncell):
                    uf.union(OUTSIDE, ("c", s, k))
        for k, t in enumerate(self.stations):
            left, right = self._side_roots(k)
            pts, (llim, rlim) = self._consistent_limits(left, right, self._station_points(t))
            m = len(pts)
            lmap = self._cell_maps(llim, m)
            rmap = self._cell_maps(rlim, m)
            uf.union(OUTSIDE, ("i", k, 0))
            uf.union(OUTSIDE, ("i", k, m))
            for s, maps in ((k, lmap), (k + 1, rmap)):
                for c, mp in enumerate(maps):
                    if mp[0] == "iv":
                        for i in range(mp[1], mp[2] + 1):
                            uf.union(("c", s, c), ("i", k, i))
            self.station_fibers.append(StationFiber(t, pts, lmap, rmap))

    # ------------------------------------------------------------ queries

    def face(self, node):
        return self.uf.find(node)

    def locate(self, u: float, v: float, on_tol: float):
        """Node (cell or station interval) containing the point, or raise."""
        k = self.station_near(u, 1e-3)
        if k is not None:
            sf = self.station_fibers[k]
            vs = [p[0] for p in sf.points]
            for pv in vs:
                if abs(pv - v) <= on_tol:
                    return ("on", k, vs.index(pv))
            return ("i", k, int(np.searchsorted(vs, v)))
        s = self.slab_of(u)
        roots = self.roots(u)
        if self._counts(roots) != self.slab_counts[s]:
            raise MembershipUndecided("fiber too close to a station", u=u)
        vs = [r[0] for r in roots]
        for pv, j in roots:
            if abs(pv - v) <= on_tol:
                return ("on", s, vs.index(pv))
        return ("c", s, int(np.searchsorted(vs, v)))

    def adjacent_nodes(self, u: float, v: float, j: int):
        """Nodes whose closure contains the curve-j point (u, v)."""
        k = self.station_near(u, 1e-3)
        if k is None:
            s = self.slab_of(u)
            roots = self.roots(u)
            if self._counts(roots) != self.slab_counts[s]:
                k = self.station_near(u, 1.0)
                if k is None:
                    raise MembershipUndecided("fiber too close to a station", u=u)
            else:
                cands = [i for i, (pv, jj) in enumerate(roots) if jj == j]
                if not cands:
                    raise MembershipUndecided("curve root not found on fiber", u=u, v=v)
                i = min(cands, key=lambda i: abs(roots[i][0] - v))
                return [("c", s, i), ("c", s, i + 1)]
        sf = self.station_fibers[k]
        idx = min(range(len(sf.points)), key=lambda i: abs(sf.points[i][0] - v))
        out = [("i", k, idx), ("i", k, idx + 1)]
        for s, maps in ((k, sf.left_map), (k + 1, sf.right_map)):
            for c, mp in enumerate(maps):
                if mp == ("pt", idx):
                    out.append(("c", s, c))
        return out
