"""Poincaré-Reeb V-digraphs of a domain for the two coordinate projections.

Fibers of the closure are read off the sweep decomposition: inside a slab
the closure meets a fiber line in runs of consecutive domain cells; at a
station the fiber is assembled from the station's open intervals and the
curve points adjacent to domain cells. Station components hosting a
characteristic point become vertices, every other station component must
continue exactly one component on each side, and chains of those are
contracted into edges oriented by increasing height.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .curvegeo import axis_name
from .domain import Domain, classify_morse
from .errors import NotMorse, SweepMatchingAmbiguous, TooLarge

MAX_VERTICES = 64


@dataclass
class Fiber:
    t: float
    intervals: list  # [(a, b)] sorted, closed, possibly degenerate
    component_ids: list


@dataclass
class VDigraph:
    vertices: list  # [{"id": int, "height": float, "provenance": dict}]
    edges: list  # [(from, to)]

    def __post_init__(self):
        self.edges = [tuple(e) for e in self.edges]

    @property
    def heights(self) -> dict:
        return {v["id"]: v["height"] for v in self.vertices}

    def degrees(self) -> dict:
        d = {v["id"]: [0, 0] for v in self.vertices}
        for a, b in self.edges:
            d[a][1] += 1
            d[b][0] += 1
        return d

    def betti1(self) -> int:
        return len(self.edges) - len(self.vertices) + self.n_components()

    def n_components(self) -> int:
        parent = {v["id"]: v["id"] for v in self.vertices}

        def find(a):
            while parent[a] != a:
                parent[a] = parent[parent[a]]
                a = parent[a]
            return a
        for a, b in self.edges:
            parent[find(a)] = find(b)
        return len({find(v) for v in parent})

    def is_connected(self) -> bool:
        return self.n_components() == 1

    def check_orientation(self) -> bool:
        h = self.heights
        return all(h[a] < h[b] for a, b in self.edges)

    def suppressed(self) -> "VDigraph":
        """Drop vertices with one incoming and one outgoing edge, joining the
        two edges (the homeomorphism type is unchanged)."""
        verts = {v["id"]: v for v in self.vertices}
        edges = list(self.edges)
        changed = True
        while changed:
            changed = False
            deg = {k: [0, 0] for k in verts}
            for a, b in edges:
                deg[a][1] += 1
                deg[b][0] += 1
            for k in sorted(verts):
                if deg[k] == [1, 1]:
                    ein = next(e for e in edges if e[1] == k)
                    eout = next(e for e in edges if e[0] == k)
                    if ein[0] == k:
                        continue
                    edges.remove(ein)
                    edges.remove(eout)
                    edges.append((ein[0], eout[1]))
                    del verts[k]
                    changed = True
                    break
        return VDigraph([verts[k] for k in sorted(verts)], sorted(edges))

    def to_json(self) -> dict:
        return {"vertices": [{"id": v["id"], "height": v["height"]} for v in self.vertices],
                "edges": [{"from": a, "to": b} for a, b in self.edges]}

    @classmethod
    def from_json(cls, obj) -> "VDigraph":
        return cls([{"id": int(v["id"]), "height": float(v["height"]), "provenance": {}}
                    for v in obj["vertices"]],
                   [(int(e["from"]), int(e["to"])) for e in obj["edges"]])

    def to_dot(self, name: str = "reeb") -> str:
        lines = [f"digraph {name} {{", "  rankdir=LR;"]
        for v in self.vertices:
            lines.append(f'  v{v["id"]} [label="{v["id"]}\\n{v["height"]:.6g}"];')
        by_h: dict = {}
        for v in self.vertices:
            by_h.setdefault(round(v["height"], 9), []).append(v["id"])
        for _h, ids in sorted(by_h.items()):
            lines.append("  { rank=same; " + " ".join(f"v{i};" for i in ids) + " }")
        for a, b in self.edges:
            lines.append(f"  v{a} -> v{b};")
        lines.append("}")
        return "\n".join(lines) + "\n"


# ------------------------------------------------------------------ fibers

def _slab_components(dom: Domain, axis: str, s: int):
    sw = dom.sweeps[axis]
    roots = sw.slab_roots[s]
    runs, cur = [], None
    for c in range(len(roots) + 1):
        if dom.in_domain(("c", s, c), axis):
            if cur is None:
                cur = [c]
            else:
                cur.append(c)
        elif cur is not None:
            runs.append(cur)
            cur = None
    if cur is not None:
        runs.append(cur)
    return runs


def _station_components(dom: Domain, axis: str, k: int):
    """Runs of the closure along the station fiber, as lists of elements
    ("i", idx) / ("p", idx) with their v-extent."""
    sw = dom.sweeps[axis]
    sf = sw.station_fibers[k]
    m = len(sf.points)
    d_int = [dom.in_domain(("i", k, i), axis) for i in range(m + 1)]
    d_pt = [d_int[i] or d_int[i + 1] for i in range(m)]
    for s, maps in ((k, sf.left_map), (k + 1, sf.right_map)):
        for c, mp in enumerate(maps):
            if mp[0] == "pt" and 0 <= mp[1] < m and dom.in_domain(("c", s, c), axis):
                d_pt[mp[1]] = True
    seq = []
    for i in range(m + 1):
        seq.append((("i", i), d_int[i]))
        if i < m:
            seq.append((("p", i), d_pt[i]))
    comps, cur = [], None
    for el, inside in seq:
        if inside:
            cur = [el] if cur is None else cur + [el]
        elif cur is not None:
            comps.append(cur)
            cur = None
    if cur is not None:
        comps.append(cur)
    out = []
    for comp in comps:
        def lo(el):
            return sf.points[el[1]][0] if el[0] == "p" else sf.points[el[1] - 1][0]

        def hi(el):
            return sf.points[el[1]][0] if el[0] == "p" else sf.points[el[1]][0]
        out.append((comp, lo(comp[0]), hi(comp[-1])))
    return out


def fiber_at(dom: Domain, axis, t: float) -> Fiber:
    axis = axis_name(axis)
    sw = dom.sweeps[axis]
    if not sw.u_lo < t < sw.u_hi:
        raise ValueError("t outside the box range")
    k = sw.station_near(t, 1e-3)
    if k is not None:
        comps = _station_components(dom, axis, k)
        return Fiber(sw.stations[k], [(a, b) for _c, a, b in comps],
                     [("station", k, i) for i in range(len(comps))])
    s = sw.slab_of(t)
    roots = sw.roots(t)
    if sw._counts(roots) != sw.slab_counts[s]:
        k = sw.station_near(t, 1.0)
        return fiber_at(dom, axis, sw.stations[k])
    vs = [sw.v_lo] + [r[0] for r in roots] + [sw.v_hi]
    runs = _slab_components(dom, axis, s)
    return Fiber(t, [(vs[r[0]], vs[r[-1] + 1]) for r in runs], [("slab", s, i) for i in range(len(runs))])


def fiber_at_critical(dom: Domain, axis, t: float) -> Fiber:
    axis = axis_name(axis)
    sw = dom.sweeps[axis]
    k = sw.station_near(t, 1.0)
    if k is None:
        return fiber_at(dom, axis, t)
    comps = _station_components(dom, axis, k)
    return Fiber(sw.stations[k], [(a, b) for _c, a, b in comps],
                 [("station", k, i) for i in range(len(comps))])


# ------------------------------------------------------------------ graph

def poincare_reeb(dom: Domain, axis, *, require_morse: bool = True) -> VDigraph:
    axis = axis_name(axis)
    if require_morse:
        rep = classify_morse(dom)
        if not rep.morse:
            raise NotMorse("domain is not Morse", witnesses=[list(w.location) for w in rep.witnesses])
    key = ("reeb", axis)
    cached = dom.__dict__.setdefault("_reeb", {})
    if key in cached:
        return cached[key]
    sw = dom.sweeps[axis]
    kx = 0 if axis == "X" else 1
    chars = [(p.location[kx], p.location[1 - kx], p) for p in dom.char_sets[axis]]
    n = len(sw.stations)
    slabs = [_slab_components(dom, axis, s) for s in range(n + 1)]
    stations = [_station_components(dom, axis, k) for k in range(n)]

    def station_comp_of(k, mp):
        for ci, (els, _a, _b) in enumerate(stations[k]):
            if mp[0] == "pt":
                if ("p", mp[1]) in els:
                    return ci
            else:
                if any(("i", i) in els for i in range(mp[1], mp[2] + 1)):
                    return ci
        raise SweepMatchingAmbiguous("domain cell has no limit component", station=k)

    # slab component -> (left station comp, right station comp)
    left_of, right_of = {}, {}
    st_left: dict = {}
    st_right: dict = {}
    for s in range(n + 1):
        for ri, run in enumerate(slabs[s]):
            if s == 0 or s == n:
                raise SweepMatchingAmbiguous("domain reaches the box side")
            kl, kr = s - 1, s
            lc = {station_comp_of(kl, sw.station_fibers[kl].right_map[c]) for c in run}
            rc = {station_comp_of(kr, sw.station_fibers[kr].left_map[c]) for c in run}
            if len(lc) != 1 or len(rc) != 1:
                raise SweepMatchingAmbiguous("slab component splits at a station", slab=s)
            left_of[(s, ri)] = (kl, lc.pop())
            right_of[(s, ri)] = (kr, rc.pop())
            st_right.setdefault(left_of[(s, ri)], []).append((s, ri))
            st_left.setdefault(right_of[(s, ri)], []).append((s, ri))

    tol_v = max(10 * dom.scene.merge_tol, 1e-9 * sw.size)
    vert_of: dict = {}
    vertices = []
    for k in range(n):
        t = sw.stations[k]
        for ci, (_els, a, b) in enumerate(stations[k]):
            hosted = [p for u, v, p in chars
                      if abs(u - t) <= sw.eps[k] and a - tol_v <= v <= b + tol_v]
            if hosted:
                vert_of[(k, ci)] = len(vertices)
                vertices.append({"id": len(vertices), "height": t,
                                 "provenance": {"station": t, "interval": [a, b],
                                                "charpoints": [p.to_json() for p in hosted]}})
            else:
                nl, nr = len(st_left.get((k, ci), [])), len(st_right.get((k, ci), []))
                if (nl, nr) != (1, 1):
                    raise SweepMatchingAmbiguous("topology changes at a station without a characteristic point",
                                                 t=t, interval=[a, b], left=nl, right=nr)
    edges = []
    for (k, ci), vid in vert_of.items():
        for sc in st_right.get((k, ci), []):
            cur = sc
            while True:
                nxt = right_of[cur]
                if nxt in vert_of:
                    edges.append((vid, vert_of[nxt]))
                    break
                cur = st_right[nxt][0]
    if len(vertices) > 10 * MAX_VERTICES:
        raise TooLarge("Reeb graph unexpectedly large")
    g = VDigraph(vertices, sorted(edges))
    assert g.check_orientation()
    cached[key] = g
    return g


# ------------------------------------------------------------------ isomorphism

def vdigraph_isomorphic(g1: VDigraph, g2: VDigraph, mode: str = "height_order", tol: float = 1e-9,
                        suppress: bool = True) -> bool:
    """Decide whether two V-digraphs are isomorphic.

    ``orientation`` compares directed multigraphs; ``height_order`` also asks
    the vertex bijection not to invert heights that differ by more than
    ``tol``; ``exact_height`` asks heights to agree within ``tol``. With
    ``suppress`` (the default) vertices with one incoming and one outgoing
    edge are smoothed out first, so the comparison is up to homeomorphism.
    """
    if mode not in ("orientation", "height_order", "exact_height"):
        raise ValueError(f"unknown mode {mode!r}")
    if suppress:
        g1, g2 = g1.suppressed(), g2.suppressed()
    if len(g1.vertices) > MAX_VERTICES or len(g2.vertices) > MAX_VERTICES:
        raise TooLarge("graphs are capped at 64 vertices")
    if len(g1.vertices) != len(g2.vertices) or len(g1.edges) != len(g2.edges):
        return False
    ids1 = [v["id"] for v in g1.vertices]
    ids2 = [v["id"] for v in g2.vertices]
    h1, h2 = g1.heights, g2.heights
    d1, d2 = g1.degrees(), g2.degrees()

    def mult(g):
        m: dict = {}
        for a, b in g.edges:
            m[(a, b)] = m.get((a, b), 0) + 1
        return m
    m1, m2 = mult(g1), mult(g2)

    def rank(h, ids):
        vals = sorted(h[i] for i in ids)
        return {i: sum(1 for x in vals if x < h[i] - tol) for i in ids}
    r1, r2 = rank(h1, ids1), rank(h2, ids2)

    def compatible(a, b) -> bool:
        if d1[a] != d2[b]:
            return False
        if mode == "exact_height" and abs(h1[a] - h2[b]) > tol:
            return False
        return True

    order = sorted(ids1, key=lambda i: (h1[i], i))
    cand = {a: [b for b in ids2 if compatible(a, b)] for a in ids1}
    if any(not c for c in cand.values()):
        return False
    mapping: dict = {}
    used: set = set()

    def consistent(a, b) -> bool:
        for x, y in mapping.items():
            if m1.get((a, x), 0) != m2.get((b, y), 0) or m1.get((x, a), 0) != m2.get((y, b), 0):
                return False
            if mode == "height_order":
                if h1[a] < h1[x] - tol and h2[b] > h2[y] + tol:
                    return False
                if h1[a] > h1[x] + tol and h2[b] < h2[y] - tol:
                    return False
        if m1.get((a, a), 0) != m2.get((b, b), 0):
            return False
        return True

    def search(i: int) -> bool:
        if i == len(order):
            return True
        a = order[i]
        for b in cand[a]:
            if b in used or not consistent(a, b):
                continue
            mapping[a] = b
            used.add(b)
            if search(i + 1):
                return True
            del mapping[a]
            used.discard(b)
        return False

    return search(0)


def path_graph(h0: float, h1: float) -> VDigraph:
    return VDigraph([{"id": 0, "height": h0, "provenance": {}}, {"id": 1, "height": h1, "provenance": {}}],
                    [(0, 1)])
