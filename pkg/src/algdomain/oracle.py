"""Brute-force ground truth on a raster.

Nothing here shares code with the certified path beyond polynomial
evaluation: membership is a flood fill of the seed's sign pattern, Reeb
graphs come from linking pixel runs of adjacent columns, and the
differential-geometric counts come from marching-squares contours.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import ndimage
from skimage import measure

from . import kernels
from .curvegeo import axis_name, curvature_derivative_numerator, curvature_numerator, gradient_norm2
from .polynomials import Box, Poly2
from .reeb import VDigraph

CROSS = ndimage.generate_binary_structure(2, 1)
SQUARE = ndimage.generate_binary_structure(2, 2)


@dataclass
class GridMask:
    """Membership of cell centres; ``mask[i, j]`` is row i (y) and column j (x)."""

    resolution: int
    box: Box
    mask: np.ndarray

    @property
    def cell(self) -> tuple[float, float]:
        return self.box.width / self.resolution, self.box.height / self.resolution

    def centers(self, axis: int) -> np.ndarray:
        lo, hi = self.box.range(axis)
        h = (hi - lo) / self.resolution
        return lo + (np.arange(self.resolution) + 0.5) * h

    @property
    def touches_border(self) -> bool:
        m = self.mask
        return bool(m[0].any() or m[-1].any() or m[:, 0].any() or m[:, -1].any())

    def area(self) -> float:
        cx, cy = self.cell
        return float(self.mask.sum()) * cx * cy

    def hole_count(self) -> int:
        """Bounded components of the complement (8-connected, dual to the
        4-connected foreground)."""
        bg = np.pad(~self.mask, 1, constant_values=True)
        _lab, n = ndimage.label(bg, structure=SQUARE)
        return n - 1


def grid_mask(scene, resolution: int = 512) -> GridMask:
    if resolution < 64:
        raise ValueError("resolution must be at least 64")
    box = scene.box
    xs = box.x_lo + (np.arange(resolution) + 0.5) * box.width / resolution
    ys = box.y_lo + (np.arange(resolution) + 0.5) * box.height / resolution
    X, Y = np.meshgrid(xs, ys)
    same = np.ones_like(X, dtype=bool)
    sx, sy = scene.seed
    for f in scene.curves:
        v = f.evaluate(X.ravel(), Y.ravel()).reshape(X.shape)
        same &= np.sign(v) == np.sign(f(sx, sy))
    lab, _n = ndimage.label(same, structure=CROSS)
    i = min(int((sy - box.y_lo) / box.height * resolution), resolution - 1)
    j = min(int((sx - box.x_lo) / box.width * resolution), resolution - 1)
    k = lab[i, j]
    if k == 0:
        # seed cell centre fell on the other side of a curve; use the nearest same-sign cell
        ii, jj = np.nonzero(same)
        n = int(np.argmin((ii - i) ** 2 + (jj - j) ** 2))
        k = lab[ii[n], jj[n]]
    return GridMask(resolution, box, lab == k)


def _runs_graph(mask: np.ndarray, coords: np.ndarray) -> VDigraph:
    """Reeb graph of the projection onto the column index."""
    runs = kernels.column_runs(mask)
    ncol = len(runs)
    # links between runs of adjacent columns by overlap of half-open intervals
    right = {}
    left = {}
    for c in range(ncol - 1):
        a, b = runs[c], runs[c + 1]
        i = k = 0
        while i < len(a) and k < len(b):
            if a[i][0] < b[k][1] and b[k][0] < a[i][1]:
                right.setdefault((c, i), []).append((c + 1, k))
                left.setdefault((c + 1, k), []).append((c, i))
            if a[i][1] <= b[k][1]:
                i += 1
            else:
                k += 1
    vertices, vid = [], {}
    edges = []

    def add_vertex(node, height):
        vid[node] = len(vertices)
        vertices.append({"id": len(vertices), "height": float(height), "provenance": {"run": list(node)}})
        return vid[node]

    # a run with several links on both sides stands for a merge followed by a split
    outlet = {}
    for c in range(ncol):
        for i in range(len(runs[c])):
            node = (c, i)
            nl, nr = len(left.get(node, [])), len(right.get(node, []))
            if (nl, nr) == (1, 1):
                continue
            v = add_vertex(node, coords[c])
            outlet[node] = v
            if nl >= 2 and nr >= 2:
                w = add_vertex((c, i, "split"), coords[c])
                vertices[w]["height"] = float(coords[c])
                edges.append((v, w))
                outlet[node] = w
    for node, v in list(outlet.items()):
        for nxt in right.get(node, []):
            cur = nxt
            while cur not in vid:
                cur = right[cur][0]
            edges.append((v, vid[cur]))
    g = VDigraph(vertices, sorted(edges))
    # equal heights from the merge/split expansion: nudge the split vertex up
    cell = abs(coords[1] - coords[0]) if len(coords) > 1 else 1.0
    for a, b in g.edges:
        if g.vertices[b]["height"] <= g.vertices[a]["height"]:
            g.vertices[b]["height"] = g.vertices[a]["height"] + 0.5 * cell
    return g


def grid_reeb(scene, axis, resolution: int = 512) -> VDigraph:
    axis = axis_name(axis)
    gm = grid_mask(scene, resolution)
    if axis == "X":
        return _runs_graph(gm.mask, gm.centers(0))
    return _runs_graph(gm.mask.T, gm.centers(1))


def cell_tolerance(scene, resolution: int) -> float:
    """Height tolerance for comparing a grid graph with the exact one."""
    return 2.0 * max(scene.box.width, scene.box.height) / resolution


# ------------------------------------------------------------------ diffgeo

def _contours(f: Poly2, box: Box, resolution: int):
    xs = np.linspace(box.x_lo, box.x_hi, resolution)
    ys = np.linspace(box.y_lo, box.y_hi, resolution)
    X, Y = np.meshgrid(xs, ys)
    F = f.evaluate(X.ravel(), Y.ravel()).reshape(X.shape)
    out = []
    for c in measure.find_contours(F, 0.0):
        pts = np.column_stack([np.interp(c[:, 1], np.arange(resolution), xs),
                               np.interp(c[:, 0], np.arange(resolution), ys)])
        closed = bool(np.allclose(c[0], c[-1]))
        if closed:
            pts = pts[:-1]
        if len(pts) >= 8:
            out.append((pts, closed))
    return out


def _sign_changes(v: np.ndarray, closed: bool, floor: float) -> int:
    s = np.sign(np.where(np.abs(v) <= floor, 0.0, v))
    s = s[s != 0]
    if s.size < 2:
        return 0
    n = int(np.count_nonzero(s[1:] != s[:-1]))
    if closed and s[0] != s[-1]:
        n += 1
    return n


def _trim(pts: np.ndarray, closed: bool, box: Box, margin: float) -> np.ndarray:
    """Drop samples near the box so clipped ends do not count."""
    if closed:
        return np.ones(len(pts), dtype=bool)
    d = np.minimum.reduce([pts[:, 0] - box.x_lo, box.x_hi - pts[:, 0], pts[:, 1] - box.y_lo, box.y_hi - pts[:, 1]])
    return d > margin


def _bitangent_count(f: Poly2, polys, box: Box, n: int = 700) -> int:
    # resample every contour by arclength and stack them
    samples, tans = [], []
    total = sum(np.sum(np.hypot(*np.diff(p, axis=0).T)) for p, _c in polys) or 1.0
    for pts, closed in polys:
        seg = np.hypot(*np.diff(np.vstack([pts, pts[:1]]) if closed else pts, axis=0).T)
        s = np.concatenate([[0.0], np.cumsum(seg)])
        m = max(16, int(n * s[-1] / total))
        t = np.linspace(0, s[-1], m, endpoint=not closed)
        ring = np.vstack([pts, pts[:1]]) if closed else pts
        q = np.column_stack([np.interp(t, s, ring[:, 0]), np.interp(t, s, ring[:, 1])])
        g = np.array([f.dx.evaluate(q[:, 0], q[:, 1]), f.dy.evaluate(q[:, 0], q[:, 1])]).T
        tan = np.column_stack([-g[:, 1], g[:, 0]])
        tan /= np.linalg.norm(tan, axis=1)[:, None]
        samples.append(q)
        tans.append(tan)
    count = 0
    sep = 0.02 * box.size
    for a in range(len(samples)):
        P, T = samples[a], tans[a]
        # g1: tangents parallel, g2: p_j on the tangent line at p_i
        g1 = T[:, 0][:, None] * T[:, 1][None, :] - T[:, 1][:, None] * T[:, 0][None, :]
        dx = P[:, 0][None, :] - P[:, 0][:, None]
        dy = P[:, 1][None, :] - P[:, 1][:, None]
        g2 = T[:, 0][:, None] * dy - T[:, 1][:, None] * dx
        cand = _cells_with_common_zero(g1, g2)
        i, j = np.nonzero(cand)
        keep = (j > i) & (np.hypot(dx[i, j], dy[i, j]) > sep)
        sel = np.zeros_like(cand)
        sel[i[keep], j[keep]] = True
        _lab, k = ndimage.label(sel, structure=SQUARE)
        count += k
    return count


def _cells_with_common_zero(g1: np.ndarray, g2: np.ndarray) -> np.ndarray:
    def changes(g):
        s = np.sign(g)
        c = np.stack([s[:-1, :-1], s[1:, :-1], s[:-1, 1:], s[1:, 1:]])
        return (c.max(axis=0) > 0) & (c.min(axis=0) < 0)
    return changes(g1) & changes(g2)


def sampled_diffgeo_scan(f: Poly2, box: Box, resolution: int = 1024) -> dict:
    polys = _contours(f, box, resolution)
    margin = 4 * box.size / resolution
    N = curvature_numerator(f)
    M = curvature_derivative_numerator(f)
    G = gradient_norm2(f)
    infl = cvs = 0
    for pts, closed in polys:
        keep = _trim(pts, closed, box, margin)
        n = N.evaluate(pts[:, 0], pts[:, 1])
        g = G.evaluate(pts[:, 0], pts[:, 1])
        kappa = n / g ** 1.5
        scale = max(1.0, float(np.max(np.abs(kappa))))
        # open curves: count only inside the trimmed part
        sub = (lambda v: v[keep]) if not closed else (lambda v: v)
        infl += _sign_changes(sub(n / g ** 1.5), closed, 1e-12 * scale)
        # dκ/ds by finite differences along the polyline
        ring = np.vstack([pts, pts[:1]]) if closed else pts
        kr = np.concatenate([kappa, kappa[:1]]) if closed else kappa
        ds = np.hypot(*np.diff(ring, axis=0).T)
        dk = np.diff(kr) / np.maximum(ds, 1e-300)
        kk = keep[:-1] & keep[1:] if not closed else np.ones(len(dk), dtype=bool)
        mval = M.evaluate(pts[:, 0], pts[:, 1])
        if np.max(np.abs(mval)) <= 1e-9 * max(1.0, float(np.max(np.abs(n)))) * float(np.max(g)) ** 1.5:
            continue  # constant curvature: no vertices
        cvs += _sign_changes(dk[kk], closed, 1e-6 * scale / box.size)
    bit = _bitangent_count(f, polys, box)
    return {"inflection_count": infl, "cv_count": cvs, "bitangent_count": bit}
