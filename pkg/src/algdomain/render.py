"""Static SVG figures of a domain.

The region is filled from a raster of the membership test, boundary curves
come from the traced polylines, characteristic points are drawn as small
markers and inserted disks are outlined. Output is byte-for-byte
deterministic: every coordinate is printed with a fixed number of decimals.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from skimage import measure

from .domain import Domain, _line_box_segment, check_flags, curve_analysis
from .oracle import grid_mask

MARKERS = {
    "Crossing": ("square", "#000000"),
    "Pole(X)": ("circle", "#1f5fbf"),
    "Pole(Y)": ("circle", "#2e8b3a"),
    "Inflection": ("triangle", "#d9731a"),
    "BitangentContact": ("diamond", "#7b3fa0"),
    "CurvatureVertex": ("cross", "#c0262d"),
}


@dataclass
class RenderStyle:
    width: int = 640
    height: int = 640
    margin: int = 16
    curve_stroke: float = 1.5
    disk_stroke: float = 1.25
    line_stroke: float = 0.75
    marker_size: float = 4.0
    fill: str = "#b4b4b4"
    curve_color: str = "#202020"
    disk_color: str = "#c0262d"
    dash: str = "2,3"
    raster: int = 256
    markers: dict = field(default_factory=lambda: dict(MARKERS))

    def __post_init__(self):
        dims = (self.width, self.height, self.curve_stroke, self.disk_stroke, self.line_stroke,
                self.marker_size, self.raster)
        if any(not d > 0 for d in dims) or self.margin < 0:
            raise ValueError("render dimensions must be positive")


class _Canvas:
    def __init__(self, box, style: RenderStyle):
        self.box = box
        self.s = style
        w = style.width - 2 * style.margin
        h = style.height - 2 * style.margin
        self.k = min(w / box.width, h / box.height)
        self.ox = style.margin + 0.5 * (w - self.k * box.width)
        self.oy = style.margin + 0.5 * (h - self.k * box.height)

    def xy(self, x, y) -> tuple[float, float]:
        return (self.ox + self.k * (x - self.box.x_lo),
                self.oy + self.k * (self.box.y_hi - y))

    def path(self, pts, closed: bool) -> str:
        parts = []
        for n, (x, y) in enumerate(pts):
            u, v = self.xy(x, y)
            parts.append(f"{'M' if n == 0 else 'L'}{u:.2f},{v:.2f}")
        return "".join(parts) + ("Z" if closed else "")


def _marker(cv: _Canvas, kind: str, p, style: RenderStyle) -> str:
    shape, color = style.markers.get(kind, ("circle", "#000000"))
    u, v = cv.xy(*p)
    r = style.marker_size
    if shape == "square":
        return f'<rect x="{u - r:.2f}" y="{v - r:.2f}" width="{2 * r:.2f}" height="{2 * r:.2f}" fill="{color}"/>'
    if shape == "triangle":
        return (f'<polygon points="{u:.2f},{v - r:.2f} {u - r:.2f},{v + r:.2f} {u + r:.2f},{v + r:.2f}" '
                f'fill="{color}"/>')
    if shape == "diamond":
        return (f'<polygon points="{u:.2f},{v - r:.2f} {u + r:.2f},{v:.2f} {u:.2f},{v + r:.2f} '
                f'{u - r:.2f},{v:.2f}" fill="{color}"/>')
    if shape == "cross":
        return (f'<path d="M{u - r:.2f},{v - r:.2f}L{u + r:.2f},{v + r:.2f}M{u - r:.2f},{v + r:.2f}'
                f'L{u + r:.2f},{v - r:.2f}" stroke="{color}" stroke-width="1.5" fill="none"/>')
    return f'<circle cx="{u:.2f}" cy="{v:.2f}" r="{r:.2f}" fill="{color}"/>'


def _region(dom: Domain, cv: _Canvas, style: RenderStyle) -> str:
    gm = grid_mask(dom.scene, style.raster)
    m = np.pad(gm.mask.astype(float), 1)
    cx, cy = gm.cell
    box = dom.box
    d = []
    for c in measure.find_contours(m, 0.5):
        # padded row/col index -> cell centre coordinates
        xs = box.x_lo + (c[:, 1] - 0.5) * cx
        ys = box.y_lo + (c[:, 0] - 0.5) * cy
        d.append(cv.path(np.column_stack([xs, ys])[:-1], True))
    if not d:
        return ""
    return f'<path d="{"".join(d)}" fill="{style.fill}" fill-rule="evenodd" stroke="none"/>'


def domain_svg(dom: Domain, *, points=None, circles=(), bitangent_lines: bool = True,
               style: RenderStyle | None = None) -> str:
    """SVG 1.1 document for ``dom``.

    ``points`` defaults to the crossings, both characteristic sets and all
    defect witnesses; ``circles`` are (center, radius) pairs to outline.
    """
    style = style or RenderStyle()
    cv = _Canvas(dom.box, style)
    out = ['<?xml version="1.0" encoding="UTF-8"?>',
           f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{style.width}" '
           f'height="{style.height}" viewBox="0 0 {style.width} {style.height}">',
           f'<rect x="0" y="0" width="{style.width}" height="{style.height}" fill="#ffffff"/>']
    u0, v0 = cv.xy(dom.box.x_lo, dom.box.y_hi)
    out.append(f'<rect x="{u0:.2f}" y="{v0:.2f}" width="{cv.k * dom.box.width:.2f}" '
               f'height="{cv.k * dom.box.height:.2f}" fill="none" stroke="#909090" stroke-width="0.5"/>')
    reg = _region(dom, cv, style)
    if reg:
        out.append(reg)
    if bitangent_lines:
        for j in range(len(dom.curves)):
            for bt in curve_analysis(dom, j)["bitangents"]:
                seg = _line_box_segment(bt.line, dom.box)
                if seg is not None:
                    out.append(f'<path d="{cv.path(seg, False)}" stroke="#7b3fa0" '
                               f'stroke-width="{style.line_stroke}" stroke-dasharray="{style.dash}" fill="none"/>')
    for cur in dom.curves:
        for comp in cur.components:
            out.append(f'<path d="{cv.path(comp.points, comp.closed)}" stroke="{style.curve_color}" '
                       f'stroke-width="{style.curve_stroke}" fill="none"/>')
    for c, r in circles:
        u, v = cv.xy(*c)
        out.append(f'<circle cx="{u:.2f}" cy="{v:.2f}" r="{cv.k * r:.2f}" fill="none" '
                   f'stroke="{style.disk_color}" stroke-width="{style.disk_stroke}"/>')
    if points is None:
        points = list(dom.crossings) + dom.char_sets["X"] + dom.char_sets["Y"]
        for ws in check_flags(dom).witnesses.values():
            points += ws
    seen = set()
    for p in sorted(points, key=lambda p: (p.label, p.location)):
        key = (p.label, round(p.x, 9), round(p.y, 9))
        if key in seen:
            continue
        seen.add(key)
        out.append(_marker(cv, p.label, p.location, style))
    out.append("</svg>")
    return "\n".join(out) + "\n"
