"""Command-line interface.

    algdomain analyze SCENE OUT_DIR [--axis x|y|both] [--tol T]
    algdomain surgery SCENE OUT_DIR --mode nip|ndtl|ncv
    algdomain realize GRAPH OUT_DIR [--delta D] [--degree N]
    algdomain check   SCENE OUT_DIR [--resolution N]

Exit codes: 0 ok, 2 invalid input, 3 a hypothesis or postcondition failed,
4 the brute-force oracle disagrees with the certified result.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

from .domain import Scene, build_domain, check_flags, classify_morse, curve_analysis, report
from .errors import AlgDomainError, OracleMismatch
from .oracle import cell_tolerance, grid_mask, grid_reeb, sampled_diffgeo_scan
from .realize import EmbeddedGraph, TubeSpec, realize_domain
from .reeb import poincare_reeb, vdigraph_isomorphic
from .render import domain_svg
from .surgery import desingularize


# ------------------------------------------------------------------ JSON

def _fmt_float(v: float) -> str:
    if not math.isfinite(v):
        raise ValueError("non-finite number in output")
    if v == int(v) and abs(v) < 1e16:
        return repr(float(v))
    return "%.17g" % v


def canonical_json(obj, indent: int = 2) -> str:
    """JSON with every float printed to 17 significant digits, so that
    re-parsing reproduces the exact doubles."""

    def enc(o, level):
        pad = " " * (indent * (level + 1))
        end = " " * (indent * level)
        if isinstance(o, bool) or o is None:
            return json.dumps(o)
        if isinstance(o, int):
            return str(o)
        if isinstance(o, float):
            return _fmt_float(o)
        if isinstance(o, str):
            return json.dumps(o)
        if isinstance(o, dict):
            if not o:
                return "{}"
            items = [f"{pad}{json.dumps(str(k))}: {enc(v, level + 1)}" for k, v in o.items()]
            return "{\n" + ",\n".join(items) + "\n" + end + "}"
        if isinstance(o, (list, tuple)):
            if not o:
                return "[]"
            if all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in o):
                return "[" + ", ".join(enc(v, level) for v in o) + "]"
            return "[\n" + ",\n".join(pad + enc(v, level + 1) for v in o) + "\n" + end + "]"
        if hasattr(o, "item"):  # numpy scalar
            return enc(o.item(), level)
        raise TypeError(f"cannot serialize {type(o).__name__}")

    return enc(obj, 0) + "\n"


def _write(out: Path, name: str, text: str) -> None:
    (out / name).write_text(text, encoding="utf-8")


def _read_json(path) -> dict:
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


def _load_scene(path, tol: float | None) -> Scene:
    scene = Scene.from_json(_read_json(path))
    if tol is not None:
        if not tol > 0:
            raise ValueError("--tol must be positive")
        scene.tol["solver"] = tol
    return scene


def _axes(flag: str) -> tuple:
    return {"x": ("X",), "y": ("Y",), "both": ("X", "Y")}[flag]


# ------------------------------------------------------------------ commands

def cmd_analyze(args) -> dict:
    scene = _load_scene(args.scene, args.tol)
    dom = build_domain(scene, ndtl_same_curve_only=args.ndtl_same_curve_only)
    rep = report(dom)
    rep["reeb"] = {}
    for axis in _axes(args.axis):
        try:
            g = poincare_reeb(dom, axis)
        except AlgDomainError as e:
            rep["reeb"][axis] = e.to_json()
            continue
        rep["reeb"][axis] = {"vertices": len(g.vertices), "edges": len(g.edges), "betti1": g.betti1()}
        _write(args.out, f"reeb_{axis.lower()}.json", canonical_json(g.to_json()))
        _write(args.out, f"reeb_{axis.lower()}.dot", g.to_dot(f"reeb_{axis.lower()}"))
    rep["options"] = {"axis": args.axis, "tol": scene.tol["solver"],
                      "ndtl_same_curve_only": args.ndtl_same_curve_only}
    _write(args.out, "report.json", canonical_json(rep))
    _write(args.out, "domain.svg", domain_svg(dom))
    return {"flags": rep["flags"], "reeb": rep["reeb"]}


def cmd_surgery(args) -> dict:
    scene = _load_scene(args.scene, args.tol)
    dom = build_domain(scene, ndtl_same_curve_only=args.ndtl_same_curve_only)
    before = {a: poincare_reeb(dom, a) for a in ("X", "Y")}
    _write(args.out, "before.svg", domain_svg(dom))
    log: list = []
    new = desingularize(dom, args.mode, log=log)
    circles = [(p.center, p.radii[0]) for p in log]
    verdicts = {}
    for a in ("X", "Y"):
        g = poincare_reeb(new, a)
        verdicts[a] = vdigraph_isomorphic(before[a], g, "height_order", tol=1e-9 * dom.box.size)
    _write(args.out, "scene_prime.json", canonical_json(new.scene.to_json()))
    _write(args.out, "surgery_log.json", canonical_json([p.to_json() for p in log]))
    _write(args.out, "after.svg", domain_svg(new, circles=circles))
    flags = check_flags(new)
    out = {"mode": args.mode, "insertions": len(log), "isomorphic": verdicts,
           "flags": {"nip": flags.nip, "ndtl": flags.ndtl, "ncv": flags.ncv,
                     "morse": classify_morse(new).morse}}
    _write(args.out, "verdict.json", canonical_json(out))
    return out


def cmd_realize(args) -> dict:
    g = EmbeddedGraph.from_json(_read_json(args.graph))
    spec = TubeSpec(args.delta, fit_degree=args.degree, grid=args.grid)
    log: dict = {}
    dom = realize_domain(g, spec, log=log)
    got = poincare_reeb(dom, "X")
    circles = [(c["center"], c["radius"]) for c in log["circles"]]
    _write(args.out, "scene.json", canonical_json(dom.scene.to_json()))
    _write(args.out, "report.json", canonical_json(report(dom, differential=False)))
    _write(args.out, "reeb_x.json", canonical_json(got.to_json()))
    _write(args.out, "realized.svg", domain_svg(dom, circles=circles, bitangent_lines=False,
                                                points=list(dom.crossings) + dom.char_sets["X"]))
    out = {"match": True, "fit_degree": log["degree"], "tube_poles": log["tube_poles"],
           "expected_poles": log["expected_poles"], "circles": log["circles"],
           "morse": classify_morse(dom).morse}
    _write(args.out, "verdict.json", canonical_json(out))
    return out


def _curve_counts(dom, j: int) -> dict:
    an = curve_analysis(dom, j)
    return {"inflection_count": len(an["inflections"]), "cv_count": len(an["vertices"]),
            "bitangent_count": len(an["bitangents"])}


def cmd_check(args) -> dict:
    scene = _load_scene(args.scene, args.tol)
    dom = build_domain(scene, ndtl_same_curve_only=args.ndtl_same_curve_only)
    res = args.resolution
    tol = cell_tolerance(scene, res)
    out = {"resolution": res, "height_tolerance": tol, "reeb": {}, "counts": [], "holes": {}}
    ok = True
    betti = None
    for axis in _axes(args.axis):
        exact = poincare_reeb(dom, axis)
        grid = grid_reeb(scene, axis, res)
        same = vdigraph_isomorphic(exact, grid, "height_order", tol=tol)
        ok &= same
        betti = exact.betti1()
        out["reeb"][axis] = {"isomorphic": same, "exact": [len(exact.vertices), len(exact.edges)],
                             "grid": [len(grid.vertices), len(grid.edges)]}
    holes = grid_mask(scene, res).hole_count()
    out["holes"] = {"grid": holes, "betti1": betti, "agree": holes == betti}
    ok &= holes == betti
    for j, f in enumerate(scene.curves):
        cert = _curve_counts(dom, j)
        samp = sampled_diffgeo_scan(f, scene.box, max(res, 1024))
        agree = cert == samp
        ok &= agree
        out["counts"].append({"curve": j, "certified": cert, "sampled": samp, "agree": agree})
    out["agree"] = bool(ok)
    _write(args.out, "check.json", canonical_json(out))
    if not ok:
        raise OracleMismatch("oracle disagrees with the certified computation",
                             report=str(args.out / "check.json"))
    return out


# ------------------------------------------------------------------ entry

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="algdomain", description=__doc__.split("\n")[0])
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, scene=True):
        sp.add_argument("scene" if scene else "graph", type=Path)
        sp.add_argument("out", type=Path, help="output directory (created if missing)")
        if scene:
            sp.add_argument("--tol", type=float, default=None, help="solver tolerance override")
            sp.add_argument("--ndtl-same-curve-only", action="store_true",
                            help="only test a bitangent line against its own curve")

    a = sub.add_parser("analyze", help="characteristic sets, flags and Reeb graphs")
    common(a)
    a.add_argument("--axis", choices=("x", "y", "both"), default="both")
    a.set_defaults(func=cmd_analyze)

    s = sub.add_parser("surgery", help="remove inflection, bitangent or vertex defects")
    common(s)
    s.add_argument("--mode", choices=("nip", "ndtl", "ncv"), required=True)
    s.set_defaults(func=cmd_surgery)

    r = sub.add_parser("realize", help="realize an embedded V-digraph as a domain")
    common(r, scene=False)
    r.add_argument("--delta", type=float, default=0.15, help="tube half-width")
    r.add_argument("--degree", type=int, default=10, help="first fitting degree")
    r.add_argument("--grid", type=int, default=256, help="field samples per side")
    r.set_defaults(func=cmd_realize)

    c = sub.add_parser("check", help="cross-check against the raster oracle")
    common(c)
    c.add_argument("--axis", choices=("x", "y", "both"), default="both")
    c.add_argument("--resolution", type=int, default=512)
    c.set_defaults(func=cmd_check)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        args.out.mkdir(parents=True, exist_ok=True)
    except OSError as e:
        print(canonical_json({"error": "InputError", "message": str(e)}), end="")
        return 2
    try:
        summary = args.func(args)
    except AlgDomainError as e:
        err = e.to_json()
        _write(args.out, "error.json", canonical_json(err))
        print(canonical_json(err), end="")
        return e.exit_code
    except (OSError, ValueError, KeyError, TypeError) as e:
        err = {"error": "InputError", "message": f"{type(e).__name__}: {e}"}
        _write(args.out, "error.json", canonical_json(err))
        print(canonical_json(err), end="")
        return 2
    print(canonical_json(summary), end="")
    return 0


if __name__ == "__main__":
    sys.exit(main())
