"""Compare the compiled kernels with the pure-Python fallback.

    python benchmarks/bench_kernels.py [--repeat N] [--end-to-end]

Kernel timings run both backends in this process. The end-to-end timing
builds a domain in two subprocesses, one with ALGDOMAIN_PURE=1.
"""

from __future__ import annotations

import argparse
import os
import subprocess
import sys
import timeit

import numpy as np

from algdomain import _pykernels as py
from algdomain.kernels import compiled_backend
from algdomain.polynomials import Poly2

x, y = Poly2.x(), Poly2.y()
POLY = (x - 0.3) ** 5 * (y + 0.2) ** 3 + x * y - 2  # degree 8, dense-ish

E2E = """
import time
from algdomain.domain import Scene, build_domain
from algdomain.polynomials import Box, Poly2
from algdomain.reeb import poincare_reeb
x, y = Poly2.x(), Poly2.y()
t = time.perf_counter()
d = build_domain(Scene([x * x + y * y - 4, y - x ** 3 + x], Box(-3, 3, -3, 3), (0.0, 1.0)))
poincare_reeb(d, "X"); poincare_reeb(d, "Y")
print(time.perf_counter() - t)
"""


def kernel_cases(mod):
    rng = np.random.default_rng(0)
    h = mod.prepare(POLY.dense)
    hx, hy = mod.prepare(POLY.dx.dense), mod.prepare(POLY.dy.dense)
    pts = rng.uniform(-1, 1, (1000, 2))
    xs, ys = rng.uniform(-1, 1, (2, 100_000))
    boxes = np.sort(rng.uniform(-1, 1, (1000, 2, 2)), axis=2)
    mask = rng.random((512, 512)) < 0.5

    def eval_scalar():
        for u, v in pts:
            mod.eval2(h, u, v)

    def enclose():
        for (a, b), (c, d) in boxes:
            mod.enclose2(h, a, b, c, d)

    def project():
        for u, v in pts[:200]:
            mod.project(h, hx, hy, u, v, 1e-12, 30)

    return {
        "eval2 x1000": eval_scalar,
        "eval2_points 1e5": lambda: mod.eval2_points(POLY.dense, xs, ys),
        "enclose2 x1000": enclose,
        "project x200": project,
        "column_runs 512^2": lambda: mod.column_runs(mask),
    }


def best(fn, repeat):
    return min(timeit.repeat(fn, number=1, repeat=repeat))


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--end-to-end", action="store_true")
    args = ap.parse_args(argv)
    ck = compiled_backend()
    if ck is None:
        print("compiled extension not built; run `pip install -e . --no-build-isolation`")
        return 1
    pc, cc = kernel_cases(py), kernel_cases(ck)
    print(f"{'kernel':<20} {'python ms':>11} {'compiled ms':>12} {'speedup':>8}")
    for name in pc:
        tp, tc = best(pc[name], args.repeat), best(cc[name], args.repeat)
        print(f"{name:<20} {1e3 * tp:>11.2f} {1e3 * tc:>12.2f} {tp / tc:>7.1f}x")
    if args.end_to_end:
        times = {}
        for label, pure in (("compiled", "0"), ("python", "1")):
            env = dict(os.environ, ALGDOMAIN_PURE=pure)
            out = subprocess.run([sys.executable, "-c", E2E], env=env, capture_output=True, text=True, check=True)
            times[label] = float(out.stdout.strip())
        print(f"{'cubic+circle domain':<20} {1e3 * times['python']:>11.0f} {1e3 * times['compiled']:>12.0f} "
              f"{times['python'] / times['compiled']:>7.1f}x")
    return 0


if __name__ == "__main__":
    sys.exit(main())
