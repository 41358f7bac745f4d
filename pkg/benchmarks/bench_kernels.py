"""Compiled vs. numpy boundary-determinant kernels.

    python benchmarks/bench_kernels.py [--repeat 5]

Times one characteristic-function scan and one full root search on the
reference stack with each backend, checks that both give the same roots and
reports the speed-up.
"""

import argparse
import importlib
import time

import numpy as np

from sezawa.dispersion import StackTemplate, _kernels_py
from sezawa.dispersion.solver import N_SAMPLES, ROOT_RTOL
from sezawa.materials import default_materials, interpolate_scaln


def _best_of(fn, repeat):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)

    db = default_materials()
    tpl = StackTemplate(interpolate_scaln(db, 0.3), db["6H-SiC"], 400e-9, db["AlSiCu"], 0.5)
    stack = tpl.build(0.625, 0.125)
    kargs = stack.kernel_args()
    lo, hi = (v / stack.substrate.vT for v in stack.scan_bounds())
    c = np.linspace(lo, hi, N_SAMPLES)

    backends = {"python": _kernels_py}
    try:
        backends["cython"] = importlib.import_module("sezawa.dispersion._kernels")
    except ImportError:
        print("compiled kernel not available; timing the numpy fallback only")

    rows = {}
    for name, mod in backends.items():
        t_scan, _ = _best_of(lambda: mod.characteristic(*kargs, c), args.repeat)
        t_roots, roots = _best_of(lambda: mod.find_roots(*kargs, lo, hi, N_SAMPLES, ROOT_RTOL), args.repeat)
        rows[name] = (t_scan, t_roots, roots * stack.substrate.vT)
        print(f"{name:>7}: scan {1e3 * t_scan:8.3f} ms   roots {1e3 * t_roots:8.3f} ms   vp = {np.round(rows[name][2], 3)}")

    if len(rows) == 2:
        py, cy = rows["python"], rows["cython"]
        same = np.allclose(py[2], cy[2], rtol=1e-11, atol=0)
        print(f"speed-up: scan x{py[0] / cy[0]:.1f}, roots x{py[1] / cy[1]:.1f}; roots agree: {same}")


if __name__ == "__main__":
    main()
