"""Compiled vs numpy kernels: per-kernel timings and one end-to-end report.

    python3 benchmarks/bench_kernels.py [--repeat 5] [--nodes 65536]
"""

import argparse
import time
from contextlib import contextmanager

import numpy as np

from hardylab import _pykernels, kernels
from hardylab.correcting import build_correcting_factor, psi_exponential
from hardylab.corpus import field_family
from hardylab.disk_core import PolyVecField
from hardylab.embedding import Workspace, bundle_section_check

try:
    from hardylab import _ckernels
except ImportError:
    _ckernels = None


@contextmanager
def backend(module):
    saved = kernels.poly_eval, kernels.projection_frames, kernels.tree_sum
    kernels.poly_eval = module.poly_eval
    kernels.projection_frames = module.projection_frames
    kernels.tree_sum = module.tree_sum
    try:
        yield
    finally:
        kernels.poly_eval, kernels.projection_frames, kernels.tree_sum = saved


def best_of(fn, repeat):
    best = float("inf")
    for _ in range(repeat):
        t = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t)
    return best


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--nodes", type=int, default=65536)
    args = ap.parse_args()
    if _ckernels is None:
        print("compiled extension not built; only the numpy backend is available")
        return

    rng = np.random.default_rng(0)
    z = 0.95 * np.sqrt(rng.random(args.nodes)) * np.exp(2j * np.pi * rng.random(args.nodes))
    coeffs = rng.standard_normal((4, 6)) + 1j * rng.standard_normal((4, 6))
    vals = _pykernels.poly_eval(coeffs, z, 1)
    weights = rng.standard_normal((4096, 3))

    cases = {
        "poly_eval (n=4, deg 5, 2 orders)": lambda m: m.poly_eval(coeffs, z, 1),
        "projection_frames (n=4)": lambda m: m.projection_frames(vals[0], vals[1]),
        "tree_sum (4096 x 3)": lambda m: m.tree_sum(weights),
    }
    print(f"{'kernel':36s} {'numpy [ms]':>11s} {'cython [ms]':>12s} {'speedup':>8s}")
    for name, fn in cases.items():
        tp = best_of(lambda: fn(_pykernels), args.repeat)
        tc = best_of(lambda: fn(_ckernels), args.repeat)
        print(f"{name:36s} {1e3 * tp:11.2f} {1e3 * tc:12.2f} {tp / tc:8.1f}")

    f = field_family()["z2_z_1"]
    p = PolyVecField(rng.standard_normal((3, 4)) + 1j * rng.standard_normal((3, 4)))
    M = build_correcting_factor(psi_exponential())

    def report():
        return bundle_section_check(f, M, p, Workspace.build(f)).lhs

    timings, values = {}, {}
    for label, mod in (("numpy", _pykernels), ("cython", _ckernels)):
        with backend(mod):
            timings[label] = best_of(report, args.repeat)
            values[label] = report()
    print(f"{'end-to-end bundle report':36s} {1e3 * timings['numpy']:11.2f} "
          f"{1e3 * timings['cython']:12.2f} {timings['numpy'] / timings['cython']:8.1f}")
    print(f"relative difference of the report value: "
          f"{abs(values['numpy'] - values['cython']) / abs(values['numpy']):.2e}")


if __name__ == "__main__":
    main()
