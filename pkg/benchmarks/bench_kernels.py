"""Time the compiled kernels against the NumPy fallback.

Run ``python benchmarks/bench_kernels.py [--repeat N]``.  Each row reports
the best-of-N wall time per call for both backends and the speedup.
"""
import argparse
import time

import numpy as np

from nsplace import kernels
from nsplace.design import pin_positions
from nsplace.generate import generate_design
from nsplace.objective import DensityGrid
from nsplace.separation import pair_set
from nsplace.spectral import spectral_coordinates


def best_time(fn, repeat):
    best = np.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def cases(design):
    seed = spectral_coordinates(design)
    pins = np.ascontiguousarray(pin_positions(design, seed))
    _, _, ptr = design.pin_table()
    ptr = np.ascontiguousarray(ptr, dtype=np.intp)
    grid = DensityGrid.for_design(design)
    dims = design.dims()
    cx = np.ascontiguousarray(seed.x + dims[:, 0] / 2)
    cy = np.ascontiguousarray(seed.y + dims[:, 1] / 2)
    area = np.ascontiguousarray(dims.prod(axis=1))
    pairs = pair_set(design).pairs
    M = len(pairs)

    def wa(mod):
        return lambda: mod.wa_wirelength(pins, ptr, 0.3)

    def dens(mod):
        return lambda: mod.density(cx, cy, area, grid.nx, grid.ny, grid.bin_w, grid.bin_h,
                                   grid.target)

    def sep(mod):
        def run():
            U, G, F = np.zeros((M, 2)), np.zeros(M), np.zeros(M)
            kernels.solve_pairs(mod, pins, ptr, pairs, U, G, F, np.zeros(M, dtype=bool))
        return run

    def grad(mod):
        U = np.tile([0.3, -0.2], (M, 1))
        G = np.zeros(M)
        out = np.zeros_like(pins)
        return lambda: mod.ns_pin_grad(pins, ptr, pairs, U, G, 1.0, out)

    return [("wirelength", wa), ("density", dens), ("separators (cold)", sep),
            ("separation gradient", grad)]


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--components", type=int, default=40)
    ap.add_argument("--nets", type=int, default=30)
    a = ap.parse_args()
    if "cython" not in kernels.available():
        raise SystemExit("compiled kernels are not built; run 'pip install -e . --no-build-isolation'")
    d = generate_design(a.components, a.nets, 60.0, 45.0, seed=0, utilization=0.3)
    print(f"design: {a.components} components, {a.nets} nets, "
          f"{a.nets * (a.nets - 1) // 2} net pairs; best of {a.repeat}")
    print(f"{'kernel':<22}{'python (ms)':>14}{'cython (ms)':>14}{'speedup':>10}")
    for name, make in cases(d):
        tp = best_time(make(kernels.get("python")), a.repeat)
        tc = best_time(make(kernels.get("cython")), a.repeat)
        print(f"{name:<22}{tp * 1e3:>14.3f}{tc * 1e3:>14.3f}{tp / tc:>9.1f}x")


if __name__ == "__main__":
    main()
