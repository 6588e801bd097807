#!/usr/bin/env python3
"""Compare the compiled orbit/grid kernels against their interpreted twins.

The package keeps two implementations of every hot loop: the numba-compiled
one used by default and the plain-Python one selected by TRANSNUM_NO_NUMBA=1.
This script times both on the same inputs so the fallback's cost stays
visible.  Run from a checkout:

    python3 benchmarks/bench_kernels.py --steps 100000 --grid 1024
"""

import argparse
import time

import numpy as np

from transnum import _kernels
from transnum.families import (
    TrigPolynomial,
    arnold_circle,
    rigid_rotation,
    sinusoidal_shear,
    skew_translation,
    torus_affine,
)

GOLDEN = (5.0 ** 0.5 - 1.0) / 2.0

CASES = [
    ("rigid T^2", rigid_rotation([0.3, 0.61]), np.array([1.0, 0.0])),
    ("affine parabolic", torus_affine([[1, 0], [2, 1]], [0.25, 0.0]), np.array([1.0, 0.0])),
    ("circle + sine", arnold_circle(0.3, 0.9), np.array([1.0])),
    ("sine shear", sinusoidal_shear(0.1), np.array([1.0, 0.0])),
    ("skew golden", skew_translation(GOLDEN, TrigPolynomial(0.3, (0.05,), (0.1,))), np.array([0.0, 1.0])),
]


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        start = time.perf_counter()
        fn()
        times.append(time.perf_counter() - start)
    return min(times)


def orbit_runner(chunk, code, params, avec, steps):
    def run():
        x = np.full(avec.size, 0.1)
        x0 = x.copy()
        chunk(code, params, avec, 0.0, x, x0, 0, steps, 0.0, 1e-10, -1)

    return run


def grid_runner(kernel, code, params, avec, m):
    def run():
        kernel(code, params, avec, 0.0, m, avec.size)

    return run


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--steps", type=int, default=100_000, help="orbit length")
    parser.add_argument("--grid", type=int, default=1024, help="corner grid resolution")
    parser.add_argument("--repeat", type=int, default=3, help="best-of repetitions")
    args = parser.parse_args()

    if _kernels.JIT_ENABLED:
        _kernels.warmup()
        header = f"compiled vs interpreted, best of {args.repeat}"
    else:
        header = "numba unavailable or disabled: interpreted path only"
    print(f"transnum kernel benchmark ({header})")

    rows = [("case", "work", "compiled", "interpreted", "speedup")]
    for label, lift, avec in CASES:
        code, params = lift.kernel_spec
        slow = best_of(
            orbit_runner(_kernels._orbit_chunk_py, code, params, avec, args.steps),
            args.repeat,
        )
        if _kernels.JIT_ENABLED:
            fast = best_of(
                orbit_runner(_kernels.orbit_chunk, code, params, avec, args.steps),
                args.repeat,
            )
            rows.append((label, f"{args.steps} steps", f"{fast:.4f}s", f"{slow:.4f}s", f"{slow / fast:.1f}x"))
        else:
            rows.append((label, f"{args.steps} steps", "-", f"{slow:.4f}s", "-"))

    code, params = CASES[-1][1].kernel_spec
    avec = CASES[-1][2]
    slow = best_of(
        grid_runner(_kernels._grid_sup_abs_rho_py, code, params, avec, args.grid),
        args.repeat,
    )
    if _kernels.JIT_ENABLED:
        fast = best_of(
            grid_runner(_kernels.grid_sup_abs_rho, code, params, avec, args.grid),
            args.repeat,
        )
        rows.append(("skew sup grid", f"{args.grid}^2 corners", f"{fast:.4f}s", f"{slow:.4f}s", f"{slow / fast:.1f}x"))
    else:
        rows.append(("skew sup grid", f"{args.grid}^2 corners", "-", f"{slow:.4f}s", "-"))

    widths = [max(len(row[i]) for row in rows) for i in range(len(rows[0]))]
    for i, row in enumerate(rows):
        print("  ".join(cell.ljust(w) for cell, w in zip(row, widths)).rstrip())
        if i == 0:
            print("  ".join("-" * w for w in widths))


if __name__ == "__main__":
    main()
