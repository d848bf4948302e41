#!/usr/bin/env python3
"""Benchmark the numba kernels against the pure-numpy fallback.

Usage: python benchmarks/bench_kernels.py [--threads N]
"""

import argparse
import math
import time

import numpy as np

from rydnoise.kernels import numba_enabled, numerov_inward, set_num_threads, steady_coherence_grid
from rydnoise.lindblad import (
    COORD_INDEX,
    DecayParameters,
    DriveParameters,
    build_hamiltonian,
    build_liouvillian,
    pin_zero_rows,
    reduce_liouvillian,
    scan_coefficients,
    with_trace_row,
)
from rydnoise.noise import NoiseCouplings

TWO_PI = 2.0 * math.pi
GAMMA_2 = TWO_PI * 6.0666e6


def timeit(fn, repeats=3):
    best = math.inf
    for _ in range(repeats):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def bench_numerov():
    # 57S-like state on the default sqrt(r) grid
    args = (-0.5 / 53.87**2, 0.75, 1.444, 0.01, 10630)
    rows = []
    if numba_enabled():
        numerov_inward(*args, use_numba=True)  # compile
        t_nb, y_nb = timeit(lambda: numerov_inward(*args, use_numba=True))
        rows.append(("numerov", "numba", t_nb))
    t_py, y_py = timeit(lambda: numerov_inward(*args, use_numba=False))
    rows.append(("numerov", "numpy", t_py))
    return rows


def bench_steady_grid():
    drives = DriveParameters(omega_p=GAMMA_2 / 50, omega_c=TWO_PI * 2.3e6, omega_rf=TWO_PI * 60e6)
    decays = DecayParameters(
        gamma_2=GAMMA_2,
        gamma_3=TWO_PI * 1e4,
        gamma_4=TWO_PI * 1e4,
        couplings=NoiseCouplings(r_34=1e6, r_d3=2e6, r_e4=3e6),
    )
    wl = (780.241e-9, 479.9285e-9)
    l0 = with_trace_row(
        pin_zero_rows(reduce_liouvillian(build_liouvillian(build_hamiltonian(drives, wavelengths=wl), decays)))
    )
    cs, cv = scan_coefficients("coupling", wl)
    scan = TWO_PI * np.linspace(-80e6, 80e6, 121)
    v = np.linspace(-960, 960, 2001)
    w = np.exp(-((v / 237.0) ** 2))
    w /= w.sum()
    idx = COORD_INDEX[(1, 0)]
    n_solves = scan.size * v.size
    rows = []
    if numba_enabled():
        steady_coherence_grid(l0, cs, cv, scan[:2], v[:8], w[:8], idx, use_numba=True)  # compile
        t_nb, out_nb = timeit(lambda: steady_coherence_grid(l0, cs, cv, scan, v, w, idx, use_numba=True), repeats=2)
        rows.append(("steady grid", "numba", t_nb, n_solves))
    t_py, out_py = timeit(lambda: steady_coherence_grid(l0, cs, cv, scan, v, w, idx, use_numba=False), repeats=2)
    rows.append(("steady grid", "numpy", t_py, n_solves))
    if numba_enabled():
        print(f"path agreement: max|diff| = {np.abs(out_nb - out_py).max():.2e}")
    return rows


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--threads", type=int, default=1)
    args = parser.parse_args()
    set_num_threads(args.threads)
    print(f"numba available/enabled: {numba_enabled()}  threads: {args.threads}")
    for row in bench_numerov():
        print(f"{row[0]:12s} {row[1]:6s} {row[2]*1e3:9.2f} ms")
    for row in bench_steady_grid():
        rate = row[3] / row[2]
        print(f"{row[0]:12s} {row[1]:6s} {row[2]*1e3:9.2f} ms  ({rate/1e3:.0f}k solves/s)")


if __name__ == "__main__":
    main()
