"""Benchmark the compiled kernels against the NumPy fallback.

The hot paths are dense model evaluation over distance grids (trace
synthesis, fitted-line output) and brute-force peak scans. Run after
installing the package:

    python benchmarks/bench_kernels.py
    python benchmarks/bench_kernels.py --size 4000000 --scan-count 20000000
"""

from __future__ import annotations

import argparse
import time

import numpy as np

import vlpl._kernels_np as np_backend

try:
    import vlpl._core_cy as cy_backend
except ImportError:
    cy_backend = None

NIGHT = (-35.2680, 0.9707)  # (k_db, gamma)
ORDER_N = 1.0
W = 2.0


def _best_of(repeats, fn, *args):
    best = float("inf")
    result = None
    for _ in range(repeats):
        t0 = time.perf_counter()
        result = fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best, result


def run(size: int, scan_count: int, repeats: int) -> None:
    k_db, gamma = NIGHT
    d = np.linspace(W + 0.5, 120.0, size)
    backends = [("numpy", np_backend)]
    if cy_backend is not None:
        backends.append(("cython", cy_backend))
    else:
        print("compiled backend not available; timing numpy only")

    rows = []
    for label, impl in backends:
        t_pass, out_pass = _best_of(repeats, impl.passby_power_db,
                                    k_db, gamma, ORDER_N, W, d)
        t_cond, out_cond = _best_of(repeats, impl.conditional_power_db,
                                    k_db, gamma, ORDER_N, W, 0.01, d)
        t_scan, out_scan = _best_of(repeats, impl.passby_peak_scan,
                                    k_db, gamma, ORDER_N, W,
                                    W + 1e-4, 1e-4, scan_count)
        rows.append((label, t_pass, t_cond, t_scan, out_pass, out_cond, out_scan))

    header = f"{'backend':>8} {'passby':>12} {'conditional':>12} {'peak scan':>12}"
    print(header)
    print("-" * len(header))
    for label, t_pass, t_cond, t_scan, *_ in rows:
        print(f"{label:>8} {t_pass * 1e3:>10.2f}ms {t_cond * 1e3:>10.2f}ms "
              f"{t_scan * 1e3:>10.2f}ms")
    if len(rows) == 2:
        base, fast = rows[0], rows[1]
        print(f"\nspeedup (cython vs numpy): "
              f"passby {base[1] / fast[1]:.2f}x, "
              f"conditional {base[2] / fast[2]:.2f}x, "
              f"peak scan {base[3] / fast[3]:.2f}x")
        worst = max(float(np.max(np.abs(base[4] - fast[4]))),
                    float(np.max(np.abs(base[5] - fast[5]))))
        same_idx = base[6][0] == fast[6][0]
        print(f"agreement: max |diff| {worst:.3e} dB, "
              f"peak index match: {same_idx}")


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--size", type=int, default=2_000_000,
                        help="grid points for the vectorized kernels")
    parser.add_argument("--scan-count", type=int, default=10_000_000,
                        help="grid points for the peak scan")
    parser.add_argument("--repeats", type=int, default=5,
                        help="take the best of this many runs")
    args = parser.parse_args()
    run(args.size, args.scan_count, args.repeats)


if __name__ == "__main__":
    main()
