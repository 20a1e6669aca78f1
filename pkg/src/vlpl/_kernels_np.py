"""NumPy implementations of the hot kernels (fallback backend).

All functions assume arguments were validated by the caller; ``d`` must be
strictly greater than ``w`` elementwise.
"""

from __future__ import annotations

import numpy as np

BACKEND = "numpy"

# keep grid scans below ~64 MB of scratch
_CHUNK = 8_000_000


def passby_power_db(k_db, gamma, order_n, w, d):
    """Log-domain received power along a lateral-offset pass-by."""
    d = np.asarray(d, dtype=np.float64)
    ratio = (w * w) / (d * d)
    return k_db - gamma * 10.0 * np.log10(d) + 5.0 * (order_n + 1.0) * np.log10(1.0 - ratio)


def conditional_power_db(k_db, gamma, order_n, w, epsilon, d):
    """Two-regime form: far samples use the plain log-linear law."""
    d = np.asarray(d, dtype=np.float64)
    ratio = (w * w) / (d * d)
    line = k_db - gamma * 10.0 * np.log10(d)
    near = line + 5.0 * (order_n + 1.0) * np.log10(1.0 - ratio)
    return np.where(ratio <= epsilon, line, near)


def passby_peak_scan(k_db, gamma, order_n, w, d_start, step, count):
    """Argmax of the pass-by power over the grid d_start + i*step, i < count.

    Returns (index, power_db) of the best grid point.
    """
    best_idx = -1
    best_val = -np.inf
    for lo in range(0, count, _CHUNK):
        n = min(_CHUNK, count - lo)
        d = d_start + step * (lo + np.arange(n, dtype=np.float64))
        vals = passby_power_db(k_db, gamma, order_n, w, d)
        i = int(np.argmax(vals))
        if vals[i] > best_val:
            best_val = float(vals[i])
            best_idx = lo + i
    return best_idx, best_val
