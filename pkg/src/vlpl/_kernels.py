"""Backend selection for the hot kernels.

Prefers the compiled extension when present; falls back to the NumPy
implementation. Set VLPL_DISABLE_EXT=1 to force the fallback (used by the
benchmark to compare both backends on the same install).
"""

from __future__ import annotations

import os

from . import _kernels_np

if os.environ.get("VLPL_DISABLE_EXT") == "1":
    _impl = _kernels_np
else:
    try:
        from . import _core_cy as _impl  # type: ignore[no-redef]
    except ImportError:
        _impl = _kernels_np

passby_power_db = _impl.passby_power_db
conditional_power_db = _impl.conditional_power_db
passby_peak_scan = _impl.passby_peak_scan


def backend_name() -> str:
    return _impl.BACKEND
