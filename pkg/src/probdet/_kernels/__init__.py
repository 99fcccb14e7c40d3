"""Hot-kernel dispatch.

The numba-compiled kernels are used by default.  Setting the environment
variable ``PROBDET_DISABLE_NUMBA=1`` (before first import) selects the
pure-numpy fallback instead; the fallback is also chosen automatically
when numba is not importable.  ``BACKEND`` records which path is active.

Both implementations are importable directly (``_numpy_impl`` /
``_numba_impl``) so tests and the benchmark can compare them.
"""

from __future__ import annotations

import os

from . import _numpy_impl

_FLAG = os.environ.get("PROBDET_DISABLE_NUMBA", "").strip().lower()
_DISABLED = _FLAG in ("1", "true", "yes", "on")

if not _DISABLED:
    try:
        from . import _numba_impl as _impl
        BACKEND = "numba"
    except ImportError:  # pragma: no cover - exercised only without numba
        _impl = _numpy_impl
        BACKEND = "numpy"
else:
    _impl = _numpy_impl
    BACKEND = "numpy"

nms_keep_mask = _impl.nms_keep_mask
greedy_match = _impl.greedy_match
render_features = _impl.render_features
pool_cell_means = _impl.pool_cell_means

__all__ = [
    "BACKEND",
    "nms_keep_mask",
    "greedy_match",
    "render_features",
    "pool_cell_means",
]
