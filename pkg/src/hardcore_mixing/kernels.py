"""Hot-kernel dispatch: numba-compiled by default, pure python on demand.

Set HARDCORE_NO_NUMBA=1 to force the fallback path (also taken when numba
is not importable).  Both paths are bit-für-bit equivalent; see
tests/test_kernels.py and benchmarks/bench_kernels.py.
"""

from __future__ import annotations

import os

_flag = os.environ.get("HARDCORE_NO_NUMBA", "").strip().lower()
NUMBA_DISABLED = _flag in {"1", "true", "yes", "on"}

if not NUMBA_DISABLED:
    try:
        from . import _kernels_numba as _impl

        BACKEND = "numba"
    except ImportError:  # pragma: no cover - exercised only without numba
        from . import _kernels_python as _impl

        BACKEND = "python"
else:
    from . import _kernels_python as _impl

    BACKEND = "python"

subset_scan = _impl.subset_scan
conductance_scan = _impl.conductance_scan
escape_times = _impl.escape_times
draw_tally = _impl.draw_tally


def set_threads(n: int) -> None:
    """Bound the worker pool used by parallel kernels (numba backend only)."""
    if BACKEND == "numba":
        import numba

        numba.set_num_threads(max(1, int(n)))
