"""Backend selection for the numerically hot kernels.

The heavy inner loops (basis tabulation, log-moment accumulation) exist in two
variants: numba-jitted loops and a pure-numpy fallback.  Selection happens once
at import time through the ``SPLINEBEM_BACKEND`` environment variable:

* ``auto`` (default): use numba when it imports cleanly, else numpy.
* ``numba``: require numba, fail loudly if missing.
* ``numpy``: force the pure-numpy path (useful for debugging and as a
  correctness cross-check; see ``benchmarks/benchmark_backends.py``).
"""

from __future__ import annotations

import os

_choice = os.environ.get("SPLINEBEM_BACKEND", "auto").strip().lower()
if _choice not in ("auto", "numba", "numpy"):
    raise RuntimeError(
        f"SPLINEBEM_BACKEND must be 'auto', 'numba' or 'numpy', got {_choice!r}"
    )

if _choice == "numpy":
    _use_numba = False
else:
    try:
        import numba  # noqa: F401

        _use_numba = True
    except ImportError:
        if _choice == "numba":
            raise
        _use_numba = False

USING_NUMBA: bool = _use_numba
BACKEND_NAME: str = "numba" if _use_numba else "numpy"

if _use_numba:
    from ._hot_numba import (
        accumulate_moment_rows,
        log_power_moments,
        tabulate_ders,
    )
else:
    from ._hot_numpy import (
        accumulate_moment_rows,
        log_power_moments,
        tabulate_ders,
    )

__all__ = [
    "USING_NUMBA",
    "BACKEND_NAME",
    "tabulate_ders",
    "log_power_moments",
    "accumulate_moment_rows",
]
