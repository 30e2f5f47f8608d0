"""Numerical backend selection.

Hot kernels ship in two interchangeable flavors: numba-JIT
(``_kernels_numba``) and pure numpy (``_kernels_numpy``).  The JIT backend is
the default; set the environment variable ``VSUQ_NUMBA=0`` before import to
force the numpy fallback.  ``load_backend`` lets benchmarks hold both at once.
"""

from __future__ import annotations

import os
import warnings
from types import ModuleType

_FALSEY = {"0", "false", "no", "off"}


def _want_numba() -> bool:
    return os.environ.get("VSUQ_NUMBA", "1").strip().lower() not in _FALSEY


def load_backend(name: str) -> ModuleType:
    """Import a kernel backend by name ('numba' or 'numpy')."""
    if name == "numba":
        with warnings.catch_warnings():
            # threading-layer fallback (e.g. old TBB) is harmless
            warnings.simplefilter("ignore")
            from . import _kernels_numba

        return _kernels_numba
    if name == "numpy":
        from . import _kernels_numpy

        return _kernels_numpy
    raise ValueError(f"unknown backend {name!r}")


def _select() -> ModuleType:
    if _want_numba():
        try:
            return load_backend("numba")
        except ImportError as exc:  # pragma: no cover - depends on environment
            warnings.warn(f"numba backend unavailable ({exc}); using numpy fallback")
    return load_backend("numpy")


kernels = _select()

BACKEND_NAME = "numba" if kernels.IS_JIT else "numpy"


def set_threads(n: int | None) -> None:
    """Set the worker-thread count for the JIT backend (no-op on numpy)."""
    if n is None or not kernels.IS_JIT:
        return
    import numba

    numba.set_num_threads(max(1, int(n)))
