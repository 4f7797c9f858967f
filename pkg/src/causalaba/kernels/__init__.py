"""Hot kernels with a numba path and a pure-numpy fallback.

The numba path is used when numba imports and ``CAUSALABA_NO_NUMBA`` is unset
(or ``0``).  Set ``CAUSALABA_NO_NUMBA=1`` to force the numpy fallback; both
backends expose the same functions and must return identical results.
"""

import os

from . import _np
from ._common import ABS, ALL, BWD, CAPPED, DONE, FWD, K_ARROW, K_DEP, K_INDEP, K_NOEDGE, TIMEOUT

_np_backend = _np


def _load_numba():
    if os.environ.get("CAUSALABA_NO_NUMBA", "0") not in ("", "0"):
        return None
    try:
        from . import _nb
    except ImportError:  # pragma: no cover - numba is a declared dependency
        return None
    return _nb


_nb_backend = _load_numba()
backend = _nb_backend if _nb_backend is not None else _np_backend
BACKEND_NAME = "numba" if _nb_backend is not None else "numpy"


def get_backend(name=None):
    """Return the kernel module for ``name`` ("numba", "numpy") or the active one."""
    if name is None:
        return backend
    if name == "numpy":
        return _np_backend
    if name == "numba":
        if _nb_backend is None:
            raise RuntimeError("numba backend disabled or unavailable")
        return _nb_backend
    raise ValueError(f"unknown backend {name!r}")


def closure(adj):
    return backend.closure(adj)


def dconnected(adj, x, y, inz):
    return backend.dconnected(adj, x, y, inz)


def fact_table(models, fx, fy, fz):
    return backend.fact_table(models, fx, fy, fz)


def search(*args):
    return backend.search(*args)


__all__ = [
    "ABS", "ALL", "BWD", "CAPPED", "DONE", "FWD", "TIMEOUT",
    "K_ARROW", "K_DEP", "K_INDEP", "K_NOEDGE",
    "BACKEND_NAME", "get_backend", "closure", "dconnected", "fact_table", "search",
]
