"""Kernel backend selection.

``HOLOPHASE_BACKEND=numpy`` forces the pure-numpy kernels; the default
(``numba``) compiles the loop kernels with ``numba.njit`` when numba is
importable and silently falls back to numpy otherwise.
"""

from __future__ import annotations

import functools
import os

BACKEND_ENV = "HOLOPHASE_BACKEND"
_CHOICES = ("numba", "numpy")


def numba_available() -> bool:
    try:
        import numba  # noqa: F401
    except ImportError:
        return False
    return True


def _resolve() -> str:
    requested = os.environ.get(BACKEND_ENV, "numba").strip().lower() or "numba"
    if requested not in _CHOICES:
        raise ValueError(f"{BACKEND_ENV} must be one of {_CHOICES}, got {requested!r}")
    if requested == "numba" and not numba_available():
        return "numpy"
    return requested


BACKEND = _resolve()


@functools.lru_cache(maxsize=None)
def compile_numba(fn):
    """Compile ``fn`` in nopython mode; cached so each kernel compiles once."""
    import numba

    return numba.njit(cache=True, nogil=True)(fn)
