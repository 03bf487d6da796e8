"""Numba toggle.

Set ``EEMIMO_DISABLE_NUMBA=1`` before import to force the pure-numpy
kernels even when numba is installed.
"""
import os

_DISABLED = os.environ.get("EEMIMO_DISABLE_NUMBA", "").strip().lower() in (
    "1", "true", "yes", "on")

try:
    if _DISABLED:
        raise ImportError
    from numba import njit
    NUMBA_AVAILABLE = True
except ImportError:
    njit = None
    NUMBA_AVAILABLE = False


def jit(func):
    """Compile ``func`` in nopython mode when numba is enabled, else return it
    unchanged (callers then dispatch to their numpy implementation)."""
    if NUMBA_AVAILABLE:
        return njit(cache=True, nogil=True)(func)
    return func
