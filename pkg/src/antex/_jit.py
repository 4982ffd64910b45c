"""Optional numba acceleration.

Every hot kernel in the package is decorated with :func:`njit`.  When numba is
importable and ``ANTEX_DISABLE_NUMBA`` is unset (or ``0``), kernels are compiled
in nopython mode with on-disk caching.  Otherwise the decorator is the identity
and the same source runs as plain Python over numpy arrays, which is the
reference path used to cross-check the compiled one.
"""
import os

_flag = os.environ.get("ANTEX_DISABLE_NUMBA", "0").strip().lower()
DISABLED = _flag not in ("", "0", "false", "no")

try:
    if DISABLED:
        raise ImportError("numba disabled by ANTEX_DISABLE_NUMBA")
    import numba

    USING_NUMBA = True

    def njit(func):
        return numba.njit(cache=True, nogil=True)(func)

except ImportError:
    USING_NUMBA = False

    def njit(func):
        return func
