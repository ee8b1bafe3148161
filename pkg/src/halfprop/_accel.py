"""Backend selection for the hot numeric loops.

Setting ``HALFPROP_DISABLE_NUMBA=1`` (or running without numba installed)
routes every accelerated kernel to its pure-numpy twin.  The flag is read
once at import time.
"""

import os

_flag = os.environ.get("HALFPROP_DISABLE_NUMBA", "").strip().lower()
DISABLED_BY_ENV = _flag not in ("", "0", "false", "no")

try:
    if DISABLED_BY_ENV:
        raise ImportError("numba disabled by HALFPROP_DISABLE_NUMBA")
    import numba

    HAVE_NUMBA = True
except ImportError:
    numba = None
    HAVE_NUMBA = False


def njit(fn):
    """``numba.njit(cache=True)`` when available, identity otherwise."""
    if numba is None:
        return fn
    return numba.njit(cache=True)(fn)


def backend() -> str:
    return "numba" if HAVE_NUMBA else "numpy"


def thread_count() -> int:
    """Worker count from ``HALFPROP_THREADS``, default available parallelism."""
    raw = os.environ.get("HALFPROP_THREADS", "")
    if raw.strip():
        return max(1, int(raw))
    try:
        return max(1, len(os.sched_getaffinity(0)))
    except AttributeError:
        return max(1, os.cpu_count() or 1)
