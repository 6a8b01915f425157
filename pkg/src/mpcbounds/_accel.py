"""Kernel backend selection: numba-jitted hot loops with a pure-numpy fallback.

The env var MPCBOUNDS_BACKEND picks the path at import time:

    MPCBOUNDS_BACKEND=numba   (default) compile hot kernels with numba.njit
    MPCBOUNDS_BACKEND=numpy   run the same functions as plain Python/numpy

Both paths execute identical code; the numpy path simply skips compilation,
so results agree bit-for-bit. `maybe_njit` is applied to every hot kernel;
`python -m mpcbounds.benchmark` times the two paths against each other.

MPCLAB_THREADS caps fan-out parallelism in grid sweeps (0 or unset = auto).
"""
import os

_backend = os.environ.get("MPCBOUNDS_BACKEND", "numba").strip().lower()
if _backend not in ("numba", "numpy"):
    raise RuntimeError(f"MPCBOUNDS_BACKEND must be 'numba' or 'numpy', got {_backend!r}")

NUMBA_ENABLED = _backend == "numba"
if NUMBA_ENABLED:
    try:
        import numba
    except ImportError:  # pragma: no cover - numba is a declared dependency
        NUMBA_ENABLED = False


def maybe_njit(*args, **kwargs):
    """numba.njit when the numba backend is active, identity decorator otherwise."""
    if NUMBA_ENABLED:
        return numba.njit(*args, **kwargs)
    if args and callable(args[0]):
        return args[0]

    def deco(fn):
        return fn

    return deco


def backend_name() -> str:
    return "numba" if NUMBA_ENABLED else "numpy"


def thread_count() -> int:
    """Worker count for embarrassingly parallel sweeps, capped by MPCLAB_THREADS."""
    raw = os.environ.get("MPCLAB_THREADS", "0").strip() or "0"
    try:
        n = int(raw)
    except ValueError:
        n = 0
    if n < 0:
        n = 0
    if n == 0:
        n = min(4, os.cpu_count() or 1)
    return max(1, n)
