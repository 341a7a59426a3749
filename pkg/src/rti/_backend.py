"""Kernel backend selection.

``RTI_NUMBA=0`` forces the numpy/scipy reference kernels; anything else uses
the numba-compiled kernels when numba imports cleanly.
"""
import os

try:
    import numba  # noqa: F401
    _HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    _HAVE_NUMBA = False


def numba_requested() -> bool:
    return os.environ.get("RTI_NUMBA", "1").strip().lower() not in ("0", "false", "no", "off")


USE_NUMBA = _HAVE_NUMBA and numba_requested()


def backend_name() -> str:
    return "numba" if USE_NUMBA else "numpy"


def thread_count() -> int:
    """Worker-pool size, capped by ``RTI_THREADS``."""
    raw = os.environ.get("RTI_THREADS")
    n = os.cpu_count() or 1
    if raw:
        try:
            n = max(1, min(n, int(raw)))
        except ValueError:
            pass
    return n
