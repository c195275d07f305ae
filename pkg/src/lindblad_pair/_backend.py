"""Kernel backend selection.

``LINDBLAD_PAIR_BACKEND=numpy`` forces the pure-numpy kernels; the default
is ``numba`` whenever numba imports cleanly.
"""

import os

ENV_VAR = "LINDBLAD_PAIR_BACKEND"

try:
    import numba

    HAS_NUMBA = True
except ImportError:  # pragma: no cover - numba is optional
    numba = None
    HAS_NUMBA = False


def _resolve() -> str:
    requested = os.environ.get(ENV_VAR, "").strip().lower()
    if requested in ("", "auto"):
        return "numba" if HAS_NUMBA else "numpy"
    if requested not in ("numba", "numpy"):
        raise RuntimeError(f"{ENV_VAR} must be 'numba' or 'numpy', got {requested!r}")
    if requested == "numba" and not HAS_NUMBA:
        raise RuntimeError(f"{ENV_VAR}=numba but numba is not importable")
    return requested


BACKEND = _resolve()


def njit(func):
    """``numba.njit(cache=True)`` when numba is present, identity otherwise."""
    if not HAS_NUMBA:
        return func
    return numba.njit(cache=True, nogil=True)(func)
