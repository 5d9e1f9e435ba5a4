"""JIT switch for the hot kernels.

Set ``POLYSERIES_DISABLE_NUMBA=1`` to run every kernel through its pure
numpy path (or as plain Python where no vectorised twin exists).
"""
import os

_flag = os.environ.get("POLYSERIES_DISABLE_NUMBA", "").strip().lower()

try:
    import numba as nb
    HAVE_NUMBA = True
except ImportError:  # pragma: no cover
    nb = None
    HAVE_NUMBA = False

USE_NUMBA = HAVE_NUMBA and _flag not in ("1", "true", "yes", "on")


def njit(*args, **kwargs):
    if USE_NUMBA:
        return nb.njit(*args, **kwargs)
    if args and callable(args[0]):
        return args[0]
    return lambda func: func


def resolve_backend(backend):
    """Map ``None``/"auto" to the configured default backend name."""
    if backend in (None, "auto"):
        return "numba" if USE_NUMBA else "numpy"
    if backend not in ("numba", "numpy"):
        raise ValueError(f"unknown backend {backend!r}")
    return backend
