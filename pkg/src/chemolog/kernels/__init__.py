"""Hot kernels with a numba path and a pure-numpy fallback.

The backend is chosen once at import time from the ``CHEMOLOG_BACKEND``
environment variable (``numba`` or ``numpy``; default ``numba``).  If numba
cannot be imported the numpy path is used silently.
"""

import importlib
import os

_ENV = "CHEMOLOG_BACKEND"
_CHOICES = ("numba", "numpy")


def get_backend(name):
    """Return the kernel module for ``name`` regardless of the env setting."""
    if name not in _CHOICES:
        raise ValueError(f"unknown backend {name!r}; expected one of {_CHOICES}")
    return importlib.import_module(f"{__name__}._{name}")


def _select():
    requested = os.environ.get(_ENV, "numba").strip().lower() or "numba"
    if requested not in _CHOICES:
        raise ValueError(f"{_ENV}={requested!r}; expected one of {_CHOICES}")
    if requested == "numba":
        try:
            return "numba", get_backend("numba")
        except ImportError:
            return "numpy", get_backend("numpy")
    return "numpy", get_backend("numpy")


BACKEND, _impl = _select()

apply_operator = _impl.apply_operator
operator_diagonal = _impl.operator_diagonal
cg = _impl.cg
upwind_flux = _impl.upwind_flux
flux_divergence = _impl.flux_divergence

__all__ = [
    "BACKEND",
    "get_backend",
    "apply_operator",
    "operator_diagonal",
    "cg",
    "upwind_flux",
    "flux_divergence",
]
