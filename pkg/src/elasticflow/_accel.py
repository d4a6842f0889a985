"""Optional numba acceleration.

The hot loops (per-element assembly and the banded LU) are written once in
plain loop form.  When numba is importable they are compiled with
``numba.njit``; otherwise, or when ``ELASTICFLOW_BACKEND=numpy`` is set, the
vectorised numpy / scipy implementations are used instead.
"""

from __future__ import annotations

import os

try:  # pragma: no cover - exercised implicitly
    import numba

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover
    numba = None
    HAVE_NUMBA = False

_VALID = ("numba", "numpy")


def requested_backend() -> str:
    name = os.environ.get("ELASTICFLOW_BACKEND", "numba").strip().lower()
    if name not in _VALID:
        raise ValueError(f"ELASTICFLOW_BACKEND must be one of {_VALID}, got {name!r}")
    return name


def default_backend() -> str:
    """Backend actually used when none is passed explicitly."""
    name = requested_backend()
    if name == "numba" and not HAVE_NUMBA:
        return "numpy"
    return name


def resolve_backend(name: str | None) -> str:
    if name is None:
        return default_backend()
    name = name.lower()
    if name not in _VALID:
        raise ValueError(f"unknown backend {name!r}")
    if name == "numba" and not HAVE_NUMBA:
        raise RuntimeError("numba backend requested but numba is not installed")
    return name


def njit(func):
    """Compile ``func`` with numba when available, else return it unchanged."""
    if HAVE_NUMBA:
        return numba.njit(cache=True, fastmath=False)(func)
    return func
