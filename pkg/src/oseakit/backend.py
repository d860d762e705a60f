"""Kernel backend selection.

The simplex inner loop in :mod:`oseakit._kernels` is written in
numba-compatible numpy.  By default it is compiled with ``numba.njit``;
setting ``OSEA_BACKEND=numpy`` runs the identical source uncompiled, which
is useful for debugging and as a dependency-light fallback.  Both variants
stay importable side by side so they can be benchmarked against each other
(see ``benchmarks/backend_compare.py``).
"""
from __future__ import annotations

import os
from functools import lru_cache
from types import SimpleNamespace

from . import _kernels

ENV_VAR = "OSEA_BACKEND"
_VALID = ("numba", "numpy")


def jit_available() -> bool:
    try:
        import numba  # noqa: F401
    except ImportError:
        return False
    return True


def default_backend() -> str:
    choice = os.environ.get(ENV_VAR, "").strip().lower()
    if choice and choice not in _VALID:
        raise ValueError(f"{ENV_VAR} must be one of {_VALID}, got {choice!r}")
    if choice:
        return choice
    return "numba" if jit_available() else "numpy"


@lru_cache(maxsize=None)
def get_kernels(name: str | None = None) -> SimpleNamespace:
    """Return the kernel namespace for the requested backend.

    ``None`` resolves via the OSEA_BACKEND environment variable (read once
    per distinct call signature; processes pick their backend at startup).
    """
    backend = name or default_backend()
    if backend not in _VALID:
        raise ValueError(f"unknown backend {backend!r}")
    if backend == "numba":
        from numba import njit

        run_phase = njit(cache=True)(_kernels.run_phase)
    else:
        run_phase = _kernels.run_phase
    return SimpleNamespace(name=backend, jitted=backend == "numba", run_phase=run_phase)
