"""Runtime switches read from the environment.

``SPINLAB_BACKEND``  ``numba`` (default when importable) or ``numpy``.
``SPINLAB_THREADS``  upper bound on worker threads for parameter sweeps.
"""
from __future__ import annotations

import os

try:
    import numba  # noqa: F401

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover
    HAVE_NUMBA = False


def backend() -> str:
    choice = os.environ.get("SPINLAB_BACKEND", "numba").strip().lower()
    if choice not in ("numba", "numpy"):
        raise ValueError(f"SPINLAB_BACKEND must be 'numba' or 'numpy', got {choice!r}")
    if choice == "numba" and not HAVE_NUMBA:
        return "numpy"
    return choice


def max_threads() -> int:
    raw = os.environ.get("SPINLAB_THREADS")
    if not raw:
        return 1
    n = int(raw)
    if n < 1:
        raise ValueError("SPINLAB_THREADS must be >= 1")
    return n
