"""Kernel backend selection.

The convolution kernels exist twice: numba ``@njit`` loop kernels and a
pure-numpy implementation. ``LOSTNET_BACKEND=numba|numpy`` picks one when
the package is imported; the default is numba when it is importable.
:func:`set_backend` switches at runtime, which the benchmark uses to time
both paths in one process.
"""

import os

try:
    import numba  # noqa: F401

    HAS_NUMBA = True
except ImportError:
    HAS_NUMBA = False

_VALID = ("numba", "numpy")


def _resolve(choice: str) -> str:
    choice = choice.strip().lower()
    if choice not in _VALID:
        raise ValueError(f"unknown backend {choice!r}, expected one of {_VALID}")
    if choice == "numba" and not HAS_NUMBA:
        raise RuntimeError("backend 'numba' requested but numba is not installed")
    return choice


def _from_env() -> str:
    choice = os.environ.get("LOSTNET_BACKEND", "")
    if choice:
        return _resolve(choice)
    return "numba" if HAS_NUMBA else "numpy"


_active = _from_env()


def active_backend() -> str:
    """Name of the backend currently used by the conv kernels."""
    return _active


def set_backend(name: str) -> None:
    """Switch the conv kernel backend ("numba" or "numpy") at runtime."""
    global _active
    _active = _resolve(name)
