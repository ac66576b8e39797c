"""Kernel backend selection.

The hot inner loops ship in two interchangeable implementations: numba
compiled loops and a pure-numpy fallback. The SWISHNET_BACKEND environment
variable picks one ("numba", "numpy", or "auto", the default); auto prefers
numba and silently falls back to numpy when numba cannot be imported.
"""

import os
from contextlib import contextmanager

from . import _kernels_numpy
from .errors import ConfigError

ENV_VAR = "SWISHNET_BACKEND"

_active = None


def _load_numba():
    try:
        from . import _kernels_numba
    except ImportError:
        return None
    return _kernels_numba


def available_backends() -> tuple[str, ...]:
    return ("numpy", "numba") if _load_numba() is not None else ("numpy",)


def _resolve(name: str):
    if name == "numpy":
        return _kernels_numpy
    if name == "numba":
        mod = _load_numba()
        if mod is None:
            raise ConfigError("backend 'numba' requested but numba is not importable")
        return mod
    if name == "auto":
        return _load_numba() or _kernels_numpy
    raise ConfigError(f"unknown backend {name!r}; expected numba, numpy, or auto")


def select(name: str):
    """Activate a backend by name and return its kernel module."""
    global _active
    _active = _resolve(name)
    return _active


def active():
    """The active kernel module, initializing from the environment on first use."""
    global _active
    if _active is None:
        _active = _resolve(os.environ.get(ENV_VAR, "auto"))
    return _active


def active_name() -> str:
    return active().NAME


@contextmanager
def use(name: str):
    """Temporarily switch backend (for tests and benchmark comparisons)."""
    global _active
    previous = active()
    _active = _resolve(name)
    try:
        yield _active
    finally:
        _active = previous
