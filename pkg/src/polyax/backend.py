"""Kernel backend selection.

The package ships two implementations of its hot kernels: a Cython extension
(``polyax._kernels``) and a pure-numpy twin (``polyax._kernels_np``).  The
compiled one is preferred when importable; ``PAX_BACKEND=numpy|cython``
overrides, and ``use_backend`` switches at runtime (mainly for tests and the
backend benchmark).
"""

import os

from . import _kernels_np

_ENV_VAR = "PAX_BACKEND"

try:
    from . import _kernels as _kernels_c
except ImportError:
    _kernels_c = None

_BACKENDS = {"numpy": _kernels_np}
if _kernels_c is not None:
    _BACKENDS["cython"] = _kernels_c


def available_backends():
    return sorted(_BACKENDS)


def _default_backend():
    forced = os.environ.get(_ENV_VAR, "").strip().lower()
    if forced:
        if forced not in _BACKENDS:
            raise ImportError(
                f"{_ENV_VAR}={forced!r} requested but only {available_backends()} available"
            )
        return _BACKENDS[forced]
    return _kernels_c if _kernels_c is not None else _kernels_np


_active = _default_backend()


def use_backend(name):
    """Switch the active kernel backend; returns the previous one's name."""
    global _active
    if name not in _BACKENDS:
        raise ValueError(f"unknown backend {name!r}; available: {available_backends()}")
    previous = _active.NAME
    _active = _BACKENDS[name]
    return previous


def active_backend():
    return _active.NAME


def bessel_series(nu, x):
    return _active.bessel_series(nu, x)


def cubic_interp_even(values, dx, xmax, q):
    return _active.cubic_interp_even(values, dx, xmax, q)


def translate_gather(values, dx, xmax, x, y, u, w):
    return _active.translate_gather(values, dx, xmax, x, y, u, w)
