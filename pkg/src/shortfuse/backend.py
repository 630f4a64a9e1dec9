"""Execution backend selection: numba-jitted kernels vs pure numpy.

The hot numeric kernels (the computation-record interpreter and the
nearest-neighbour counting used by the mutual-information estimator)
exist in two functionally identical variants:

* ``numba`` -- the kernel source compiled with ``numba.njit(cache=True)``;
* ``numpy`` -- the same source executed as plain Python over numpy views.

Selection order: an explicit :func:`set_backend` call wins, then the
``SHORTFUSE_NUMBA`` environment variable (``0``/``false`` forces numpy,
``1``/``true`` forces numba), then auto-detection (numba when importable).

Both variants are deterministic run-to-run. Results agree across
backends to ~1e-13 relative error; they are not guaranteed bitwise
identical because elementwise transcendentals may round differently.
"""

from __future__ import annotations

import contextlib
import os
import warnings

from .errors import ConfigError

_FORCED: str | None = None
_JIT_CACHE: dict[int, object] = {}

_TRUE = {"1", "true", "yes", "on"}
_FALSE = {"0", "false", "no", "off"}


def _numba_available() -> bool:
    try:
        import numba  # noqa: F401
    except ImportError:
        return False
    return True


def active_backend() -> str:
    """Resolve the backend name currently in effect: "numba" or "numpy"."""
    if _FORCED is not None:
        return _FORCED
    env = os.environ.get("SHORTFUSE_NUMBA", "").strip().lower()
    if env in _FALSE:
        return "numpy"
    if env in _TRUE:
        if not _numba_available():
            warnings.warn("SHORTFUSE_NUMBA=1 but numba is not importable; using numpy")
            return "numpy"
        return "numba"
    return "numba" if _numba_available() else "numpy"


def set_backend(name: str | None) -> None:
    """Force a backend ("numba" or "numpy"); ``None`` restores auto-detection."""
    global _FORCED
    if name is not None:
        if name not in ("numba", "numpy"):
            raise ConfigError(f"unknown backend {name!r}; expected 'numba' or 'numpy'")
        if name == "numba" and not _numba_available():
            raise ConfigError("numba backend requested but numba is not importable")
    _FORCED = name


@contextlib.contextmanager
def use_backend(name: str | None):
    """Context manager pinning the backend for a block of code."""
    previous = _FORCED
    set_backend(name)
    try:
        yield
    finally:
        set_backend(previous)


def jit_twin(func):
    """Return the ``njit(cache=True)``-compiled twin of ``func`` (memoized)."""
    key = id(func)
    cached = _JIT_CACHE.get(key)
    if cached is None:
        from numba import njit

        cached = njit(cache=True)(func)
        _JIT_CACHE[key] = cached
    return cached


def select(func):
    """Pick the compiled or plain variant of ``func`` per the active backend."""
    if active_backend() == "numba":
        return jit_twin(func)
    return func
