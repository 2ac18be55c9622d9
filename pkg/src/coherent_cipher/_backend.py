"""Kernel backend selection.

The compiled extension is used when it imports; otherwise the numpy
fallback. ``use(...)`` switches explicitly (tests and benchmarks).
"""
from . import _fallback

try:
    from . import _kernels as _compiled
except ImportError:  # extension not built
    _compiled = None

_BACKENDS = {"python": _fallback}
if _compiled is not None:
    _BACKENDS["compiled"] = _compiled

_active = "compiled" if _compiled is not None else "python"


def available():
    return sorted(_BACKENDS)


def name():
    return _active


def use(backend):
    """Select ``"compiled"`` or ``"python"``; returns the previous name."""
    global _active
    if backend not in _BACKENDS:
        raise ValueError(f"backend {backend!r} not available; have {available()}")
    previous, _active = _active, backend
    return previous


def kernels(backend=None):
    return _BACKENDS[backend or _active]
