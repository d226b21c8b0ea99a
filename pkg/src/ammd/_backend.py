"""Kernel backend selection.

The compiled extension is used when it imports; otherwise the numpy
fallback. ``use_backend`` switches explicitly (tests and benchmarks).
"""
import logging

from . import _pykernels

log = logging.getLogger(__name__)

try:
    from . import _kernels as _compiled
except ImportError:  # extension not built
    _compiled = None

_active = _compiled if _compiled is not None else _pykernels


def available():
    """Names of the backends that can be selected."""
    return ["cython", "python"] if _compiled is not None else ["python"]


def current():
    return "cython" if _active is _compiled and _compiled is not None else "python"


def use_backend(name):
    """Select ``"cython"`` or ``"python"`` kernels; returns the previous name."""
    global _active
    prev = current()
    if name == "cython":
        if _compiled is None:
            raise RuntimeError("compiled kernels are not built; run `pip install -e .`")
        _active = _compiled
    elif name == "python":
        _active = _pykernels
    else:
        raise ValueError(f"unknown backend {name!r}")
    log.debug("kernel backend: %s", name)
    return prev


def kernels():
    return _active
