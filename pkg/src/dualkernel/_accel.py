"""Pick the compiled kernels when built, else the NumPy fallback.

Set ``DUALKERNEL_PURE_PYTHON=1`` to force the fallback.
"""
import os

from . import _purepy

try:
    if os.environ.get("DUALKERNEL_PURE_PYTHON"):
        raise ImportError("pure-Python kernels forced by environment")
    from . import _core
except ImportError:
    _core = None

COMPILED = _core is not None
_impl = _core if COMPILED else _purepy

overlap_tile = _impl.overlap_tile
smo = _impl.smo


def implementations():
    """Available kernel implementations by name."""
    impls = {"python": _purepy}
    if _core is not None:
        impls["compiled"] = _core
    return impls
