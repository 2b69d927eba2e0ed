"""Backend selection for the hot kernels.

The compiled extension is used when it imports; otherwise the numpy/Python
reference implementation is used.  Set ``TOPOSURF_PURE_PYTHON=1`` to force
the fallback.
"""

import os

from . import _pykernels

BACKEND = "python"
_impl = _pykernels

if not os.environ.get("TOPOSURF_PURE_PYTHON"):
    try:
        from . import _ckernels as _impl  # type: ignore[no-redef]

        BACKEND = "cython"
    except ImportError:  # pragma: no cover - depends on build
        _impl = _pykernels

fast_march = _impl.fast_march
four_point_range = _impl.four_point_range
four_point_quads = _impl.four_point_quads
tri_update = _impl.tri_update


def backends():
    """Available kernel modules keyed by name (for benchmarks and tests)."""
    out = {"python": _pykernels}
    try:
        from . import _ckernels

        out["cython"] = _ckernels
    except ImportError:  # pragma: no cover
        pass
    return out
