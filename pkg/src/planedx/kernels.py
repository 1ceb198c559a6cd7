"""Sampling-kernel backend selection.

The compiled Cython kernels are used when available; set
PLANEDX_FORCE_PYTHON=1 to force the numpy fallback (the benchmark and the
backend-agreement tests use this).
"""

import os

from . import _kernels_py

if os.environ.get("PLANEDX_FORCE_PYTHON"):
    _impl = _kernels_py
else:
    try:
        from . import _kernels_cy as _impl
    except ImportError:
        _impl = _kernels_py

BACKEND = _impl.BACKEND
trilinear_points = _impl.trilinear_points
sample_plane = _impl.sample_plane
