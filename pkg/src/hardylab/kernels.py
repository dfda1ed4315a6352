"""Backend selection for the node kernels.

The compiled extension is preferred; ``HARDYLAB_BACKEND=python`` forces the
numpy fallback. Both expose ``poly_eval``, ``projection_frames`` and
``tree_sum`` with identical signatures.
"""

import os

from . import _pykernels

if os.environ.get("HARDYLAB_BACKEND", "").lower() == "python":
    _impl = _pykernels
    BACKEND = "python"
else:
    try:
        from . import _ckernels as _impl
    except ImportError:
        _impl = _pykernels
        BACKEND = "python"
    else:
        BACKEND = "cython"

poly_eval = _impl.poly_eval
projection_frames = _impl.projection_frames
tree_sum = _impl.tree_sum

__all__ = ["BACKEND", "poly_eval", "projection_frames", "tree_sum"]
