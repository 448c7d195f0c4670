"""Kernel backend selection.

Prefers the compiled extension when it was built; otherwise (or when the
``BANDSELECT_PURE_PYTHON`` environment variable is set) uses the NumPy
fallback. Both backends implement the same contract and agree to ~1e-12.
"""

import os

from . import _hist_py

if os.environ.get("BANDSELECT_PURE_PYTHON"):
    _impl = _hist_py
    BACKEND = "python"
else:
    try:
        from . import _histcore as _impl
        BACKEND = "compiled"
    except ImportError:
        _impl = _hist_py
        BACKEND = "python"

DENSE_CELL_CAP = _impl.DENSE_CELL_CAP
dense_counts = _impl.dense_counts
joint_entropy_bits = _impl.joint_entropy_bits
entropy_terms2 = _impl.entropy_terms2
entropy_terms3 = _impl.entropy_terms3
sq_distances = _impl.sq_distances
nearest_k = _impl.nearest_k
