"""Backend selection for the hot kernels.

The compiled extension is used when it imports; otherwise the numpy
implementation takes over. Setting ``RDSTHERMO_PURE=1`` forces the
fallback.
"""
import os

from . import _pykernels

if os.environ.get("RDSTHERMO_PURE", "") not in ("", "0"):
    _impl = _pykernels
else:
    try:
        from . import _ckernels as _impl
    except ImportError:  # extension not built
        _impl = _pykernels

BACKEND = _impl.NAME

admissible_words = _impl.admissible_words
prefix_products = _impl.prefix_products
neumaier_tree_sum = _impl.neumaier_tree_sum
max_weight_subset = _impl.max_weight_subset
