"""Kernel dispatch: compiled extension when available, NumPy otherwise.

Set ``CIRCLEFLOW_PURE=1`` to force the NumPy fallback.
"""
import os

from . import _pykernels

BACKEND = "python"

if os.environ.get("CIRCLEFLOW_PURE", "") != "1":
    try:
        from . import _ckernels as _impl

        BACKEND = "cython"
    except ImportError:  # extension not built
        _impl = _pykernels
else:
    _impl = _pykernels

eval_series = _impl.eval_series
eval_series_pair = _impl.eval_series_pair
gagliardo_sum = _impl.gagliardo_sum
multisymbol_recursive = _impl.multisymbol_recursive

__all__ = ["BACKEND", "eval_series", "eval_series_pair", "gagliardo_sum", "multisymbol_recursive"]
