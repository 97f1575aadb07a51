"""Kernel selection.

The compiled kernels are used when the extension module was built and the
environment variable ``MPERT_PURE_PYTHON`` is unset or ``0``; otherwise the
pure Python fallback is used.  Both give identical results.
"""
from __future__ import annotations

import os

from mpert import _pykernels

BACKEND = "python"
dot_exact = _pykernels.dot_exact
dot_float = _pykernels.dot_float

if os.environ.get("MPERT_PURE_PYTHON", "0") in ("", "0"):
    try:
        from mpert import _ckernels
    except ImportError:  # extension not built
        _ckernels = None
    if _ckernels is not None:
        BACKEND = "cython"
        dot_exact = _ckernels.dot_exact
        dot_float = _ckernels.dot_float
