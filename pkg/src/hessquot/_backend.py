"""Kernel selection: compiled extension if importable, NumPy fallback otherwise.

Set ``HESSQUOT_PURE_PYTHON=1`` to force the fallback.
"""
from __future__ import annotations

import os

from . import _kernels_py

if os.environ.get("HESSQUOT_PURE_PYTHON", "") not in ("", "0"):
    kernels = _kernels_py
else:
    try:
        from . import _kernels as kernels  # type: ignore[attr-defined]
    except ImportError:  # extension not built
        kernels = _kernels_py

BACKEND: str = kernels.BACKEND
