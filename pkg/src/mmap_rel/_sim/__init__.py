"""Simulation kernels: the compiled one when built, else the pure-Python twin.

Set ``MMAP_REL_PURE_PYTHON=1`` to force the fallback.
"""

import os

from . import _fallback
from .tables import LABELS, Tables, build_tables

if os.environ.get("MMAP_REL_PURE_PYTHON") == "1":
    kernel = _fallback
else:
    try:
        from . import _kernel as kernel
    except ImportError:  # extension not built
        kernel = _fallback

BACKEND = kernel.BACKEND

__all__ = ["kernel", "BACKEND", "LABELS", "Tables", "build_tables"]
