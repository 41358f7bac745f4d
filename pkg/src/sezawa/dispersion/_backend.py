"""Kernel selection: compiled extension when importable, numpy otherwise.

Set ``SEZAWA_PURE_PYTHON=1`` to force the numpy kernel.
"""

import os

BACKEND = "python"
if os.environ.get("SEZAWA_PURE_PYTHON", "") not in ("", "0"):
    from . import _kernels_py as kernels
else:
    try:
        from . import _kernels as kernels

        BACKEND = "cython"
    except ImportError:
        from . import _kernels_py as kernels

__all__ = ["BACKEND", "kernels"]
