"""Kernel backend selection.

The compiled extension is used when it imports cleanly; otherwise the numpy
fallback is used. Set ``CMUX_PURE_PYTHON=1`` to force the fallback.
"""

import os

from cmux import _kernels_py

kernels = _kernels_py
BACKEND = "python"

if os.environ.get("CMUX_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from cmux import _kernels as _compiled
    except ImportError:  # extension not built
        pass
    else:
        kernels = _compiled
        BACKEND = "cython"

__all__ = ["kernels", "BACKEND"]
