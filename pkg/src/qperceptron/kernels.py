"""Backend selection for the hot RK4 loops.

The compiled extension is used when it imports; otherwise the NumPy
implementation takes over. Set ``QPERCEPTRON_PURE_PYTHON=1`` to force the
fallback (useful for benchmarking and for checking the two agree).
"""

import os

from . import _kernels_py

BACKEND = "python"

if os.environ.get("QPERCEPTRON_PURE_PYTHON", "") not in ("", "0"):
    from ._kernels_py import lindblad_rk4, propagate_two_level
else:
    try:
        from ._kernels import lindblad_rk4, propagate_two_level

        BACKEND = "compiled"
    except ImportError:  # extension not built
        from ._kernels_py import lindblad_rk4, propagate_two_level

python_backend = _kernels_py

__all__ = ["BACKEND", "lindblad_rk4", "propagate_two_level", "python_backend"]
