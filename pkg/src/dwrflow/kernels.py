"""Smoother kernel backend selection.

The compiled extension is preferred; the pure-Python module is the
fallback. Set DWRFLOW_PURE_PYTHON=1 to force the fallback (used by the
equivalence tests and the benchmark).
"""

import os

if os.environ.get("DWRFLOW_PURE_PYTHON"):
    from . import _kernels_py as _impl
    BACKEND = "python"
else:
    try:
        from . import _kernels as _impl
        BACKEND = "compiled"
    except ImportError:
        from . import _kernels_py as _impl
        BACKEND = "python"

bgs_sweep = _impl.bgs_sweep
