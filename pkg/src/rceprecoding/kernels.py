"""Backend selection for the per-symbol projected gradient solver.

The compiled ``_pgd`` extension is used when it imports; set
``RCEPRECODING_PURE=1`` to force the numpy fallback.
"""

import os

from . import _pgd_py

BACKEND = "python"
solve_batch = _pgd_py.solve_batch

if os.environ.get("RCEPRECODING_PURE", "") not in ("1", "true", "yes"):
    try:
        from . import _pgd
    except ImportError:
        pass
    else:
        BACKEND = "cython"
        solve_batch = _pgd.solve_batch

__all__ = ["BACKEND", "solve_batch"]
