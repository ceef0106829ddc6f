"""Kernel backend selection.

The compiled Cython extension ``qpising._kernels`` is preferred; when it is
not built (pure checkout) the numpy implementation is used.  Set
``QPISING_KERNELS=numpy`` to force the fallback, e.g. for benchmarking.
"""

from __future__ import annotations

import os

if os.environ.get("QPISING_KERNELS", "").lower() in ("numpy", "py", "python"):
    from . import _kernels_py as _impl

    BACKEND = "numpy"
else:
    try:
        from . import _kernels as _impl  # type: ignore[attr-defined]

        BACKEND = "cython"
    except ImportError:
        from . import _kernels_py as _impl

        BACKEND = "numpy"

apply_1q = _impl.apply_1q
apply_diag_1q = _impl.apply_diag_1q
apply_diag_2q = _impl.apply_diag_2q
expect_z = _impl.expect_z
