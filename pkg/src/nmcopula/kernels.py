"""Backend selection for the hot kernels.

The compiled ``_ckernels`` extension is used when it imports; otherwise the
numpy implementation in ``_pykernels`` is used.  Setting the environment
variable ``NMCOPULA_PURE_PYTHON`` to a non-empty value other than ``0``
forces the fallback.
"""

from __future__ import annotations

import os

from . import _pykernels
from ._pykernels import (AMH, CLAYTON, FOLD_BOUNDARY, FOLD_MAXIT, FOLD_OK, FRANK, GAUSSIAN,
                         LINEAR, PRODUCT)

_FORCE_PY = os.environ.get("NMCOPULA_PURE_PYTHON", "") not in ("", "0")

if _FORCE_PY:
    _impl = _pykernels
    BACKEND = "python"
else:
    try:
        from . import _ckernels as _impl
        BACKEND = "cython"
    except ImportError:
        _impl = _pykernels
        BACKEND = "python"

logdens = _impl.logdens
logdens_at = _impl.logdens_at
score = _impl.score
loglik = _impl.loglik
score_sum = _impl.score_sum
ecop_counts = _impl.ecop_counts
fold_thetas = _impl.fold_thetas

__all__ = ["BACKEND", "LINEAR", "AMH", "CLAYTON", "FRANK", "GAUSSIAN", "PRODUCT",
           "FOLD_OK", "FOLD_BOUNDARY", "FOLD_MAXIT", "logdens", "logdens_at", "score", "loglik",
           "score_sum", "ecop_counts", "fold_thetas"]
