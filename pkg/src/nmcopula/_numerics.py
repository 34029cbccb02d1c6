"""Vectorised bracketed Newton inversion of increasing functions on (0, 1)."""

from __future__ import annotations

import numpy as np

from .exceptions import ConvergenceFailure

BRACKET = (1e-15, 1.0 - 1e-15)
TOL = 1e-12
MAX_ITER = 200


def invert_increasing(F, dF, target, x0=None, tol=TOL, max_iter=MAX_ITER):
    """Solve ``F(x) = target`` elementwise for nondecreasing ``F`` on ``BRACKET``.

    Newton steps are taken only when they land strictly inside the current
    bracket; otherwise the bracket is bisected.  An element is converged once
    ``|F(x) - target| <= tol`` or its bracket has shrunk to a few ulps (a
    conditional CDF can be steeper than double precision can resolve).

    ``F`` and ``dF`` are called with ``(x, idx)`` where ``idx`` selects the
    still-active elements, so callers can index their own parameter arrays.
    """
    target = np.asarray(target, dtype=float)
    shape = target.shape
    p = target.reshape(-1)
    n = p.size
    lo = np.full(n, BRACKET[0])
    hi = np.full(n, BRACKET[1])
    x = np.clip(p if x0 is None else np.asarray(x0, dtype=float).reshape(-1), *BRACKET).copy()
    active = np.arange(n)

    for _ in range(max_iter):
        xa = x[active]
        f = F(xa, active) - p[active]
        done = (np.abs(f) <= tol) | (hi[active] - lo[active] <= 4.0 * np.spacing(xa))
        below = f < 0
        lo[active] = np.where(below, xa, lo[active])
        hi[active] = np.where(below, hi[active], xa)
        with np.errstate(divide="ignore", invalid="ignore"):
            step = xa - f / dF(xa, active)
        la, ha = lo[active], hi[active]
        ok = np.isfinite(step) & (step > la) & (step < ha)
        x[active] = np.where(done, xa, np.where(ok, step, 0.5 * (la + ha)))
        active = active[~done]
        if active.size == 0:
            out = x.reshape(shape)
            return float(out) if out.ndim == 0 else out
    raise ConvergenceFailure(
        f"monotone inversion did not converge in {max_iter} iterations "
        f"({active.size} of {n} elements unresolved)"
    )
