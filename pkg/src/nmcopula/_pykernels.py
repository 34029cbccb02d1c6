"""Numpy implementation of the hot kernels (fallback for ``_ckernels``).

Each family is addressed by an integer code and receives two transformed
coordinate arrays ``x`` and ``y`` prepared once per data set:

=========  ============================  =========================
code       family                        ``x``, ``y``
=========  ============================  =========================
LINEAR     normal mode, FGM              ``a`` (density is 1 + theta a), unused
AMH        Ali-Mikhail-Haq               ``u1``, ``u2``
CLAYTON    Clayton                       ``log u1``, ``log u2``
FRANK      Frank                         ``u1``, ``u2``
GAUSSIAN   Gaussian                      ``z1``, ``z2`` (normal scores)
PRODUCT    independence                  unused
=========  ============================  =========================
"""

from __future__ import annotations

import numpy as np

LINEAR, AMH, CLAYTON, FRANK, GAUSSIAN, PRODUCT = range(6)

FRANK_SERIES = 1e-2
FOLD_OK, FOLD_BOUNDARY, FOLD_MAXIT = 0, 1, 2


def _clayton_logs(t, x, y):
    a = -t * x
    b = -t * y
    m = np.maximum(a, b)
    small = m < 1.0
    with np.errstate(over="ignore"):
        near = np.log1p(np.expm1(np.where(small, a, 0.0)) + np.expm1(np.where(small, b, 0.0)))
    far = m + np.log(np.exp(a - m) + np.exp(b - m) - np.exp(-m))
    return np.where(small, near, far), a, b, m


def _frank_pos(t, u, v):
    """log density and score for theta >= FRANK_SERIES (positive branch)."""
    eu = np.exp(-t * u)
    ev = np.exp(-t * v)
    et = np.exp(-t)
    d = eu * -np.expm1(-t * v) + ev * -np.expm1(-t * (1.0 - v))
    ld = np.log(t) + np.log(-np.expm1(-t)) - t * (u + v) - 2.0 * np.log(d)
    dd = (-u * eu * -np.expm1(-t * v) + v * eu * ev
          - v * ev * -np.expm1(-t * (1.0 - v)) + (1.0 - v) * et)
    sc = 1.0 / t + 1.0 / np.expm1(t) - (u + v) - 2.0 * dd / d
    return ld, sc


def _frank_series(t, u, v):
    a = u * (1.0 - u)
    b = v * (1.0 - v)
    s = (2.0 * u - 1.0) * (2.0 * v - 1.0)
    g1 = 0.5 * s
    g2 = a * b - 1.0 / 24.0
    g3 = a * b * s / 6.0
    g4 = 1.0 / 2880.0 - a * b * (a + b) / 12.0 + 0.5 * a * a * b * b
    ld = t * (g1 + t * (g2 + t * (g3 + t * g4)))
    sc = g1 + t * (2.0 * g2 + t * (3.0 * g3 + t * 4.0 * g4))
    return ld, sc


def _frank(t, u, v):
    t = np.broadcast_to(t, np.broadcast(t, u, v).shape)
    small = np.abs(t) < FRANK_SERIES
    ld, sc = _frank_series(t, u, v)
    if small.all():
        return ld, sc
    # c_t(u, v) = c_|t|(1 - u, v) for t < 0
    neg = t < 0
    ld_p, sc_p = _frank_pos(np.where(small, 1.0, np.abs(t)), np.where(neg, 1.0 - u, u), v)
    return np.where(small, ld, ld_p), np.where(small, sc, np.where(neg, -sc_p, sc_p))


def _eval(code, t, x, y, want_score):
    t = np.asarray(t, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        if code == LINEAR:
            den = 1.0 + t * x
            return np.log(den), x / den
        if code == PRODUCT:
            z = np.zeros(np.shape(x))
            return z, z
        if code == AMH:
            w = (1.0 - x) * (1.0 - y)
            k = (1.0 + x) * (1.0 + y) - 3.0
            num = 1.0 + t * k + t * t * w
            den = 1.0 - t * w
            ld = np.log(num) - 3.0 * np.log(den)
            return ld, (k + 2.0 * t * w) / num + 3.0 * w / den
        if code == CLAYTON:
            logs, a, b, m = _clayton_logs(t, x, y)
            ld = np.log1p(t) - (t + 1.0) * (x + y) - (1.0 / t + 2.0) * logs
            if not want_score:
                return ld, None
            ea = np.exp(a - m)
            eb = np.exp(b - m)
            ratio = (-x * ea - y * eb) / (ea + eb - np.exp(-m))
            sc = 1.0 / (1.0 + t) - (x + y) + logs / (t * t) - (1.0 / t + 2.0) * ratio
            return ld, sc
        if code == FRANK:
            return _frank(t, x, y)
        if code == GAUSSIAN:
            q = x * x + y * y
            p = x * y
            g = 1.0 - t * t
            ld = -0.5 * np.log(g) - (t * t * q - 2.0 * t * p) / (2.0 * g)
            sc = (t * g - t * q + p * (1.0 + t * t)) / (g * g)
            return ld, sc
    raise ValueError(f"unknown family code {code}")


def logdens(code, theta, x, y):
    return _eval(code, theta, np.asarray(x, float), np.asarray(y, float), False)[0]


def score(code, theta, x, y):
    """Derivative of :func:`logdens` with respect to theta."""
    return _eval(code, theta, np.asarray(x, float), np.asarray(y, float), True)[1]


def logdens_at(code, thetas, x, y):
    """Log density with a separate theta for every point."""
    return logdens(code, np.asarray(thetas, float), x, y)


def loglik(code, theta, x, y):
    return float(np.sum(logdens(code, theta, x, y)))


def score_sum(code, theta, x, y):
    return float(np.sum(score(code, theta, x, y)))


def ecop_counts(u1, u2, q1, q2):
    """``#{j : u1_j <= q1_k and u2_j <= q2_k}`` for every query ``k``."""
    u1 = np.asarray(u1, float)
    u2 = np.asarray(u2, float)
    q1 = np.asarray(q1, float)
    q2 = np.asarray(q2, float)
    out = np.empty(q1.shape[0], dtype=np.int64)
    step = max(1, 4_000_000 // max(1, u1.shape[0]))
    for s in range(0, q1.shape[0], step):
        blk = (u1[None, :] <= q1[s:s + step, None]) & (u2[None, :] <= q2[s:s + step, None])
        out[s:s + step] = blk.sum(axis=1)
    return out


# ----------------------------------------------------------------------------
# Leave-one-out refits

def _fold_scores(code, thetas, x, y):
    """Full-sample score sums at each theta in ``thetas``."""
    return np.array([score_sum(code, t, x, y) for t in thetas])


def fold_thetas(code, x, y, theta0, lo, hi, tol=1e-10, maxit=100):
    """Maximisers of the leave-one-out objectives ``L(theta) - l_i(theta)``.

    Each fold solves ``S(theta) - s_i(theta) = 0`` by a safeguarded secant
    iteration started at the full-sample maximiser ``theta0``.  The first
    step uses the full-sample curvature, which makes the start O(1/N^2)
    accurate; the root is kept inside a sign bracket.  A fold whose score
    at a search bound points outward returns the bound.

    Returns
    -------
    thetas : ndarray
    status : ndarray of int
        ``FOLD_OK``, ``FOLD_BOUNDARY`` or ``FOLD_MAXIT``.
    """
    x = np.asarray(x, float)
    y = np.asarray(y, float)
    theta0 = float(theta0)
    n = x.shape[0]
    h = 1e-6 * max(1.0, abs(theta0))
    t_lo = max(lo, theta0 - h)
    t_hi = min(hi, theta0 + h)
    s_full0 = score_sum(code, theta0, x, y)
    curv_full = (score_sum(code, t_hi, x, y) - score_sum(code, t_lo, x, y)) / (t_hi - t_lo)
    s_pts0 = score(code, theta0, x, y)
    curv_pts = (score(code, t_hi, x, y) - score(code, t_lo, x, y)) / (t_hi - t_lo)
    s_full_lo = score_sum(code, lo, x, y)
    s_full_hi = score_sum(code, hi, x, y)
    g_lo = s_full_lo - score(code, lo, x, y)
    g_hi = s_full_hi - score(code, hi, x, y)

    thetas = np.empty(n)
    status = np.full(n, FOLD_OK, dtype=np.int64)
    at_lo = ~(g_lo > 0.0)
    at_hi = ~(g_hi < 0.0) & ~at_lo
    thetas[at_lo] = lo
    thetas[at_hi] = hi
    status[at_lo | at_hi] = FOLD_BOUNDARY
    act = np.flatnonzero(~(at_lo | at_hi))
    if act.size == 0:
        return thetas, status

    # sign bracket [a, b] with g(a) > 0 > g(b)
    a = np.full(act.size, lo)
    b = np.full(act.size, hi)
    t0 = np.full(act.size, float(theta0))
    g0 = s_full0 - s_pts0[act]
    a = np.where(g0 > 0, t0, a)
    b = np.where(g0 < 0, t0, b)
    curv = curv_full - curv_pts[act]
    with np.errstate(divide="ignore", invalid="ignore"):
        t1 = t0 - g0 / curv
    t1 = np.where(np.isfinite(t1) & (curv < 0) & (t1 > a) & (t1 < b), t1, 0.5 * (a + b))
    done = g0 == 0.0
    t1 = np.where(done, t0, t1)

    for _ in range(maxit):
        idx = np.flatnonzero(~done)
        if idx.size == 0:
            break
        tt = t1[idx]
        g1 = _fold_scores(code, tt, x, y) - score(code, tt, x[act[idx]], y[act[idx]])
        a[idx] = np.where(g1 > 0, tt, a[idx])
        b[idx] = np.where(g1 < 0, tt, b[idx])
        with np.errstate(divide="ignore", invalid="ignore"):
            t2 = tt - g1 * (tt - t0[idx]) / (g1 - g0[idx])
        inside = np.isfinite(t2) & (t2 > a[idx]) & (t2 < b[idx])
        t2 = np.where(inside, t2, 0.5 * (a[idx] + b[idx]))
        conv = (np.abs(t2 - tt) <= tol) | (g1 == 0.0) | (b[idx] - a[idx] <= tol)
        t2 = np.where(g1 == 0.0, tt, t2)
        t0[idx] = tt
        g0[idx] = g1
        t1[idx] = t2
        done[idx] = conv
    thetas[act] = t1
    status[act[~done]] = FOLD_MAXIT
    return thetas, status
