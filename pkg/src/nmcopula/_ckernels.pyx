# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels; same API and family codes as ``_pykernels``."""

import numpy as np
cimport numpy as cnp
from libc.math cimport log, log1p, exp, expm1, fabs, isfinite, INFINITY, NAN

cnp.import_array()

cdef enum:
    LINEAR = 0
    AMH = 1
    CLAYTON = 2
    FRANK = 3
    GAUSSIAN = 4
    PRODUCT = 5

cdef double FRANK_SERIES = 1e-2
FOLD_OK, FOLD_BOUNDARY, FOLD_MAXIT = 0, 1, 2


cdef inline double _safe_log(double z) noexcept nogil:
    if z > 0.0:
        return log(z)
    if z == 0.0:
        return -INFINITY
    return NAN


cdef inline void _frank_pos(double t, double u, double v, double* ld, double* sc,
                            bint want_ld) noexcept nogil:
    cdef double eu = exp(-t * u)
    cdef double ev = exp(-t * v)
    cdef double et = exp(-t)
    cdef double omv = -expm1(-t * v)
    cdef double omw = -expm1(-t * (1.0 - v))
    cdef double d = eu * omv + ev * omw
    if want_ld:
        ld[0] = log(t) + log(-expm1(-t)) - t * (u + v) - 2.0 * _safe_log(d)
    cdef double dd = -u * eu * omv + v * eu * ev - v * ev * omw + (1.0 - v) * et
    sc[0] = 1.0 / t + 1.0 / expm1(t) - (u + v) - 2.0 * dd / d


cdef inline void _eval1(int code, double t, double x, double y,
                        double* ld, double* sc, bint want_ld=True) noexcept nogil:
    cdef double w, k, num, den, a, b, m, logs, ea, eb, q, p, g, s, g1, g2, g3, g4
    if code == LINEAR:
        den = 1.0 + t * x
        if want_ld:
            ld[0] = _safe_log(den)
        sc[0] = x / den
    elif code == PRODUCT:
        ld[0] = 0.0
        sc[0] = 0.0
    elif code == AMH:
        w = (1.0 - x) * (1.0 - y)
        k = (1.0 + x) * (1.0 + y) - 3.0
        num = 1.0 + t * k + t * t * w
        den = 1.0 - t * w
        if want_ld:
            ld[0] = _safe_log(num) - 3.0 * _safe_log(den)
        sc[0] = (k + 2.0 * t * w) / num + 3.0 * w / den
    elif code == CLAYTON:
        a = -t * x
        b = -t * y
        m = a if a > b else b
        if m < 1.0:
            ea = expm1(a)
            eb = expm1(b)
            logs = log1p(ea + eb)
            # ratio S'/S with S = u1^-t + u2^-t - 1
            g = (-x * (1.0 + ea) - y * (1.0 + eb)) / (1.0 + ea + eb)
        else:
            ea = exp(a - m)
            eb = exp(b - m)
            s = ea + eb - exp(-m)
            logs = m + log(s)
            g = (-x * ea - y * eb) / s
        if want_ld:
            ld[0] = log1p(t) - (t + 1.0) * (x + y) - (1.0 / t + 2.0) * logs
        sc[0] = 1.0 / (1.0 + t) - (x + y) + logs / (t * t) - (1.0 / t + 2.0) * g
    elif code == FRANK:
        if fabs(t) < FRANK_SERIES:
            a = x * (1.0 - x)
            b = y * (1.0 - y)
            s = (2.0 * x - 1.0) * (2.0 * y - 1.0)
            g1 = 0.5 * s
            g2 = a * b - 1.0 / 24.0
            g3 = a * b * s / 6.0
            g4 = 1.0 / 2880.0 - a * b * (a + b) / 12.0 + 0.5 * a * a * b * b
            ld[0] = t * (g1 + t * (g2 + t * (g3 + t * g4)))
            sc[0] = g1 + t * (2.0 * g2 + t * (3.0 * g3 + t * 4.0 * g4))
        elif t > 0.0:
            _frank_pos(t, x, y, ld, sc, want_ld)
        else:
            _frank_pos(-t, 1.0 - x, y, ld, sc, want_ld)
            sc[0] = -sc[0]
    elif code == GAUSSIAN:
        q = x * x + y * y
        p = x * y
        g = 1.0 - t * t
        ld[0] = -0.5 * _safe_log(g) - (t * t * q - 2.0 * t * p) / (2.0 * g)
        sc[0] = (t * g - t * q + p * (1.0 + t * t)) / (g * g)
    else:
        ld[0] = NAN
        sc[0] = NAN


cdef inline double _score_sum(int code, double t, const double[::1] x,
                              const double[::1] y) noexcept nogil:
    cdef Py_ssize_t i
    cdef double ld, sc, acc = 0.0
    for i in range(x.shape[0]):
        _eval1(code, t, x[i], y[i], &ld, &sc, False)
        acc += sc
    return acc


cdef inline double _score1(int code, double t, double x, double y) noexcept nogil:
    cdef double ld, sc
    _eval1(code, t, x, y, &ld, &sc, False)
    return sc


def _check(int code):
    if code < 0 or code > 5:
        raise ValueError(f"unknown family code {code}")


def logdens(int code, double theta, x, y):
    _check(code)
    cdef const double[::1] xv = np.ascontiguousarray(x, dtype=np.float64).ravel()
    cdef const double[::1] yv = np.ascontiguousarray(y, dtype=np.float64).ravel()
    out = np.empty(xv.shape[0])
    cdef double[::1] ov = out
    cdef Py_ssize_t i
    cdef double sc
    with nogil:
        for i in range(xv.shape[0]):
            _eval1(code, theta, xv[i], yv[i], &ov[i], &sc)
    return out.reshape(np.shape(x))


def score(int code, double theta, x, y):
    _check(code)
    cdef const double[::1] xv = np.ascontiguousarray(x, dtype=np.float64).ravel()
    cdef const double[::1] yv = np.ascontiguousarray(y, dtype=np.float64).ravel()
    out = np.empty(xv.shape[0])
    cdef double[::1] ov = out
    cdef Py_ssize_t i
    cdef double ld
    with nogil:
        for i in range(xv.shape[0]):
            _eval1(code, theta, xv[i], yv[i], &ld, &ov[i], False)
    return out.reshape(np.shape(x))


def logdens_at(int code, thetas, x, y):
    """Log density with a separate theta for every point."""
    _check(code)
    cdef const double[::1] tv = np.ascontiguousarray(thetas, dtype=np.float64).ravel()
    cdef const double[::1] xv = np.ascontiguousarray(x, dtype=np.float64).ravel()
    cdef const double[::1] yv = np.ascontiguousarray(y, dtype=np.float64).ravel()
    out = np.empty(xv.shape[0])
    cdef double[::1] ov = out
    cdef Py_ssize_t i
    cdef double sc
    with nogil:
        for i in range(xv.shape[0]):
            _eval1(code, tv[i], xv[i], yv[i], &ov[i], &sc)
    return out


def loglik(int code, double theta, x, y):
    _check(code)
    cdef const double[::1] xv = np.ascontiguousarray(x, dtype=np.float64).ravel()
    cdef const double[::1] yv = np.ascontiguousarray(y, dtype=np.float64).ravel()
    cdef Py_ssize_t i
    cdef double ld, sc, acc = 0.0
    with nogil:
        for i in range(xv.shape[0]):
            _eval1(code, theta, xv[i], yv[i], &ld, &sc)
            acc += ld
    return acc


def score_sum(int code, double theta, x, y):
    _check(code)
    cdef const double[::1] xv = np.ascontiguousarray(x, dtype=np.float64).ravel()
    cdef const double[::1] yv = np.ascontiguousarray(y, dtype=np.float64).ravel()
    cdef double acc
    with nogil:
        acc = _score_sum(code, theta, xv, yv)
    return acc


def ecop_counts(u1, u2, q1, q2):
    """``#{j : u1_j <= q1_k and u2_j <= q2_k}`` via a sweep over u1 with a
    binary indexed tree over the ranks of u2."""
    a1 = np.ascontiguousarray(u1, dtype=np.float64)
    a2 = np.ascontiguousarray(u2, dtype=np.float64)
    b1 = np.ascontiguousarray(q1, dtype=np.float64)
    b2 = np.ascontiguousarray(q2, dtype=np.float64)
    cdef Py_ssize_t n = a1.shape[0], m = b1.shape[0]
    order_pts = np.argsort(a1, kind="stable")
    order_q = np.argsort(b1, kind="stable")
    sorted_u2 = np.sort(a2)
    # 1-based tree slot of each point (ties in u2 get distinct slots)
    slot = np.empty(n, dtype=np.int64)
    slot[np.argsort(a2, kind="stable")] = np.arange(1, n + 1)
    limit = np.searchsorted(sorted_u2, b2, side="right").astype(np.int64)

    cdef const cnp.int64_t[::1] op = order_pts.astype(np.int64)
    cdef const cnp.int64_t[::1] oq = order_q.astype(np.int64)
    cdef const cnp.int64_t[::1] sl = slot
    cdef const cnp.int64_t[::1] lim = limit
    cdef const double[::1] pv = a1
    cdef const double[::1] qv = b1
    tree = np.zeros(n + 1, dtype=np.int64)
    cdef cnp.int64_t[::1] tr = tree
    out = np.empty(m, dtype=np.int64)
    cdef cnp.int64_t[::1] ov = out
    cdef Py_ssize_t j = 0, k, qi, pos
    cdef cnp.int64_t acc
    with nogil:
        for k in range(m):
            qi = oq[k]
            while j < n and pv[op[j]] <= qv[qi]:
                pos = sl[op[j]]
                while pos <= n:
                    tr[pos] += 1
                    pos += pos & (-pos)
                j += 1
            acc = 0
            pos = lim[qi]
            while pos > 0:
                acc += tr[pos]
                pos -= pos & (-pos)
            ov[qi] = acc
    return out


def fold_thetas(int code, x, y, double theta0, double lo, double hi,
                double tol=1e-10, int maxit=100):
    """Leave-one-out maximisers; see ``_pykernels.fold_thetas``."""
    _check(code)
    cdef const double[::1] xv = np.ascontiguousarray(x, dtype=np.float64).ravel()
    cdef const double[::1] yv = np.ascontiguousarray(y, dtype=np.float64).ravel()
    cdef Py_ssize_t n = xv.shape[0], i
    cdef int it
    cdef double h = 1e-6 * (fabs(theta0) if fabs(theta0) > 1.0 else 1.0)
    cdef double t_lo = theta0 - h if theta0 - h > lo else lo
    cdef double t_hi = theta0 + h if theta0 + h < hi else hi
    cdef double s_full0, curv_full, s_full_lo, s_full_hi
    cdef double g_lo, g_hi, a, b, t0, g0, t1, g1, t2, curv
    cdef bint done
    thetas = np.empty(n)
    status = np.zeros(n, dtype=np.int64)
    cdef double[::1] th = thetas
    cdef cnp.int64_t[::1] st = status
    with nogil:
        s_full0 = _score_sum(code, theta0, xv, yv)
        curv_full = (_score_sum(code, t_hi, xv, yv) - _score_sum(code, t_lo, xv, yv)) / (t_hi - t_lo)
        s_full_lo = _score_sum(code, lo, xv, yv)
        s_full_hi = _score_sum(code, hi, xv, yv)
        for i in range(n):
            g_lo = s_full_lo - _score1(code, lo, xv[i], yv[i])
            g_hi = s_full_hi - _score1(code, hi, xv[i], yv[i])
            if not (g_lo > 0.0):
                th[i] = lo
                st[i] = 1
                continue
            if not (g_hi < 0.0):
                th[i] = hi
                st[i] = 1
                continue
            a = lo
            b = hi
            t0 = theta0
            g0 = s_full0 - _score1(code, theta0, xv[i], yv[i])
            if g0 > 0.0:
                a = t0
            elif g0 < 0.0:
                b = t0
            curv = curv_full - (_score1(code, t_hi, xv[i], yv[i])
                                - _score1(code, t_lo, xv[i], yv[i])) / (t_hi - t_lo)
            t1 = t0 - g0 / curv
            if not (isfinite(t1) and curv < 0.0 and t1 > a and t1 < b):
                t1 = 0.5 * (a + b)
            done = g0 == 0.0
            if done:
                t1 = t0
            it = 0
            while not done and it < maxit:
                g1 = _score_sum(code, t1, xv, yv) - _score1(code, t1, xv[i], yv[i])
                if g1 > 0.0:
                    a = t1
                elif g1 < 0.0:
                    b = t1
                t2 = t1 - g1 * (t1 - t0) / (g1 - g0)
                if not (isfinite(t2) and t2 > a and t2 < b):
                    t2 = 0.5 * (a + b)
                done = fabs(t2 - t1) <= tol or g1 == 0.0 or b - a <= tol
                if g1 == 0.0:
                    t2 = t1
                t0 = t1
                g0 = g1
                t1 = t2
                it += 1
            th[i] = t1
            st[i] = 0 if done else 2
    return thetas, status
