"""Numerical estimators of association measures and dependence properties.

Nothing here uses family-specific closed forms for the measures: the
integrals are evaluated from the copula CDF (and its conditional CDFs) by
Gauss-Legendre quadrature, or estimated from samples by rank statistics.
These serve both as a public API and as independent checks on the closed
forms in :mod:`nmcopula.normal_mode`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.stats import kendalltau, rankdata, spearmanr

from .core import CopulaModel, Family, cdf, conditional_cdf, density, interior_lattice, sample
from .exceptions import DimensionMismatch, InvalidParameter, NoDensity
from .measures import MeasureSet, Provenance

_PROBE_CELLS = 64
_ROOT_ITERS = 60
_SIGMA_GRID = 64
# probe lines used to locate u-values where C(u, .) - u . vanishes identically
_OUTER_PROBES = (0.1234567, 0.3819660, 0.6180340, 0.8765432)


@dataclass(frozen=True)
class QuadSpec:
    """Gauss-Legendre rule on (0, 1): ``nodes`` per axis (>= 32)."""

    nodes: int = 256
    atol: float = 1e-8

    def __post_init__(self):
        if int(self.nodes) < 32:
            raise InvalidParameter("quadrature needs at least 32 nodes per axis")
        object.__setattr__(self, "nodes", int(self.nodes))


@lru_cache(maxsize=64)
def _gl01(n: int) -> tuple[np.ndarray, np.ndarray]:
    x, w = np.polynomial.legendre.leggauss(n)
    return 0.5 * (x + 1.0), 0.5 * w


def _composite(breaks: np.ndarray, n: int) -> tuple[np.ndarray, np.ndarray]:
    """Gauss-Legendre panels between consecutive breakpoints.

    Each panel gets ``max(16, ceil(n * width))`` nodes so the total stays
    close to ``n`` while short panels are still integrated accurately.
    """
    xs, ws = [], []
    for a, b in zip(breaks[:-1], breaks[1:]):
        if b - a <= 1e-14:
            continue
        x, w = _gl01(max(16, int(math.ceil(n * (b - a)))))
        xs.append(a + (b - a) * x)
        ws.append((b - a) * w)
    return np.concatenate(xs), np.concatenate(ws)


def _bisect_roots(f, lo: np.ndarray, hi: np.ndarray, flo: np.ndarray) -> np.ndarray:
    """Vectorised bisection for sign changes of ``f`` bracketed by [lo, hi]."""
    lo, hi, flo = lo.copy(), hi.copy(), flo.copy()
    for _ in range(_ROOT_ITERS):
        mid = 0.5 * (lo + hi)
        fm = f(mid)
        same = np.sign(fm) == np.sign(flo)
        lo = np.where(same, mid, lo)
        flo = np.where(same, fm, flo)
        hi = np.where(same, hi, mid)
    return 0.5 * (lo + hi)


def _sign_change_brackets(vals: np.ndarray):
    s = np.sign(vals)
    return np.argwhere(s[..., :-1] * s[..., 1:] < 0)


def _gap(model: CopulaModel, u, v):
    u, v = np.broadcast_arrays(np.asarray(u, float), np.asarray(v, float))
    return np.asarray(cdf(model, np.stack([u, v], axis=-1))) - u * v


def _abs_gap_integral(model: CopulaModel, n: int) -> float:
    """``int int |C - uv|`` with panels split at the sign changes of C - uv."""
    probe = (np.arange(_PROBE_CELLS) + 0.5) / _PROBE_CELLS

    # outer breakpoints: roots of C - uv along a few horizontal probe lines
    outer = [0.0, 1.0]
    for v0 in _OUTER_PROBES:
        vals = _gap(model, probe, v0)
        br = _sign_change_brackets(vals[None, :])[:, 1]
        if br.size:
            outer.extend(_bisect_roots(lambda x: _gap(model, x, v0), probe[br], probe[br + 1],
                                       vals[br]))
    uo, wo = _composite(np.unique(np.asarray(outer)), n)

    # inner breakpoints per outer node
    grid = _gap(model, uo[:, None], probe[None, :])
    br = _sign_change_brackets(grid)
    roots = np.empty(0)
    if br.shape[0]:
        rows, cols = br[:, 0], br[:, 1]
        roots = _bisect_roots(lambda x: _gap(model, uo[rows], x), probe[cols], probe[cols + 1],
                              grid[rows, cols])
    pts_u, pts_v, pts_w = [], [], []
    for i, (u, w) in enumerate(zip(uo, wo)):
        mine = roots[rows == i] if br.shape[0] else roots
        vi, wi = _composite(np.unique(np.concatenate([[0.0, 1.0], mine])), n)
        pts_u.append(np.full(vi.shape, u))
        pts_v.append(vi)
        pts_w.append(w * wi)
    pu, pv, pw = (np.concatenate(a) for a in (pts_u, pts_v, pts_w))
    return float(np.sum(pw * np.abs(_gap(model, pu, pv))))


def _tensor(n: int):
    x, w = _gl01(n)
    uu, vv = np.meshgrid(x, x, indexing="ij")
    return uu, vv, np.outer(w, w)


def measures_numeric(model: CopulaModel, q: QuadSpec = QuadSpec()) -> MeasureSet:
    """All six measures by quadrature of their defining integrals.

    Kendall's tau uses the conditional CDFs ``dC/du1`` and ``dC/du2``
    (analytic for every family with a density); sigma splits the domain at
    the numerically located sign changes of ``C - uv``.
    """
    if model.dim != 2:
        raise DimensionMismatch("measures are defined for bivariate models")
    if not model.has_density:
        raise NoDensity(f"{model.label()}: tau needs conditional distributions")
    n = q.nodes
    uu, vv, ww = _tensor(n)
    pts = np.stack([uu, vv], axis=-1)
    c = np.asarray(cdf(model, pts))
    rho = 12.0 * float(np.sum(ww * (c - uu * vv)))
    sigma = 12.0 * _abs_gap_integral(model, n)
    h1 = np.asarray(conditional_cdf(model, 2, pts))  # dC/du1
    h2 = np.asarray(conditional_cdf(model, 1, pts))  # dC/du2
    tau = 1.0 - 4.0 * float(np.sum(ww * h1 * h2))
    x, w = _gl01(n)
    diag = np.asarray(cdf(model, np.stack([x, x], axis=-1)))
    anti = np.asarray(cdf(model, np.stack([x, 1.0 - x], axis=-1)))
    gamma = 4.0 * (float(np.sum(w * anti)) - float(np.sum(w * (x - diag))))
    footrule = 6.0 * float(np.sum(w * diag)) - 2.0
    beta = 4.0 * float(cdf(model, (0.5, 0.5))) - 1.0
    return MeasureSet(sigma, rho, tau, beta, gamma, footrule, Provenance.QUADRATURE)


def omega(c1: CopulaModel, c2: CopulaModel, q: QuadSpec = QuadSpec()) -> float:
    """Concordance functional ``4 int int C1 dC2 - 1`` (``C2`` needs a density)."""
    if c1.dim != 2 or c2.dim != 2:
        raise DimensionMismatch("omega takes bivariate models")
    uu, vv, ww = _tensor(q.nodes)
    pts = np.stack([uu, vv], axis=-1)
    return 4.0 * float(np.sum(ww * np.asarray(cdf(c1, pts)) * np.asarray(density(c2, pts)))) - 1.0


# ----------------------------------------------------------------------------
# Monte Carlo

def _ecdf_grid(pu: np.ndarray, pv: np.ndarray, g: np.ndarray) -> np.ndarray:
    """Empirical CDF of the points ``(pu, pv)`` on the grid ``g x g``."""
    k = g.size
    iu = np.searchsorted(g, pu, side="left")
    iv = np.searchsorted(g, pv, side="left")
    hist = np.zeros((k + 1, k + 1))
    np.add.at(hist, (iu, iv), 1.0)
    return np.cumsum(np.cumsum(hist, axis=0), axis=1)[:k, :k] / pu.size


def _sample_measures(u: np.ndarray) -> np.ndarray:
    n = u.shape[0]
    r = rankdata(u[:, 0])
    s = rankdata(u[:, 1])
    rho = spearmanr(u[:, 0], u[:, 1])[0]
    tau = kendalltau(u[:, 0], u[:, 1])[0]
    footrule = 1.0 - 3.0 * float(np.sum(np.abs(r - s))) / (n * n - 1.0)
    gamma = float(np.sum(np.abs(r + s - n - 1.0) - np.abs(r - s))) / math.floor(n * n / 2.0)
    pu = r / (n + 1.0)
    pv = s / (n + 1.0)
    beta = 4.0 * float(np.mean((pu <= 0.5) & (pv <= 0.5))) - 1.0
    # sigma, cross-fitted: the sign of C_n - uv comes from one half of the
    # sample and the magnitude from the other, which removes the upward bias
    # of |C_n - uv| where the true gap is near zero
    g = (np.arange(_SIGMA_GRID) + 0.5) / _SIGMA_GRID
    gaps = [_ecdf_grid(pu[h::2], pv[h::2], g) - np.outer(g, g) for h in (0, 1)]
    cross = 0.5 * (np.sign(gaps[0]) * gaps[1] + np.sign(gaps[1]) * gaps[0])
    sigma = 12.0 * float(np.mean(cross))
    return np.array([sigma, rho, tau, beta, gamma, footrule])


def measures_mc(model: CopulaModel, n: int, seed: int, batches: int = 20) -> MeasureSet:
    """Rank-based sample measures from ``n`` draws.

    Standard errors come from ``batches`` equal batches (batch means).
    Sigma is cross-fitted on a 64 x 64 midpoint grid: one half of the sample
    supplies the sign of ``C_n - uv`` and the other half its value, so the
    estimate is unbiased where the copula is locally independent.
    """
    if model.dim != 2:
        raise DimensionMismatch("measures are defined for bivariate models")
    u = sample(model, n, seed)
    est = _sample_measures(u)
    m = n // batches
    if m >= 20:
        per = np.array([_sample_measures(u[b * m:(b + 1) * m]) for b in range(batches)])
        se = per.std(axis=0, ddof=1) / math.sqrt(batches)
    else:
        se = np.full(6, np.nan)
    names = ("sigma", "rho", "tau", "beta", "gamma", "footrule")
    return MeasureSet(*(float(v) for v in est), Provenance.MONTE_CARLO,
                      stderr={k: float(s) for k, s in zip(names, se)})


# ----------------------------------------------------------------------------
# Dependence profiles

@dataclass(frozen=True)
class TailProfile:
    rows: tuple[tuple[float, float, float], ...]
    lower_decreasing: bool
    upper_decreasing: bool


def tail_dependence_profile(model: CopulaModel, u_list) -> TailProfile:
    """``lambda_L(u) = C(u,u)/u`` and ``lambda_U(u) = (2u - 1 + C(1-u,1-u))/u``.

    Rows are returned in the order of ``u_list``; the trend flags refer to
    decreasing ``u`` (moving toward the tail).
    """
    if model.dim != 2:
        raise DimensionMismatch("tail dependence is bivariate")
    us = np.asarray(list(u_list), dtype=float)
    if np.any((us <= 0.0) | (us >= 0.5)):
        raise InvalidParameter("tail profile points must lie in (0, 1/2)")
    lower = np.asarray(cdf(model, np.stack([us, us], axis=-1))) / us
    upper = (2.0 * us - 1.0 + np.asarray(cdf(model, np.stack([1.0 - us, 1.0 - us], axis=-1)))) / us
    order = np.argsort(-us)
    dec_l = bool(np.all(np.diff(lower[order]) <= 0.0))
    dec_u = bool(np.all(np.diff(upper[order]) <= 0.0))
    rows = tuple((float(a), float(b), float(c)) for a, b, c in zip(us, lower, upper))
    return TailProfile(rows, dec_l, dec_u)


@dataclass(frozen=True)
class QuadrantMap:
    signs: np.ndarray
    verdict: str


def quadrant_dependence_map(model: CopulaModel, grid_n: int = 50, tol: float = 1e-12) -> QuadrantMap:
    """Sign field of ``C - uv`` on the interior lattice with a PQD/NQD verdict."""
    if model.dim != 2:
        raise DimensionMismatch("quadrant dependence is bivariate")
    grid = interior_lattice(grid_n)
    diff = np.asarray(cdf(model, grid)) - grid[..., 0] * grid[..., 1]
    signs = np.where(diff > tol, 1, np.where(diff < -tol, -1, 0)).astype(np.int8)
    pos, neg = bool((signs > 0).any()), bool((signs < 0).any())
    if not pos and not neg:
        verdict = "independent"
    elif not neg:
        verdict = "PQD"
    elif not pos:
        verdict = "NQD"
    else:
        verdict = "mixed"
    return QuadrantMap(signs, verdict)


def closed_form_measures(model: CopulaModel) -> MeasureSet | None:
    """Closed-form measures when the family has them (normal mode, product)."""
    if model.family is Family.NORMAL_MODE and model.dim == 2:
        from .normal_mode import nm_measures
        return nm_measures(model.nm_params)
    if model.family is Family.PRODUCT and model.dim == 2:
        return MeasureSet(0.0, 0.0, 0.0, 0.0, 0.0, 0.0, Provenance.CLOSED_FORM)
    return None
