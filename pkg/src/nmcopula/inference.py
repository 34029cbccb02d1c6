"""Maximum pseudolikelihood fits and the model-comparison criteria.

Every family carries one scalar parameter, so fitting is a bounded 1-D
problem: a golden-section pass over the log-pseudolikelihood locates the
maximiser coarsely and a safeguarded Newton iteration on the analytic score
finishes it.  Leave-one-out refits for the cross-validated criterion are
done by the compiled kernel, warm-started from the full-sample estimate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np

from . import kernels
from .core import CopulaModel, Family, cdf
from .empirical import PseudoSample, empirical_copula, loo_pseudo_all
from .exceptions import ConvergenceFailure, DimensionMismatch, InvalidParameter, NonFiniteLikelihood
from .normal_dist import inv_norm_cdf

THETA_TOL = 1e-10
GOLDEN_ITERS = 60
INVPHI = (math.sqrt(5.0) - 1.0) / 2.0
FLAT_TOL = 1e-12
MIN_FIT_N = 10
MIN_CIC_N = 20

DEFAULT_BOUNDS = {
    Family.NORMAL_MODE: (-1.0, 1.0),
    Family.AMH: (-1.0, 1.0),
    Family.CLAYTON: (1e-6, 50.0),
    Family.FRANK: (-50.0, 50.0),
    Family.FGM: (-1.0, 1.0),
    Family.GAUSSIAN: (-1.0 + 1e-6, 1.0 - 1e-6),
}

_CODES = {
    Family.NORMAL_MODE: kernels.LINEAR,
    Family.FGM: kernels.LINEAR,
    Family.AMH: kernels.AMH,
    Family.CLAYTON: kernels.CLAYTON,
    Family.FRANK: kernels.FRANK,
    Family.GAUSSIAN: kernels.GAUSSIAN,
}


@dataclass(frozen=True)
class FamilySpec:
    """A family to fit, with its structural choices and theta search interval."""

    family: Family
    kappa: tuple[int, ...] | None = None
    bounds: tuple[float, float] | None = None

    def __post_init__(self):
        fam = Family.parse(self.family)
        if fam not in DEFAULT_BOUNDS:
            raise InvalidParameter(f"{fam.value} has no parameter to fit")
        kappa = self.kappa
        if fam is Family.NORMAL_MODE:
            if kappa is None:
                raise InvalidParameter("normal mode spec needs kappa")
            kappa = CopulaModel.normal_mode(0.0, kappa).kappa
        elif kappa is not None:
            raise InvalidParameter(f"{fam.value} takes no mode numbers")
        lo, hi = DEFAULT_BOUNDS[fam]
        if self.bounds is not None:
            blo, bhi = (float(b) for b in self.bounds)
            if not (lo <= blo < bhi <= hi):
                raise InvalidParameter(f"search interval {self.bounds} outside the "
                                       f"{fam.value} domain [{lo}, {hi}]")
            lo, hi = blo, bhi
        object.__setattr__(self, "family", fam)
        object.__setattr__(self, "kappa", kappa)
        object.__setattr__(self, "bounds", (lo, hi))

    @property
    def name(self) -> str:
        if self.family is Family.NORMAL_MODE:
            return "normal_mode(" + ",".join(str(k) for k in self.kappa) + ")"
        return self.family.value

    def model(self, theta: float) -> CopulaModel:
        if self.family is Family.NORMAL_MODE:
            return CopulaModel.normal_mode(theta, self.kappa)
        return CopulaModel(self.family, theta)


def standard_specs(kappa=(1, 1)) -> list[FamilySpec]:
    """Normal mode with the given mode numbers plus the five classical families."""
    return [FamilySpec(Family.NORMAL_MODE, tuple(kappa))] + [
        FamilySpec(f) for f in (Family.AMH, Family.CLAYTON, Family.FRANK, Family.FGM,
                                Family.GAUSSIAN)]


def _coordinates(spec: FamilySpec, u: np.ndarray) -> tuple[int, np.ndarray, np.ndarray]:
    """Family code and transformed coordinates for the kernels."""
    fam = spec.family
    if fam is Family.NORMAL_MODE:
        if u.shape[1] != len(spec.kappa):
            raise DimensionMismatch(f"{spec.name} needs {len(spec.kappa)} columns, got {u.shape[1]}")
        k = np.asarray(spec.kappa, dtype=float)
        a = np.prod(np.cos(k * np.pi * u), axis=1)
        return kernels.LINEAR, a, a
    if u.shape[1] != 2:
        raise DimensionMismatch(f"{spec.name} is bivariate")
    u1, u2 = u[:, 0], u[:, 1]
    if fam is Family.FGM:
        a = (1.0 - 2.0 * u1) * (1.0 - 2.0 * u2)
        return kernels.LINEAR, a, a
    if fam is Family.CLAYTON:
        return kernels.CLAYTON, np.log(u1), np.log(u2)
    if fam is Family.GAUSSIAN:
        return kernels.GAUSSIAN, inv_norm_cdf(u1), inv_norm_cdf(u2)
    return _CODES[fam], np.ascontiguousarray(u1), np.ascontiguousarray(u2)


# ----------------------------------------------------------------------------
# Scalar maximisation

def _finite_or_neg_inf(v: float) -> float:
    return v if v == v else -math.inf


def _curvature(code: int, theta: float, x, y, lo: float, hi: float) -> float:
    if code == kernels.LINEAR:
        return -float(np.sum((x / (1.0 + theta * x)) ** 2))
    h = 1e-6 * max(1.0, abs(theta))
    a, b = max(lo, theta - h), min(hi, theta + h)
    return (kernels.score_sum(code, b, x, y) - kernels.score_sum(code, a, x, y)) / (b - a)


def _golden(f, lo: float, hi: float, iters: int = GOLDEN_ITERS) -> tuple[float, float, float]:
    """Golden-section search for a maximum; returns (best, bracket_lo, bracket_hi)."""
    a, b = lo, hi
    c = b - INVPHI * (b - a)
    d = a + INVPHI * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(iters):
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - INVPHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + INVPHI * (b - a)
            fd = f(d)
        if b - a <= 1e-6 * (hi - lo):
            break
    return (c if fc >= fd else d), a, b


class MpleFit(NamedTuple):
    theta_hat: float
    loglik: float
    flags: tuple[str, ...]


def _maximize(code: int, x, y, lo: float, hi: float) -> MpleFit:
    s_lo = kernels.score_sum(code, lo, x, y)
    s_hi = kernels.score_sum(code, hi, x, y)
    f = lambda t: _finite_or_neg_inf(kernels.loglik(code, t, x, y))  # noqa: E731
    if not s_lo > 0.0 and not s_hi < 0.0:
        # score points outward at both ends: not concave, fall back to the likelihood
        best = lo if f(lo) >= f(hi) else hi
        return MpleFit(best, f(best), ("boundary",))
    if not s_lo > 0.0:
        return MpleFit(lo, f(lo), ("boundary",))
    if not s_hi < 0.0:
        return MpleFit(hi, f(hi), ("boundary",))

    t, a, b = _golden(f, lo, hi)
    # widen the golden bracket until the score changes sign across it
    width = max(b - a, 1e-8)
    while True:
        a = max(lo, t - width)
        b = min(hi, t + width)
        sa = s_lo if a == lo else kernels.score_sum(code, a, x, y)
        sb = s_hi if b == hi else kernels.score_sum(code, b, x, y)
        if sa > 0.0 > sb:
            break
        width *= 4.0
    for _ in range(200):
        s = kernels.score_sum(code, t, x, y)
        if s > 0.0:
            a = t
        elif s < 0.0:
            b = t
        else:
            break
        step = -s / _curvature(code, t, x, y, lo, hi)
        t_new = t + step
        if not (np.isfinite(t_new) and a < t_new < b):
            t_new = 0.5 * (a + b)
        done = abs(t_new - t) <= THETA_TOL or b - a <= THETA_TOL
        t = t_new
        if done:
            break
    else:
        raise ConvergenceFailure("score iteration did not converge")
    ll = kernels.loglik(code, t, x, y)
    if not np.isfinite(ll):
        raise NonFiniteLikelihood(f"log-pseudolikelihood is {ll} at theta={t}")
    return MpleFit(t, ll, ())


def fit_mple(spec: FamilySpec, ps: PseudoSample) -> MpleFit:
    """Maximum pseudolikelihood estimate of theta.

    Returns
    -------
    MpleFit
        ``(theta_hat, loglik, flags)``.  ``flags`` may contain
        ``"boundary"`` (maximum on a search bound), ``"flat_likelihood"``
        (normal mode with every cosine product numerically zero; theta_hat
        is then 0) and ``"small_sample"``.
    """
    if ps.n < 1:
        raise InvalidParameter("empty pseudo-sample")
    code, x, y = _coordinates(spec, ps.u)
    extra = ("small_sample",) if ps.n < MIN_FIT_N else ()
    if code == kernels.LINEAR and float(np.max(np.abs(x))) < FLAT_TOL:
        return MpleFit(0.0, kernels.loglik(code, 0.0, x, y), ("flat_likelihood",) + extra)
    lo, hi = spec.bounds
    fit = _maximize(code, x, y, lo, hi)
    return MpleFit(fit.theta_hat, fit.loglik, fit.flags + extra)


# ----------------------------------------------------------------------------
# Criteria

def cvm_criterion(model: CopulaModel, ps: PseudoSample) -> float:
    """Sum over the sample of the squared gap between model and empirical copula."""
    if model.dim != ps.dim:
        raise DimensionMismatch("model and pseudo-sample dimensions differ")
    gap = np.asarray(cdf(model, ps.u)) - np.asarray(empirical_copula(ps, ps.u))
    return float(np.sum(gap * gap))


def aic(loglik: float, k: int = 1) -> float:
    return 2.0 * k - 2.0 * loglik


@dataclass(frozen=True)
class CicResult:
    cic: float
    fold_thetas: np.ndarray = field(repr=False)
    boundary_folds: int = 0


def cic(spec: FamilySpec, ps: PseudoSample, theta_hat: float | None = None) -> CicResult:
    """Cross-validated mean log density at leave-one-out pseudo-observations.

    Fold ``i`` refits theta on the other ``N - 1`` pseudo-observations and
    evaluates the density at the leave-one-out point of row ``i``.  Folds
    are independent, and the mean is accumulated in row order.

    Raises
    ------
    ConvergenceFailure
        A fold hit the iteration cap; the message lists the offending rows.
    """
    code, x, y = _coordinates(spec, ps.u)
    lo, hi = spec.bounds
    if theta_hat is None:
        theta_hat = fit_mple(spec, ps).theta_hat
    loo = loo_pseudo_all(ps)
    _, lx, ly = _coordinates(spec, loo)
    if code == kernels.LINEAR and float(np.max(np.abs(x))) < FLAT_TOL:
        thetas = np.zeros(ps.n)
        status = np.zeros(ps.n, dtype=np.int64)
    else:
        thetas, status = kernels.fold_thetas(code, x, y, float(theta_hat), lo, hi,
                                             THETA_TOL, 200)
    bad = np.flatnonzero(status == kernels.FOLD_MAXIT)
    if bad.size:
        raise ConvergenceFailure(f"{spec.name}: leave-one-out refit failed for rows "
                                 f"{bad[:10].tolist()} ({bad.size} total)")
    vals = kernels.logdens_at(code, thetas, lx, ly)
    return CicResult(float(math.fsum(vals)) / ps.n, np.asarray(thetas),
                     int(np.count_nonzero(status == kernels.FOLD_BOUNDARY)))


# ----------------------------------------------------------------------------
# Comparison

CRITERIA = ("cvmc", "aic", "neg2n_cic")


@dataclass(frozen=True)
class FitReport:
    family: str
    kappa: tuple[int, ...] | None
    theta_hat: float
    loglik: float
    cvmc: float
    aic: float
    cic: float
    neg2n_cic: float
    n: int
    flags: tuple[str, ...] = ()

    def as_dict(self) -> dict:
        return {
            "family": self.family,
            "kappa": list(self.kappa) if self.kappa is not None else None,
            "theta_hat": self.theta_hat,
            "loglik": self.loglik,
            "cvmc": self.cvmc,
            "aic": self.aic,
            "cic": self.cic,
            "neg2n_cic": self.neg2n_cic,
            "n": self.n,
            "flags": list(self.flags),
        }


def evaluate(spec: FamilySpec, ps: PseudoSample) -> FitReport:
    fit = fit_mple(spec, ps)
    model = spec.model(fit.theta_hat)
    cv = cic(spec, ps, fit.theta_hat)
    flags = list(fit.flags)
    if ps.n < MIN_CIC_N:
        flags.append("small_sample_cic")
    return FitReport(
        family=spec.family.value, kappa=spec.kappa, theta_hat=fit.theta_hat,
        loglik=fit.loglik, cvmc=cvm_criterion(model, ps), aic=aic(fit.loglik),
        cic=cv.cic, neg2n_cic=-2.0 * ps.n * cv.cic, n=ps.n, flags=tuple(dict.fromkeys(flags)),
    )


def rank_reports(reports: Sequence[FitReport], criterion: str) -> list[FitReport]:
    """Reports sorted best-first (ascending) by ``criterion``; ties keep input order."""
    if criterion not in CRITERIA:
        raise InvalidParameter(f"criterion must be one of {CRITERIA}, got {criterion!r}")
    return sorted(reports, key=lambda r: getattr(r, criterion))


def compare_models(specs: Sequence[FamilySpec], ps: PseudoSample,
                   criterion: str = "neg2n_cic") -> list[FitReport]:
    """Fit every spec and return the reports ranked by ``criterion``."""
    if len(specs) < 2:
        raise InvalidParameter("compare_models needs at least two specs")
    if ps.n < 2:
        raise InvalidParameter("pseudo-sample too small to compare models")
    return rank_reports([evaluate(s, ps) for s in specs], criterion)
