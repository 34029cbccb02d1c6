"""The normal mode copula family.

For amplitude ``theta`` in [-1, 1] and positive integer mode numbers
``kappa = (k_1, ..., k_D)``::

    C(u) = prod_d u_d + theta * prod_d sin(k_d pi u_d) / (k_d pi)
    c(u) = 1 + theta * prod_d cos(k_d pi u_d)

Every proper sub-vector of ``U`` is uniform (the cosine integrates to zero
over each axis), which makes sequential sampling trivial: draw the first
``D - 1`` coordinates uniformly and invert the last conditional.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from ._numerics import invert_increasing
from .exceptions import DimensionMismatch, InvalidParameter
from .measures import MeasureSet, Provenance

PI = math.pi


@dataclass(frozen=True)
class NormalModeParams:
    theta: float
    kappa: tuple[int, ...]

    def __post_init__(self):
        theta = float(self.theta)
        if not -1.0 <= theta <= 1.0:
            raise InvalidParameter(f"normal mode amplitude must lie in [-1, 1], got {self.theta}")
        kappa = tuple(self.kappa)
        if len(kappa) < 2:
            raise InvalidParameter("normal mode copula needs at least two mode numbers")
        for k in kappa:
            if isinstance(k, bool) or int(k) != k or int(k) < 1:
                raise InvalidParameter(f"mode numbers must be positive integers, got {self.kappa}")
        object.__setattr__(self, "theta", theta)
        object.__setattr__(self, "kappa", tuple(int(k) for k in kappa))

    @property
    def dim(self) -> int:
        return len(self.kappa)


class Monotonicity(str, Enum):
    POSITIVE = "positive"
    NEGATIVE = "negative"
    INDEPENDENT = "independent"
    NONMONOTONIC = "nonmonotonic"


def _points(params: NormalModeParams, p) -> np.ndarray:
    u = np.asarray(p, dtype=float)
    if u.shape[-1:] != (params.dim,):
        raise DimensionMismatch(f"expected points of dimension {params.dim}, got shape {u.shape}")
    return u


def _bivariate(params: NormalModeParams) -> None:
    if params.dim != 2:
        raise DimensionMismatch("operation is defined for bivariate normal mode copulas only")


def nm_cdf(params: NormalModeParams, p):
    u = _points(params, p)
    k = np.asarray(params.kappa, dtype=float)
    trig = np.prod(np.sin(k * PI * u) / (k * PI), axis=-1)
    return np.prod(u, axis=-1) + params.theta * trig


def nm_density(params: NormalModeParams, p):
    u = _points(params, p)
    k = np.asarray(params.kappa, dtype=float)
    return 1.0 + params.theta * np.prod(np.cos(k * PI * u), axis=-1)


def nm_conditional_cdf(params: NormalModeParams, d: int, p):
    """CDF of ``U_d`` at ``u_d`` given ``U_{-d} = u_{-d}`` (``d`` is 1 or 2)."""
    _bivariate(params)
    u = _points(params, p)
    if d not in (1, 2):
        raise InvalidParameter("d must be 1 or 2")
    i, j = d - 1, 2 - d
    kd, ko = params.kappa[i], params.kappa[j]
    ud, uo = u[..., i], u[..., j]
    return ud + params.theta / (kd * PI) * np.cos(ko * PI * uo) * np.sin(kd * PI * ud)


def _solve_sine_cdf(amp, k: int, prob):
    """Solve ``x + amp sin(k pi x)/(k pi) = prob`` for x; ``|amp| <= 1``."""
    amp = np.broadcast_to(np.asarray(amp, dtype=float), np.shape(prob)).reshape(-1)
    kp = k * PI

    def F(x, idx):
        return x + amp[idx] * np.sin(kp * x) / kp

    def dF(x, idx):
        return 1.0 + amp[idx] * np.cos(kp * x)

    return invert_increasing(F, dF, prob)


def nm_conditional_quantile(params: NormalModeParams, d: int, u_given, prob):
    """Inverse of :func:`nm_conditional_cdf` in ``u_d``, Newton steps use the density."""
    _bivariate(params)
    if d not in (1, 2):
        raise InvalidParameter("d must be 1 or 2")
    u_given, prob = np.broadcast_arrays(np.asarray(u_given, float), np.asarray(prob, float))
    kd, ko = params.kappa[d - 1], params.kappa[2 - d]
    amp = params.theta * np.cos(ko * PI * u_given)
    x = _solve_sine_cdf(amp, kd, prob)
    return np.reshape(x, np.shape(prob)) if np.ndim(prob) else float(x)


def nm_sample(params: NormalModeParams, n: int, rng: np.random.Generator) -> np.ndarray:
    D = params.dim
    u = _open_uniform(rng, (n, D))
    k = np.asarray(params.kappa[:-1], dtype=float)
    amp = params.theta * np.prod(np.cos(k * PI * u[:, :-1]), axis=1)
    u[:, -1] = _solve_sine_cdf(amp, params.kappa[-1], u[:, -1])
    return u


def _open_uniform(rng: np.random.Generator, shape) -> np.ndarray:
    # rng.random() can return exactly 0.0; shift by half a grid step
    return rng.random(shape) + 2.0**-54


def nm_associated(params: NormalModeParams, which: str) -> NormalModeParams:
    """Parameters of the associated copula.

    ``flip1``: ``u2 - C(1 - u1, u2)``; ``flip2``: ``u1 - C(u1, 1 - u2)``;
    ``survival``: ``u1 + u2 - 1 + C(1 - u1, 1 - u2)``.  Each stays in the
    family with the same mode numbers and the amplitude kept or negated.
    """
    _bivariate(params)
    k1, k2 = params.kappa
    if which == "flip1":
        keep = k1 % 2 == 0
    elif which == "flip2":
        keep = k2 % 2 == 0
    elif which == "survival":
        keep = (k1 + k2) % 2 == 0
    else:
        raise InvalidParameter(f"unknown associated copula {which!r}")
    return NormalModeParams(params.theta if keep else -params.theta, params.kappa)


def nm_measures(params: NormalModeParams) -> MeasureSet:
    """Closed-form association measures.

    rho, tau and sigma follow from integrating the sine term; beta is
    ``4 C(1/2, 1/2) - 1`` evaluated directly.  Gini's gamma and the footrule
    only pick up the diagonal integral ``int sin(k1 pi u) sin(k2 pi u) du``,
    which is 1/2 when ``k1 == k2`` and 0 otherwise.
    """
    _bivariate(params)
    t = params.theta
    k1, k2 = params.kappa
    both_odd = k1 % 2 == 1 and k2 % 2 == 1
    sigma = 48.0 * abs(t) / (k1 * k2 * PI**4)
    rho = 48.0 * t / (k1**2 * k2**2 * PI**4) if both_odd else 0.0
    tau = 32.0 * t / (k1**2 * k2**2 * PI**4) if both_odd else 0.0
    beta = 4.0 * float(nm_cdf(params, (0.5, 0.5))) - 1.0
    if k1 == k2:
        footrule = 3.0 * t / (k1**2 * PI**2)
        gamma = 4.0 * t / (k1**2 * PI**2) if k1 % 2 == 1 else 0.0
    else:
        footrule = gamma = 0.0
    return MeasureSet(sigma, rho, tau, beta, gamma, footrule, Provenance.CLOSED_FORM)


def nm_is_symmetric(params: NormalModeParams) -> bool:
    """Family-level exchangeability rule: ``k1 == k2``.

    With ``theta = 0`` the copula is the product copula and is symmetric for
    any mode numbers; the predicate still reports the family rule.
    """
    _bivariate(params)
    return params.kappa[0] == params.kappa[1]


def nm_monotonicity_class(params: NormalModeParams) -> Monotonicity:
    _bivariate(params)
    if params.theta == 0.0:
        return Monotonicity.INDEPENDENT
    if params.kappa == (1, 1):
        return Monotonicity.POSITIVE if params.theta > 0 else Monotonicity.NEGATIVE
    return Monotonicity.NONMONOTONIC
