"""Comparison families: Ali-Mikhail-Haq, Clayton and Frank (Archimedean),
Farlie-Gumbel-Morgenstern and Gaussian.

Archimedean densities are computed from the generator derivatives,

    c(u1, u2) = -phi''(C) phi'(u1) phi'(u2) / phi'(C)**3,

evaluated in log space so that steep generators (large Clayton theta) do not
overflow.  CDFs and conditional CDFs use the closed forms obtained from the
generators.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .exceptions import InvalidParameter, NoDensity
from .normal_dist import bvn_cdf, inv_norm_cdf, norm_cdf

ARCHIMEDEAN = ("amh", "clayton", "frank")
CLASSICAL = ("amh", "clayton", "frank", "fgm", "gaussian")


def validate_theta(family: str, theta: float) -> float:
    theta = float(theta)
    if not np.isfinite(theta):
        raise InvalidParameter(f"{family}: theta must be finite")
    if family in ("amh", "fgm", "gaussian"):
        if not -1.0 <= theta <= 1.0:
            raise InvalidParameter(f"{family}: theta must lie in [-1, 1], got {theta}")
    elif family == "clayton":
        if not theta > 0.0:
            raise InvalidParameter(f"clayton: theta must be > 0, got {theta}")
    elif family == "frank":
        pass
    else:
        raise InvalidParameter(f"unknown classical family {family!r}")
    return theta


def log1mexp(x):
    """``log(1 - exp(-x))`` for ``x > 0`` without cancellation at either end."""
    x = np.asarray(x, dtype=float)
    with np.errstate(divide="ignore"):
        return np.where(x < np.log(2.0), np.log(-np.expm1(-x)), np.log1p(-np.exp(-x)))


@dataclass(frozen=True)
class GeneratorSpec:
    """Archimedean generator ``phi`` with its derivatives and inverse.

    ``log_neg_dphi`` is ``log(-phi'(u))`` and ``log_d2phi`` is
    ``log(phi''(u))``; both are what the density formula needs.
    """

    family: str
    theta: float
    phi: Callable
    dphi: Callable
    d2phi: Callable
    phi_inv: Callable
    log_neg_dphi: Callable
    log_d2phi: Callable

    def compose(self, u1, u2):
        """``phi^[-1](phi(u1) + phi(u2))`` with the pseudo-inverse cut at ``phi(0)``."""
        return self.phi_inv(self.phi(u1) + self.phi(u2))


def generator(family: str, theta: float) -> GeneratorSpec:
    theta = validate_theta(family, theta)
    t = theta
    if family == "clayton":
        return GeneratorSpec(
            family, t,
            phi=lambda u: np.expm1(-t * np.log(u)) / t,
            dphi=lambda u: -np.power(u, -t - 1.0),
            d2phi=lambda u: (t + 1.0) * np.power(u, -t - 2.0),
            phi_inv=lambda z: np.exp(-np.log1p(t * np.asarray(z)) / t),
            log_neg_dphi=lambda u: (-t - 1.0) * np.log(u),
            log_d2phi=lambda u: np.log(t + 1.0) + (-t - 2.0) * np.log(u),
        )
    if family == "amh":
        if t == 1.0:
            # log((1 - t(1-u))/u) vanishes identically at t = 1; the
            # rescaled limit phi/(1-t) -> 1/u - 1 generates the same copula.
            return GeneratorSpec(
                family, t,
                phi=lambda u: 1.0 / u - 1.0,
                dphi=lambda u: -1.0 / (u * u),
                d2phi=lambda u: 2.0 / u**3,
                phi_inv=lambda z: 1.0 / (1.0 + np.asarray(z)),
                log_neg_dphi=lambda u: -2.0 * np.log(u),
                log_d2phi=lambda u: np.log(2.0) - 3.0 * np.log(u),
            )

        def amh_dphi(u):
            return t / (1.0 - t * (1.0 - u)) - 1.0 / u

        def amh_d2phi(u):
            return 1.0 / (u * u) - t * t / (1.0 - t * (1.0 - u)) ** 2

        return GeneratorSpec(
            family, t,
            phi=lambda u: np.log1p(-t * (1.0 - u)) - np.log(u),
            dphi=amh_dphi,
            d2phi=amh_d2phi,
            phi_inv=lambda z: (1.0 - t) / (np.exp(np.asarray(z)) - t),
            # -phi'(u) = (1 - t) / (u (1 - t(1-u)))
            log_neg_dphi=lambda u: np.log1p(-t) - np.log(u) - np.log1p(-t * (1.0 - u)),
            # phi''(u) = (1-t)(1 - t + 2tu) / (u^2 (1 - t(1-u))^2)
            log_d2phi=lambda u: (np.log1p(-t) + np.log(1.0 - t + 2.0 * t * u)
                                 - 2.0 * np.log(u) - 2.0 * np.log1p(-t * (1.0 - u))),
        )
    if family == "frank":
        if t == 0.0:
            raise InvalidParameter("frank: theta = 0 is the product copula (no generator)")
        a = abs(t)

        def frank_phi(u):
            # -log[(exp(-t u) - 1) / (exp(-t) - 1)]
            u = np.asarray(u)
            if t > 0:
                return log1mexp(t) - log1mexp(t * u)
            return a - a * u + log1mexp(a) - log1mexp(a * u)

        def frank_inv(z):
            z = np.asarray(z)
            if t < 0:
                return -np.log1p(np.exp(-z) * np.expm1(-t)) / t
            # 1 + e^{-z}(e^{-t} - 1) = (1 - e^{-z}) + e^{-z-t}, both terms >= 0
            return -np.log(-np.expm1(-z) + np.exp(-z - t)) / t

        def log_neg_dphi(u):
            # -phi'(u) = |t| / |1 - exp(t u)|
            return np.log(a) - np.log(np.abs(np.expm1(t * u)))

        def log_d2phi(u):
            # phi''(u) = t^2 exp(-t u) / (exp(-t u) - 1)^2
            return 2.0 * np.log(a) - t * u - 2.0 * np.log(np.abs(np.expm1(-t * u)))

        return GeneratorSpec(
            family, t,
            phi=frank_phi,
            dphi=lambda u: t * np.exp(-t * u) / np.expm1(-t * u),
            d2phi=lambda u: t * t * np.exp(-t * u) / np.expm1(-t * u) ** 2,
            phi_inv=frank_inv,
            log_neg_dphi=log_neg_dphi,
            log_d2phi=log_d2phi,
        )
    raise InvalidParameter(f"{family} is not Archimedean")


# ----------------------------------------------------------------------------
# CDFs

def _clayton_log_s(t, u1, u2):
    """log(u1^-t + u2^-t - 1), stable for both small and large exponents."""
    a = -t * np.log(u1)
    b = -t * np.log(u2)
    m = np.maximum(a, b)
    small = m < 1.0
    ms = np.where(small, 0.0, m)
    big = ms + np.log(np.exp(a - ms) + np.exp(b - ms) - np.exp(-ms))
    # near independence the sum is 1 + tiny, which log1p keeps exact
    tiny = np.log1p(np.expm1(np.minimum(a, 1.0)) + np.expm1(np.minimum(b, 1.0)))
    return np.where(small, tiny, big)


def _frank_d(t, u1, u2):
    """(1 - e^{-t}) - (1 - e^{-t u1})(1 - e^{-t u2}) as a sum of positive terms (t > 0)."""
    return (np.exp(-t * u1) * -np.expm1(-t * u2)
            + np.exp(-t * u2) * -np.expm1(-t * (1.0 - u2)))


def _frank_cdf(t, u1, u2):
    if t < 0:
        a = -t
        log_r = (a * (u1 + u2 - 1.0) + np.log(-np.expm1(-a * u1))
                 + np.log(-np.expm1(-a * u2)) - np.log(-np.expm1(-a)))
        return np.logaddexp(0.0, log_r) / a
    if t <= 1.0:
        r = np.expm1(-t * u1) * (np.expm1(-t * u2) / np.expm1(-t))
        return -np.log1p(r) / t
    return -(np.log(_frank_d(t, u1, u2)) - np.log(-np.expm1(-t))) / t


def classical_cdf(family: str, theta: float, u1, u2):
    """Closed-form CDF of a comparison family at interior points."""
    t = validate_theta(family, theta)
    u1 = np.asarray(u1, dtype=float)
    u2 = np.asarray(u2, dtype=float)
    with np.errstate(over="ignore", under="ignore", divide="ignore"):
        if family == "amh":
            out = u1 * u2 / (1.0 - t * (1.0 - u1) * (1.0 - u2))
        elif family == "clayton":
            out = np.exp(-_clayton_log_s(t, u1, u2) / t)
        elif family == "frank":
            out = u1 * u2 if t == 0.0 else _frank_cdf(t, u1, u2)
        elif family == "fgm":
            out = u1 * u2 * (1.0 + t * (1.0 - u1) * (1.0 - u2))
        else:
            if t == 0.0:
                out = u1 * u2
            else:
                out = bvn_cdf(inv_norm_cdf(u1), inv_norm_cdf(u2), t)
    return out


# ----------------------------------------------------------------------------
# Densities

def archimedean_log_density(gen: GeneratorSpec, u1, u2):
    c = gen.compose(u1, u2)
    return (gen.log_d2phi(c) + gen.log_neg_dphi(u1) + gen.log_neg_dphi(u2)
            - 3.0 * gen.log_neg_dphi(c))


def classical_density(family: str, theta: float, u1, u2):
    """Copula density at interior points.

    Raises
    ------
    NoDensity
        Gaussian with ``|theta| = 1``.
    """
    t = validate_theta(family, theta)
    u1 = np.asarray(u1, dtype=float)
    u2 = np.asarray(u2, dtype=float)
    if family == "fgm":
        return 1.0 + t * (1.0 - 2.0 * u1) * (1.0 - 2.0 * u2)
    if family == "gaussian":
        if abs(t) == 1.0:
            raise NoDensity("Gaussian copula with |theta| = 1 is singular")
        z1 = inv_norm_cdf(u1)
        z2 = inv_norm_cdf(u2)
        q = 1.0 - t * t
        return np.exp(-0.5 * np.log(q) - (t * t * (z1 * z1 + z2 * z2) - 2.0 * t * z1 * z2) / (2.0 * q))
    if family == "frank" and t == 0.0:
        return np.ones(np.broadcast(u1, u2).shape)
    with np.errstate(over="ignore", under="ignore"):
        return np.exp(archimedean_log_density(generator(family, t), u1, u2))


# ----------------------------------------------------------------------------
# Conditional distribution  dC/du1  (law of U2 given U1 = u1)

def classical_h(family: str, theta: float, u1, u2):
    """``dC(u1, u2)/du1``: the CDF of ``U2`` at ``u2`` given ``U1 = u1``.

    All five families are exchangeable, so the conditional of ``U1`` given
    ``U2`` is obtained by swapping the arguments.
    """
    t = validate_theta(family, theta)
    u1 = np.asarray(u1, dtype=float)
    u2 = np.asarray(u2, dtype=float)
    with np.errstate(over="ignore", under="ignore", divide="ignore", invalid="ignore"):
        if family == "amh":
            d = 1.0 - t * (1.0 - u1) * (1.0 - u2)
            return u2 * (1.0 - t * (1.0 - u2)) / (d * d)
        if family == "clayton":
            return np.exp((-t - 1.0) * np.log(u1) - (1.0 / t + 1.0) * _clayton_log_s(t, u1, u2))
        if family == "frank":
            if t == 0.0:
                return u2 * np.ones_like(u1)
            if t < 0:
                t = -t
                u1 = 1.0 - u1
            first = np.exp(-t * u1) * -np.expm1(-t * u2)
            return first / (first + np.exp(-t * u2) * -np.expm1(-t * (1.0 - u2)))
        if family == "fgm":
            return u2 * (1.0 + t * (1.0 - 2.0 * u1) * (1.0 - u2))
        if abs(t) == 1.0:
            raise NoDensity("Gaussian copula with |theta| = 1 has no conditional density")
        z1 = inv_norm_cdf(u1)
        z2 = inv_norm_cdf(u2)
        return norm_cdf((z2 - t * z1) / np.sqrt(1.0 - t * t))
