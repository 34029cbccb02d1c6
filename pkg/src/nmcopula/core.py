"""Family-agnostic copula interface.

A :class:`CopulaModel` is an immutable description (family, amplitude,
mode numbers, dimension).  The module-level functions dispatch on the
family and take care of the parts that are common to all of them: boundary
evaluation of the CDF, the conditional-inversion sampler, rectangle volumes
and grid-based checks.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from itertools import product as _iproduct

import numpy as np

from . import classical as _cl
from . import normal_mode as _nm
from ._numerics import invert_increasing
from .exceptions import DimensionMismatch, DomainError, InvalidParameter, NoDensity
from .normal_dist import inv_norm_cdf, norm_cdf

CLAMP_SLACK = 1e-14
AXIOM_TOL = 1e-12
ORDER_TOL = 1e-12


class Family(str, Enum):
    NORMAL_MODE = "normal_mode"
    PRODUCT = "product"
    FRECHET_LOWER = "frechet_lower"
    FRECHET_UPPER = "frechet_upper"
    AMH = "amh"
    CLAYTON = "clayton"
    FRANK = "frank"
    FGM = "fgm"
    GAUSSIAN = "gaussian"

    @classmethod
    def parse(cls, name) -> "Family":
        if isinstance(name, Family):
            return name
        key = str(name).strip().lower().replace("-", "_")
        aliases = {"nm": "normal_mode", "normalmode": "normal_mode", "independence": "product",
                   "lower": "frechet_lower", "upper": "frechet_upper", "normal": "gaussian"}
        try:
            return cls(aliases.get(key, key))
        except ValueError:
            raise InvalidParameter(f"unknown copula family {name!r}") from None


_PARAMETERLESS = {Family.PRODUCT, Family.FRECHET_LOWER, Family.FRECHET_UPPER}
_BIVARIATE_ONLY = {Family.FRECHET_LOWER, Family.AMH, Family.CLAYTON, Family.FRANK,
                   Family.FGM, Family.GAUSSIAN}
CLASSICAL_FAMILIES = (Family.AMH, Family.CLAYTON, Family.FRANK, Family.FGM, Family.GAUSSIAN)


@dataclass(frozen=True)
class CopulaModel:
    """An immutable copula specification.

    Parameters
    ----------
    family : Family or str
    theta : float, optional
        Scalar dependence parameter; ignored (must be None) for the
        product copula and the Frechet bounds.
    kappa : tuple of int, optional
        Mode numbers; required for the normal mode family, where the
        dimension is ``len(kappa)``.
    dim : int
        Dimension for the parameterless families (default 2).

    Notes
    -----
    Frank with ``theta == 0`` is stored as the product copula.
    """

    family: Family
    theta: float | None = None
    kappa: tuple[int, ...] | None = None
    dim: int = 2

    def __post_init__(self):
        fam = Family.parse(self.family)
        theta, kappa, dim = self.theta, self.kappa, int(self.dim)
        if fam is Family.NORMAL_MODE:
            if theta is None or kappa is None:
                raise InvalidParameter("normal mode copula needs theta and kappa")
            params = _nm.NormalModeParams(theta, tuple(kappa))
            theta, kappa, dim = params.theta, params.kappa, params.dim
        elif fam in _PARAMETERLESS:
            if theta is not None:
                raise InvalidParameter(f"{fam.value} takes no parameter")
            kappa = None
        else:
            if theta is None:
                raise InvalidParameter(f"{fam.value} needs theta")
            theta = _cl.validate_theta(fam.value, theta)
            kappa = None
            if fam is Family.FRANK and theta == 0.0:
                fam, theta = Family.PRODUCT, None
        if dim < 2:
            raise DimensionMismatch("copulas need dimension >= 2")
        if fam in _BIVARIATE_ONLY and dim != 2:
            raise DimensionMismatch(f"{fam.value} is bivariate only")
        object.__setattr__(self, "family", fam)
        object.__setattr__(self, "theta", theta)
        object.__setattr__(self, "kappa", kappa)
        object.__setattr__(self, "dim", dim)

    @classmethod
    def normal_mode(cls, theta: float, kappa) -> "CopulaModel":
        return cls(Family.NORMAL_MODE, theta, tuple(kappa))

    @property
    def nm_params(self) -> _nm.NormalModeParams:
        if self.family is not Family.NORMAL_MODE:
            raise InvalidParameter("not a normal mode model")
        return _nm.NormalModeParams(self.theta, self.kappa)

    @property
    def has_density(self) -> bool:
        if self.family in (Family.FRECHET_LOWER, Family.FRECHET_UPPER):
            return False
        return not (self.family is Family.GAUSSIAN and abs(self.theta) == 1.0)

    def label(self) -> str:
        if self.family is Family.NORMAL_MODE:
            return f"normal_mode{self.kappa}(theta={self.theta:g})"
        if self.theta is None:
            return self.family.value
        return f"{self.family.value}(theta={self.theta:g})"


def _as_points(model: CopulaModel, p) -> np.ndarray:
    u = np.asarray(p, dtype=float)
    if u.ndim == 0 or u.shape[-1] != model.dim:
        raise DimensionMismatch(f"{model.label()} expects points of dimension {model.dim}, "
                                f"got shape {u.shape}")
    return u


def _scalar_or_array(x):
    x = np.asarray(x, dtype=float)
    return float(x) if x.ndim == 0 else x


# ----------------------------------------------------------------------------
# CDF and density

def _interior_cdf(model: CopulaModel, u: np.ndarray) -> np.ndarray:
    fam = model.family
    if fam is Family.NORMAL_MODE:
        return _nm.nm_cdf(model.nm_params, u)
    if fam is Family.PRODUCT:
        return np.prod(u, axis=-1)
    if fam is Family.FRECHET_UPPER:
        return np.min(u, axis=-1)
    if fam is Family.FRECHET_LOWER:
        return np.maximum(u[..., 0] + u[..., 1] - 1.0, 0.0)
    return _cl.classical_cdf(fam.value, model.theta, u[..., 0], u[..., 1])


def cdf(model: CopulaModel, p):
    """Copula CDF at ``p`` (last axis of length ``model.dim``).

    Coordinates equal to 0 give 0; coordinates equal to 1 are marginalised
    out before any family formula is evaluated.  The result is clamped to
    ``[0, 1]``.
    """
    u = _as_points(model, p)
    if np.any((u < 0.0) | (u > 1.0)) or not np.all(np.isfinite(u)):
        raise InvalidParameter("copula arguments must lie in [0, 1]")
    flat = u.reshape(-1, model.dim)
    out = np.empty(flat.shape[0])
    zero = np.any(flat == 0.0, axis=1)
    ones = flat == 1.0
    n_ones = ones.sum(axis=1)
    out[zero] = 0.0

    interior = ~zero & (n_ones == 0)
    if interior.any():
        out[interior] = _interior_cdf(model, flat[interior])

    edge = ~zero & (n_ones > 0)
    if edge.any():
        sub = flat[edge]
        sub_ones = ones[edge]
        res = np.empty(sub.shape[0])
        free = model.dim - sub_ones.sum(axis=1)
        res[free == 0] = 1.0
        one_free = free == 1
        # all but one argument at 1: the uniform margin
        res[one_free] = np.where(sub_ones[one_free], 1.0, sub[one_free]).min(axis=1)
        many = free >= 2
        if many.any():
            # only NM and product reach here (D >= 3); their lower-dimensional
            # margins are the same family with the unit axes removed
            for i in np.flatnonzero(many):
                keep = ~sub_ones[i]
                res[i] = _interior_cdf(_margin(model, keep), sub[i][keep][None, :])[0]
        out[edge] = res
    out = np.clip(out, 0.0, 1.0)
    return _scalar_or_array(out.reshape(u.shape[:-1]))


def _margin(model: CopulaModel, keep: np.ndarray) -> CopulaModel:
    k = int(keep.sum())
    if model.family is Family.NORMAL_MODE:
        # sin(k pi) = 0, so the trig term vanishes for any proper margin
        return CopulaModel(Family.PRODUCT, dim=k)
    if model.family is Family.FRECHET_UPPER:
        return CopulaModel(Family.FRECHET_UPPER, dim=k)
    return CopulaModel(Family.PRODUCT, dim=k)


def density(model: CopulaModel, p):
    """Copula density at interior points.

    Raises
    ------
    NoDensity
        Frechet bounds and the Gaussian copula with ``|theta| = 1``.
    """
    u = _as_points(model, p)
    fam = model.family
    if not model.has_density:
        raise NoDensity(f"{model.label()} has no density")
    if fam is Family.NORMAL_MODE:
        out = _nm.nm_density(model.nm_params, u)
    elif fam is Family.PRODUCT:
        out = np.ones(u.shape[:-1])
    else:
        out = _cl.classical_density(fam.value, model.theta, u[..., 0], u[..., 1])
    return _scalar_or_array(out)


# ----------------------------------------------------------------------------
# Conditionals

def _check_index(model: CopulaModel, d: int) -> None:
    if model.dim != 2:
        raise DimensionMismatch("conditional distributions are provided for bivariate models")
    if d not in (1, 2):
        raise InvalidParameter("d must be 1 or 2")


_TINY = 1e-300


def conditional_cdf(model: CopulaModel, d: int, p):
    """CDF of ``U_d`` at ``u_d`` given ``U_{-d} = u_{-d}``, i.e. ``dC/du_{-d}``."""
    _check_index(model, d)
    if not model.has_density:
        raise NoDensity(f"{model.label()} has no conditional density")
    u = _as_points(model, p)
    ud = u[..., d - 1]
    uo = np.clip(u[..., 2 - d], _TINY, 1.0 - 2.0**-53)
    fam = model.family
    inner = np.clip(ud, _TINY, 1.0 - 2.0**-53)
    if fam is Family.NORMAL_MODE:
        pt = np.stack([inner, uo], axis=-1) if d == 1 else np.stack([uo, inner], axis=-1)
        out = _nm.nm_conditional_cdf(model.nm_params, d, pt)
    elif fam is Family.PRODUCT:
        out = np.array(inner, dtype=float)
    else:
        # every classical family is exchangeable: dC/du1 with roles swapped
        out = _cl.classical_h(fam.value, model.theta, uo, inner)
    out = np.where(ud <= 0.0, 0.0, np.where(ud >= 1.0, 1.0, out))
    return _scalar_or_array(np.clip(out, 0.0, 1.0))


def _conditional_density(model: CopulaModel, d: int, u_given, x):
    pt = np.stack([x, u_given], axis=-1) if d == 1 else np.stack([u_given, x], axis=-1)
    return density(model, pt)


def generic_conditional_quantile(model: CopulaModel, d: int, u_given, prob):
    """Bracketed Newton inversion of :func:`conditional_cdf` using the density."""
    _check_index(model, d)
    u_given, prob = np.broadcast_arrays(np.asarray(u_given, float), np.asarray(prob, float))
    g = u_given.reshape(-1)

    def F(x, idx):
        pt = np.stack([x, g[idx]], axis=-1) if d == 1 else np.stack([g[idx], x], axis=-1)
        return conditional_cdf(model, d, pt)

    def dF(x, idx):
        return _conditional_density(model, d, g[idx], x)

    x = invert_increasing(F, dF, prob.reshape(-1))
    return _scalar_or_array(np.reshape(x, prob.shape))


def conditional_quantile(model: CopulaModel, d: int, u_given, prob):
    """Inverse of :func:`conditional_cdf` in ``u_d``.

    Raises
    ------
    ConvergenceFailure
        The iteration cap was hit; with a correct density this does not happen.
    """
    _check_index(model, d)
    if not model.has_density:
        raise NoDensity(f"{model.label()} has no conditional density")
    prob_arr = np.asarray(prob, dtype=float)
    if np.any((prob_arr <= 0.0) | (prob_arr >= 1.0)):
        raise InvalidParameter("prob must lie in (0, 1)")
    fam = model.family
    if fam is Family.PRODUCT:
        return _scalar_or_array(np.broadcast_arrays(prob_arr, np.asarray(u_given, float))[0])
    if fam is Family.NORMAL_MODE:
        return _nm.nm_conditional_quantile(model.nm_params, d, u_given, prob)
    if fam is Family.GAUSSIAN:
        # closed form; the generic inverse is kept for the other families
        r = model.theta
        z = r * inv_norm_cdf(u_given) + np.sqrt(1.0 - r * r) * inv_norm_cdf(prob_arr)
        return _scalar_or_array(np.clip(norm_cdf(z), 1e-15, 1.0 - 1e-15))
    return generic_conditional_quantile(model, d, u_given, prob)


# ----------------------------------------------------------------------------
# Sampling

def make_rng(seed: int) -> np.random.Generator:
    """Counter-based 64-bit generator (Philox) seeded deterministically."""
    return np.random.Generator(np.random.Philox(int(seed)))


def sample(model: CopulaModel, n: int, seed: int) -> np.ndarray:
    """Draw ``n`` points by conditional inversion; returns an ``(n, D)`` array."""
    n = int(n)
    if n < 1:
        raise InvalidParameter("n must be >= 1")
    if not model.has_density:
        raise NoDensity(f"cannot sample {model.label()} by conditional inversion")
    rng = make_rng(seed)
    if model.family is Family.NORMAL_MODE:
        return _nm.nm_sample(model.nm_params, n, rng)
    u = rng.random((n, model.dim)) + 2.0**-54
    if model.family is Family.PRODUCT:
        return u
    u[:, 1] = conditional_quantile(model, 2, u[:, 0], u[:, 1])
    return u


# ----------------------------------------------------------------------------
# Axiom and order checks

def copula_volume(model: CopulaModel, lower, upper):
    """D-increasing volume ``V_C([lower, upper])``; vectorised over leading axes."""
    lo = _as_points(model, lower)
    hi = _as_points(model, upper)
    if np.any(lo > hi):
        raise InvalidParameter("rectangle lower corner must be <= upper corner")
    lo, hi = np.broadcast_arrays(lo, hi)
    total = np.zeros(lo.shape[:-1])
    for corner in _iproduct((0, 1), repeat=model.dim):
        mask = np.array(corner, dtype=bool)
        vertex = np.where(mask, hi, lo)
        sign = -1.0 if (model.dim - mask.sum()) % 2 else 1.0
        total = total + sign * np.asarray(cdf(model, vertex))
    return _scalar_or_array(total)


def _formula_at(model: CopulaModel, pts: np.ndarray) -> np.ndarray:
    """The family formula evaluated without the boundary path.

    Points where the formula is undefined at the edge (the Gaussian
    quantile transform, logs of zero) come back non-finite and are skipped
    by the caller.
    """
    with np.errstate(all="ignore"):
        try:
            return np.asarray(_interior_cdf(model, pts), dtype=float)
        except DomainError:
            return np.full(pts.shape[:-1], np.nan)


@dataclass(frozen=True)
class AxiomReport:
    max_boundary_error: float
    min_volume: float
    n_rectangles: int

    @property
    def passed(self) -> bool:
        return self.max_boundary_error <= AXIOM_TOL and self.min_volume >= -AXIOM_TOL


def check_copula_axioms(model: CopulaModel, n_rectangles: int = 10_000, seed: int = 0,
                        n_edge: int = 1000) -> AxiomReport:
    """Boundary conditions on an edge grid and volumes of random rectangles."""
    D = model.dim
    t = np.linspace(0.0, 1.0, n_edge)
    err = 0.0
    for d in range(D):
        pts = np.ones((n_edge, D))
        pts[:, d] = t
        # a zero coordinate with the others on the diagonal
        zero = np.tile(t[:, None], (1, D))
        zero[:, d] = 0.0
        for values, expected in ((cdf(model, pts), t), (_formula_at(model, pts), t),
                                 (cdf(model, zero), 0.0), (_formula_at(model, zero), 0.0)):
            dev = np.abs(np.asarray(values) - expected)
            err = max(err, float(np.max(dev[np.isfinite(dev)], initial=0.0)))
    rng = make_rng(seed)
    a = rng.random((n_rectangles, D))
    b = rng.random((n_rectangles, D))
    vol = copula_volume(model, np.minimum(a, b), np.maximum(a, b))
    return AxiomReport(err, float(np.min(vol)), int(n_rectangles))


class Verdict(str, Enum):
    A_BELOW_B = "A_below_B"
    B_BELOW_A = "B_below_A"
    EQUAL = "equal"
    INCOMPARABLE = "incomparable"


@dataclass(frozen=True)
class ConcordanceResult:
    """Outcome of a grid concordance comparison.

    ``max_violation`` is the largest amount by which the grid contradicts
    the reported verdict (0 up to tolerance for a clean order); for
    ``incomparable`` it is the smaller of the two one-sided excursions.
    """

    verdict: Verdict
    max_violation: float
    max_a_over_b: float
    max_b_over_a: float


def interior_lattice(n: int) -> np.ndarray:
    """The ``n x n`` lattice ``(i/(n+1), j/(n+1))`` as an ``(n, n, 2)`` array."""
    g = np.arange(1, n + 1) / (n + 1.0)
    return np.stack(np.meshgrid(g, g, indexing="ij"), axis=-1)


def concordance_compare(a: CopulaModel, b: CopulaModel, grid_n: int = 20) -> ConcordanceResult:
    if a.dim != 2 or b.dim != 2:
        raise DimensionMismatch("concordance comparison is bivariate")
    grid = interior_lattice(grid_n)
    diff = np.asarray(cdf(b, grid)) - np.asarray(cdf(a, grid))
    a_over = float(max(0.0, -diff.min()))
    b_over = float(max(0.0, diff.max()))
    if a_over <= ORDER_TOL and b_over <= ORDER_TOL:
        verdict, viol = Verdict.EQUAL, max(a_over, b_over)
    elif a_over <= ORDER_TOL:
        verdict, viol = Verdict.A_BELOW_B, a_over
    elif b_over <= ORDER_TOL:
        verdict, viol = Verdict.B_BELOW_A, b_over
    else:
        verdict, viol = Verdict.INCOMPARABLE, min(a_over, b_over)
    return ConcordanceResult(verdict, viol, a_over, b_over)
