"""Rank-based pseudo-observations, the empirical copula, leave-one-out
pseudo-observations and quantile trimming."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.stats import rankdata

from .exceptions import (DimensionMismatch, EmptyAfterTrim, IndexOutOfRange, InvalidParameter,
                         NonFiniteInput)


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class RawSample:
    """An ``N x D`` matrix of finite observations with column names."""

    values: np.ndarray
    columns: tuple[str, ...] = field(default=())

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim != 2 or v.shape[1] < 2:
            raise DimensionMismatch(f"raw sample must be N x D with D >= 2, got shape {v.shape}")
        if v.shape[0] < 2:
            raise InvalidParameter("raw sample needs at least two rows")
        if not np.all(np.isfinite(v)):
            bad = np.argwhere(~np.isfinite(v))[0]
            raise NonFiniteInput(f"non-finite value at row {bad[0]}, column {bad[1]}")
        cols = tuple(self.columns) or tuple(f"x{d + 1}" for d in range(v.shape[1]))
        if len(cols) != v.shape[1]:
            raise DimensionMismatch("column names do not match the number of columns")
        object.__setattr__(self, "values", _frozen(v))
        object.__setattr__(self, "columns", cols)

    @property
    def n(self) -> int:
        return self.values.shape[0]


@dataclass(frozen=True)
class PseudoSample:
    """Pseudo-observations ``u`` (``N x D``, entries in (0, 1)).

    ``tie_counts[d]`` is the number of observations in column ``d`` that
    share their value with at least one other observation.
    """

    u: np.ndarray
    tie_counts: tuple[int, ...] = field(default=())

    def __post_init__(self):
        u = np.asarray(self.u, dtype=float)
        if u.ndim != 2 or u.shape[0] < 1:
            raise DimensionMismatch("pseudo-sample must be a non-empty N x D matrix")
        if np.any((u <= 0.0) | (u >= 1.0)) or not np.all(np.isfinite(u)):
            raise InvalidParameter("pseudo-observations must lie strictly inside (0, 1)")
        ties = tuple(self.tie_counts) or tuple(_tie_count(u[:, d]) for d in range(u.shape[1]))
        object.__setattr__(self, "u", _frozen(u))
        object.__setattr__(self, "tie_counts", tuple(int(t) for t in ties))

    @property
    def n(self) -> int:
        return self.u.shape[0]

    @property
    def dim(self) -> int:
        return self.u.shape[1]


def _tie_count(col: np.ndarray) -> int:
    _, counts = np.unique(col, return_counts=True)
    return int(counts[counts > 1].sum())


def pseudo_observations(raw) -> PseudoSample:
    """Average ranks divided by ``N + 1``, column by column."""
    if not isinstance(raw, RawSample):
        raw = RawSample(raw)
    x = raw.values
    n = x.shape[0]
    u = rankdata(x, method="average", axis=0) / (n + 1.0)
    return PseudoSample(u, tuple(_tie_count(x[:, d]) for d in range(x.shape[1])))


def empirical_copula(ps: PseudoSample, p):
    """Share of pseudo-observations componentwise ``<= p``.

    ``p`` may be a single point of length ``D`` or an ``(M, D)`` array.
    Bivariate queries go through the dominance-count kernel; higher
    dimensions fall back to broadcasting.
    """
    q = np.asarray(p, dtype=float)
    if q.shape[-1:] != (ps.dim,):
        raise DimensionMismatch(f"expected points of dimension {ps.dim}, got shape {q.shape}")
    flat = q.reshape(-1, ps.dim)
    if ps.dim == 2:
        from .kernels import ecop_counts
        counts = ecop_counts(ps.u[:, 0], ps.u[:, 1], flat[:, 0], flat[:, 1])
    else:
        counts = np.array([np.count_nonzero(np.all(ps.u <= row, axis=1)) for row in flat])
    out = np.asarray(counts, dtype=float).reshape(q.shape[:-1]) / ps.n
    return float(out) if out.ndim == 0 else out


def loo_pseudo_all(ps: PseudoSample) -> np.ndarray:
    """Leave-one-out pseudo-observations for every row (``N x D``).

    Row ``i`` holds ``#{j != i : u_j <= u_i} / N`` per column, or ``1/N``
    when ``u_i`` lies below every other value of the column.
    """
    n = ps.n
    out = np.empty_like(ps.u)
    for d in range(ps.dim):
        col = ps.u[:, d]
        srt = np.sort(col)
        # the count of values <= u_i includes u_i itself
        others = np.searchsorted(srt, col, side="right") - 1
        out[:, d] = np.where(others == 0, 1.0, others) / n
    return out


def loo_pseudo(ps: PseudoSample, i: int) -> np.ndarray:
    """Leave-one-out pseudo-observation of row ``i`` (0-based)."""
    if not 0 <= int(i) < ps.n:
        raise IndexOutOfRange(f"row index {i} out of range for N={ps.n}")
    return loo_pseudo_all(ps)[int(i)]


def quantile_trim(raw: RawSample, lo: float = 0.01, hi: float = 0.99) -> RawSample:
    """Drop rows with any value strictly outside its column's [lo, hi] quantiles.

    Quantiles use linear interpolation between order statistics
    (``numpy.quantile`` with ``method="linear"``).
    """
    if not 0.0 <= lo < hi <= 1.0:
        raise InvalidParameter(f"need 0 <= lo < hi <= 1, got lo={lo}, hi={hi}")
    x = raw.values
    qlo = np.quantile(x, lo, axis=0, method="linear")
    qhi = np.quantile(x, hi, axis=0, method="linear")
    keep = np.all((x >= qlo) & (x <= qhi), axis=1)
    if keep.sum() < 2:
        raise EmptyAfterTrim(f"only {int(keep.sum())} rows left after trimming to [{lo}, {hi}]")
    return RawSample(x[keep], raw.columns)
