"""Container for the six scalar measures of association."""

from __future__ import annotations

from dataclasses import asdict, dataclass, field
from enum import Enum


class Provenance(str, Enum):
    CLOSED_FORM = "closed_form"
    QUADRATURE = "quadrature"
    MONTE_CARLO = "monte_carlo"


MEASURE_NAMES = ("sigma", "rho", "tau", "beta", "gamma", "footrule")


@dataclass(frozen=True)
class MeasureSet:
    """Schweizer-Wolff sigma, Spearman rho, Kendall tau, Blomqvist beta,
    Gini gamma and Spearman's footrule, tagged with how they were obtained.

    ``stderr`` is only filled for Monte Carlo estimates.
    """

    sigma: float
    rho: float
    tau: float
    beta: float
    gamma: float
    footrule: float
    provenance: Provenance
    stderr: dict[str, float] | None = field(default=None, compare=False)

    def as_dict(self) -> dict:
        out = asdict(self)
        out["provenance"] = self.provenance.value
        if self.stderr is None:
            del out["stderr"]
        return out

    def values(self) -> tuple[float, ...]:
        return tuple(getattr(self, name) for name in MEASURE_NAMES)

    def max_abs_diff(self, other: "MeasureSet") -> float:
        return max(abs(a - b) for a, b in zip(self.values(), other.values()))
