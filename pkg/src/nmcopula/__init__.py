"""Normal mode copulas, classical comparison families and the rank-based
estimation pipeline."""

__version__ = "0.1.0"

from .core import (AxiomReport, ConcordanceResult, CopulaModel, Family, Verdict, cdf,
                   check_copula_axioms, concordance_compare, conditional_cdf,
                   conditional_quantile, copula_volume, density, make_rng, sample)
from .empirical import (PseudoSample, RawSample, empirical_copula, loo_pseudo,
                        pseudo_observations, quantile_trim)
from .exceptions import (ConvergenceFailure, CopulaError, DimensionMismatch, DomainError,
                         EmptyAfterTrim, IndexOutOfRange, InvalidParameter, NoDensity,
                         NonFiniteInput, NonFiniteLikelihood, ParseError)
from .inference import (CicResult, FamilySpec, FitReport, MpleFit, aic, cic, compare_models,
                        cvm_criterion, evaluate, fit_mple, rank_reports, standard_specs)
from .measures import MeasureSet, Provenance
from .normal_mode import (Monotonicity, NormalModeParams, nm_associated, nm_cdf,
                          nm_conditional_cdf, nm_conditional_quantile, nm_density,
                          nm_is_symmetric, nm_measures, nm_monotonicity_class, nm_sample)
from .oracle import (QuadSpec, closed_form_measures, measures_mc, measures_numeric, omega,
                     quadrant_dependence_map, tail_dependence_profile)
