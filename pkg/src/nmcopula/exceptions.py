"""Exception hierarchy shared by every module of the package."""


class CopulaError(Exception):
    """Base class for all errors raised by :mod:`nmcopula`."""


class InvalidParameter(CopulaError, ValueError):
    """A copula parameter lies outside its family's domain."""


class DimensionMismatch(CopulaError, ValueError):
    """Point dimension does not match the model dimension."""


class DomainError(CopulaError, ValueError):
    """An argument lies outside the open unit interval where it must."""


class NoDensity(CopulaError):
    """The copula is singular (no density / no conditional distribution)."""


class ConvergenceFailure(CopulaError, RuntimeError):
    """An iterative solver exhausted its iteration budget."""


class NonFiniteInput(CopulaError, ValueError):
    """Raw data contains NaN or infinite entries."""


class EmptyAfterTrim(CopulaError, ValueError):
    """Quantile trimming removed every row."""


class NonFiniteLikelihood(CopulaError, ArithmeticError):
    """The pseudo log-likelihood could not be evaluated to a finite value."""


class ParseError(CopulaError, ValueError):
    """A CSV or scenario file could not be parsed."""


class IndexOutOfRange(CopulaError, IndexError):
    """A row or coordinate index lies outside the valid range."""
