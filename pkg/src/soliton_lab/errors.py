"""Exception hierarchy shared by every module."""

from __future__ import annotations


class SolitonLabError(Exception):
    """Base class for all errors raised by soliton_lab."""


class DomainError(SolitonLabError, ValueError):
    """A point or radius lies outside the admissible domain of an expression."""


class DimensionMismatchError(SolitonLabError, ValueError):
    pass


class JetDivisionByZero(SolitonLabError, ZeroDivisionError):
    """Division of a jet by a jet with zero value."""


class EvaluationError(SolitonLabError, ArithmeticError):
    """Overflow or a non-finite result during evaluation."""


class ConformalFactorZeroError(SolitonLabError, ZeroDivisionError):
    """The conformal factor psi vanishes at the requested point."""


class SingularLocusError(DomainError):
    """The point lies on (or beyond) the singular set of a metric family."""


class SingularDenominatorError(SolitonLabError, ZeroDivisionError):
    """A closed-form expression has a vanishing denominator at ``r``."""

    def __init__(self, message: str, r: float | None = None):
        super().__init__(message)
        self.r = r


class BlowUpError(SolitonLabError, ArithmeticError):
    """The ODE solution escapes to infinity inside the integration interval."""


class SingularMetricError(SolitonLabError, ArithmeticError):
    pass


class StencilError(DomainError):
    """A finite-difference stencil leaves the admissible region."""


class CertificationError(SolitonLabError, ValueError):
    """Certification was requested against a reference not known to be complete."""


class ConfigError(SolitonLabError, ValueError):
    pass
