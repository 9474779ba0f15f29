"""Exception hierarchy shared by every steerkit module."""

from __future__ import annotations


class SteerkitError(Exception):
    """Base class; the CLI maps subclasses onto exit codes."""


class ValidationError(SteerkitError, ValueError):
    """Bad input supplied by the caller (CLI exit code 2)."""


class NumericalError(SteerkitError, ArithmeticError):
    """A computation could not be completed reliably (CLI exit code 3)."""


class InvalidState(ValidationError):
    pass


class NotXState(ValidationError):
    pass


class ParameterOutOfRange(ValidationError):
    pass


class InvalidScenario(ValidationError):
    pass


class NTooLarge(ValidationError):
    pass


class InvalidDirection(ValidationError):
    pass


class UnsupportedScheme(ValidationError):
    pass


class TheoremPreconditionViolated(ValidationError):
    pass


class ResolutionTooLow(ValidationError):
    pass


class StateIsSteerable(ValidationError):
    """No local hidden state model exists for the requested scheme."""


class NegativeRadicand(NumericalError):
    pass


class NonMonotoneMargin(NumericalError):
    pass


class SolverNumericalFailure(NumericalError):
    pass
