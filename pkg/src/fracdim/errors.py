"""Exception hierarchy.

Argument problems derive from ``ValueError`` so callers can treat them as
ordinary validation failures; numerical failures derive from
``ArithmeticError``.  The CLI maps the two groups onto exit codes 2 and 3.
"""


class FracdimError(Exception):
    """Base class for every error raised by this package."""


class ValidationError(FracdimError, ValueError):
    pass


class InvalidDimension(ValidationError):
    pass


class DomainError(ValidationError):
    """Evaluation requested at a point where the operator is singular."""


class NegativeRadius(ValidationError):
    pass


class NumericalError(FracdimError, ArithmeticError):
    pass


class ToleranceNotMet(NumericalError):
    def __init__(self, message, estimate=None, disagreement=None):
        super().__init__(message)
        self.estimate = estimate
        self.disagreement = disagreement


class SingularBoundarySystem(NumericalError):
    def __init__(self, message, condition=None):
        super().__init__(message)
        self.condition = condition


class GridTooCoarse(NumericalError):
    pass


class RootBracketFailure(NumericalError):
    pass


class StabilityViolation(NumericalError):
    pass
