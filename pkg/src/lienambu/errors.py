"""Exception hierarchy.

Validation problems (bad shapes, bad configs, size guards) derive from
``ValueError``; numerical failures (non-convergence, domain violations,
ill-conditioned recovery) derive from ``ArithmeticError``.  The CLI maps
the two families onto exit codes 2 and 3.
"""


class LieNambuError(Exception):
    """Base class for all package errors."""


class ValidationError(LieNambuError, ValueError):
    """Malformed input. ``field`` names the offending config path, if any."""

    def __init__(self, message, field=None):
        if field:
            message = f"{field}: {message}"
        super().__init__(message)
        self.field = field


class SizeGuardError(ValidationError):
    pass


class UnsupportedModelError(ValidationError):
    pass


class NumericalError(LieNambuError, ArithmeticError):
    """Numerical failure. ``t`` carries the trajectory time when known."""

    t = None


class DomainError(NumericalError):
    pass


class ConvergenceError(NumericalError):
    pass


class ConditioningError(NumericalError):
    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual
