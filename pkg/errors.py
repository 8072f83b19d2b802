"""
Domain exceptions.

All errors derive from ValueError so callers that already treat bad input as a
ValueError keep working.
"""


class Defective(ValueError):
    """Raised when an eigendecomposition cannot be trusted (Jordan block)."""

    def __init__(self, message, condition=float('inf')):
        super().__init__(message)
        self.condition = condition


class NotErgodic(ValueError):
    """Raised when 1 is not the only, simple, peripheral eigenvalue of M."""

    REASONS = ('degenerate-one', 'peripheral-eigenvalue')

    def __init__(self, reason, message=None):
        if reason not in self.REASONS:
            raise ValueError(f"unknown NotErgodic reason: {reason}")
        super().__init__(message or f"reduced dynamics is not ergodic ({reason})")
        self.reason = reason


class CapacityError(ValueError):
    """Raised when a computation would exceed the supported dimensions."""


class PreconditionError(ValueError):
    """Raised when an operation refuses its input (exit code 3 in the cli)."""


class ResonanceError(PreconditionError):
    pass


class SF1Violation(PreconditionError):
    pass


class QuadratureError(PreconditionError):
    pass


class MethodDisagreement(PreconditionError):
    pass


class NumericalFailure(ValueError):
    """Raised when a computed quantity breaks an identity it must satisfy (exit code 1 in the cli)."""
