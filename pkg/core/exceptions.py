"""Exception hierarchy.

Every error carries the process exit code the command line reports for it:
2 for configuration problems, 3 for numerical gates, 4 for physics
invariant violations.
"""

from typing import Optional


class QSLabError(Exception):
    """Base class for all laboratory errors."""

    exit_code = 1


class ConfigurationError(QSLabError, ValueError):
    """Invalid scenario configuration or family/parameter mismatch."""

    exit_code = 2

    def __init__(self, message: str, field_path: Optional[str] = None):
        self.field_path = field_path
        if field_path:
            message = f"{field_path}: {message}"
        super().__init__(message)


class NumericalGateError(QSLabError):
    """A self-check between two independent computations failed."""

    exit_code = 3


class StepSizeError(NumericalGateError):
    """The Richardson estimate of the integrator exceeded its tolerance."""

    def __init__(self, error_estimate: float, steps: int, suggested_steps: int):
        self.error_estimate = error_estimate
        self.steps = steps
        self.suggested_steps = suggested_steps
        super().__init__(
            f"Richardson error estimate {error_estimate:.3e} with {steps} steps "
            f"exceeds tolerance; rerun with at least {suggested_steps} steps"
        )


class NoClosedFormError(NumericalGateError):
    """The taxonomy class has no closed-form speed-limit ratio."""


class PhysicsInvariantError(QSLabError):
    """A propagated state or map left the physical region."""

    exit_code = 4


class NonphysicalStateError(PhysicsInvariantError, ValueError):
    """A state violates the density-matrix invariants."""
