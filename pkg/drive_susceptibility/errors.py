"""Exception hierarchy shared by every module of the package."""

from typing import Optional


class DriveSusceptibilityError(Exception):
    """Base class for all domain errors raised by the package.

    Not a ValueError, so pydantic validators let it through unwrapped.
    """


class ParameterError(DriveSusceptibilityError):
    """A physical or numerical parameter is outside its valid domain."""


class TimescaleError(ParameterError):
    """The correlation time is not well separated from the drive period."""


class StepSizeError(ParameterError):
    """The integrator step violates one of the stability bounds."""

    def __init__(self, message: str, bound: str):
        super().__init__(message)
        self.bound = bound


class InsufficientDataError(DriveSusceptibilityError):
    """Too few oscillations or samples to extract a metric."""


class SequenceSyntaxError(DriveSusceptibilityError):
    """Malformed pulse-sequence expression."""

    def __init__(self, message: str, position: int):
        super().__init__(f"{message} (at position {position})")
        self.position = position


class UnknownBlockError(SequenceSyntaxError):
    """A block name that is not in the registry."""

    def __init__(self, name: str, position: int):
        super().__init__(f"unknown block name '{name}'", position)
        self.name = name


class CoarseGrainingWindowError(ParameterError):
    """The coarse-graining interval does not satisfy tau_c << dt << 1/omega1."""

    def __init__(self, tau_ratio: float, drive_ratio: float, limit: float):
        super().__init__(
            f"coarse-graining window empty: tau_c/dt = {tau_ratio:.3g}, "
            f"omega1*dt = {drive_ratio:.3g} (both must be < {limit})"
        )
        self.tau_ratio = tau_ratio
        self.drive_ratio = drive_ratio


class FitError(DriveSusceptibilityError):
    """A regression could not be carried out on the supplied data."""


class RankDeficiencyError(FitError):
    """The design matrix of a linear fit is rank deficient."""


class ToleranceError(DriveSusceptibilityError):
    """A numerical cross-check exceeded its tolerance."""

    def __init__(self, message: str, failed: Optional[list] = None):
        super().__init__(message)
        self.failed = failed or []
