"""Custom exceptions for the Soliton-Lab application."""

from typing import TYPE_CHECKING, Optional

if TYPE_CHECKING:
    from .models import ParamRegion


class SolitonLabError(Exception):
    """Base exception for all Soliton-Lab errors."""

    exit_code: int = 1


class ParameterError(SolitonLabError):
    """Exception raised for invalid numerical inputs."""

    exit_code = 2


class InadmissibleParametersError(ParameterError):
    """Exception raised when (omega, c, b) lies outside the existence region."""

    def __init__(self, message: str, region: Optional["ParamRegion"] = None):
        super().__init__(message)
        self.region = region


class ConfigurationError(ParameterError):
    """Exception raised for invalid run configuration."""

    pass


class EdgeDecayError(ParameterError):
    """Exception raised when a field does not decay at the window edges."""

    def __init__(self, message: str, ratio: float, tolerance: float):
        super().__init__(message)
        self.ratio = ratio
        self.tolerance = tolerance


class NehariProjectionError(ParameterError):
    """Exception raised when a field cannot be scaled onto the Nehari manifold."""

    pass


class NumericalError(SolitonLabError):
    """Base exception for numerical failures."""

    exit_code = 3


class BlowUpError(NumericalError):
    """Exception raised when a time integration produces non-finite or huge values."""

    def __init__(self, message: str, time: float, last_state=None):
        super().__init__(message)
        self.time = time
        self.last_state = last_state


class ConvergenceError(NumericalError):
    """Exception raised when an iterative solver fails to converge."""

    def __init__(self, message: str, iterations: int = 0, residual: float = float("nan")):
        super().__init__(message)
        self.iterations = iterations
        self.residual = residual


class GridTooShortError(NumericalError):
    """Exception raised when the truncated algebraic tail exceeds the tolerance."""

    def __init__(self, message: str, tail_estimate: float, tolerance: float):
        super().__init__(message)
        self.tail_estimate = tail_estimate
        self.tolerance = tolerance


class OutputError(SolitonLabError):
    """Exception raised when results cannot be written or read."""

    exit_code = 4

    def __init__(self, message: str, original_error: Optional[OSError] = None):
        super().__init__(message)
        self.original_error = original_error
