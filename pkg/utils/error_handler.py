"""
Error handling utilities for the simulator.
Provides the exception hierarchy, a decorator for isolating failures and
reusable input validators.
"""
import logging
import math
import traceback
from typing import Optional, Dict, Any, Callable, Sequence
from functools import wraps
from enum import Enum

logger = logging.getLogger(__name__)


class ErrorSeverity(Enum):
    """Error severity levels."""
    LOW = "low"
    MEDIUM = "medium"
    HIGH = "high"
    CRITICAL = "critical"


class ErrorCategory(Enum):
    """Error categories, one per subsystem."""
    CONFIGURATION = "configuration"
    QUADRATURE = "quadrature"
    SCATTERING = "scattering"
    KINETIC = "kinetic"
    PARABOLIC = "parabolic"
    WAVES = "waves"
    SIMULATION = "simulation"
    OUTPUT = "output"


# ============================================================================
# Custom Exception Classes
# ============================================================================

class ChemowaveError(Exception):
    """Base exception for all simulator errors."""

    def __init__(
        self,
        message: str,
        category: ErrorCategory = ErrorCategory.SIMULATION,
        severity: ErrorSeverity = ErrorSeverity.MEDIUM,
        details: Optional[Dict[str, Any]] = None
    ):
        super().__init__(message)
        self.message = message
        self.category = category
        self.severity = severity
        self.details = details or {}

    def to_dict(self) -> Dict[str, Any]:
        """Convert exception to dictionary for logging/reporting."""
        return {
            "error_type": self.__class__.__name__,
            "message": self.message,
            "category": self.category.value,
            "severity": self.severity.value,
            "details": self.details
        }


# Configuration / input errors
class InvalidInputError(ChemowaveError):
    """Raised when an argument or configuration value is invalid."""

    def __init__(self, message: str, field: str = "unknown", **kwargs):
        kwargs.setdefault('category', ErrorCategory.CONFIGURATION)
        kwargs.setdefault('severity', ErrorSeverity.LOW)
        kwargs.setdefault('details', {}).update({'field': field})
        super().__init__(message, **kwargs)


class InvalidParameterError(InvalidInputError):
    """Raised when model parameters violate their admissible ranges."""


class InvalidGridError(InvalidInputError):
    """Raised when a velocity grid cannot be built."""

    def __init__(self, message: str, **kwargs):
        kwargs.setdefault('category', ErrorCategory.QUADRATURE)
        super().__init__(message, field=kwargs.pop('field', 'grid'), **kwargs)


# Root finding
class BisectionError(ChemowaveError):
    """Raised when a bracketed bisection fails to converge."""

    def __init__(self, message: str, bracket: Sequence[float] = (), **kwargs):
        kwargs.setdefault('category', ErrorCategory.SCATTERING)
        kwargs.setdefault('details', {}).update({'bracket': list(bracket)})
        super().__init__(message, **kwargs)


class NoSignChangeError(ChemowaveError):
    """Raised when a root is requested on an interval without a sign change."""

    def __init__(self, message: str, **kwargs):
        kwargs.setdefault('category', ErrorCategory.WAVES)
        super().__init__(message, **kwargs)


# Scattering matrices
class ScatteringError(ChemowaveError):
    """Base exception for S-matrix construction."""

    def __init__(self, message: str, rates: Optional[Sequence[float]] = None, **kwargs):
        kwargs.setdefault('category', ErrorCategory.SCATTERING)
        if rates is not None:
            kwargs.setdefault('details', {}).update({'rates': [float(r) for r in rates]})
        super().__init__(message, **kwargs)


class SingularMatrixError(ScatteringError):
    """Raised when a linear system is singular or too ill-conditioned."""

    def __init__(self, message: str, condition: float = math.inf, **kwargs):
        kwargs.setdefault('severity', ErrorSeverity.HIGH)
        kwargs.setdefault('details', {}).update({'condition': condition})
        super().__init__(message, **kwargs)


class NonResonanceError(ScatteringError):
    """Raised when the finite-difference S-matrix resonance guard fails."""


class StochasticityError(ScatteringError):
    """Raised when an S-matrix does not preserve the current."""


# Time stepping
class CFLViolationError(ChemowaveError):
    """Raised when a time step exceeds the transport or tumbling bound."""

    def __init__(self, message: str, dt: float = 0.0, limit: float = 0.0, **kwargs):
        kwargs.setdefault('category', ErrorCategory.KINETIC)
        kwargs.setdefault('details', {}).update({'dt': dt, 'limit': limit})
        super().__init__(message, **kwargs)


class StabilityBoundError(CFLViolationError):
    """Raised when a parabolic step exceeds its positivity or stability bound."""

    def __init__(self, message: str, **kwargs):
        kwargs.setdefault('category', ErrorCategory.PARABOLIC)
        super().__init__(message, **kwargs)


class NegativeDensityError(ChemowaveError):
    """Raised when a density becomes negative beyond tolerance."""

    def __init__(self, message: str, minimum: float = 0.0, **kwargs):
        kwargs.setdefault('category', ErrorCategory.KINETIC)
        kwargs.setdefault('details', {}).update({'minimum': minimum})
        super().__init__(message, **kwargs)


# Travelling waves
class ProfileError(ChemowaveError):
    """Raised when a stationary wave profile cannot be computed."""

    def __init__(self, message: str, speed: Optional[float] = None, **kwargs):
        kwargs.setdefault('category', ErrorCategory.WAVES)
        if speed is not None:
            kwargs.setdefault('details', {}).update({'speed': speed})
        super().__init__(message, **kwargs)


class DomainTooSmallError(ProfileError):
    """Raised when a wave profile does not fit inside the simulation domain."""


class SimulationAbortedError(ChemowaveError):
    """Raised when a run is aborted by a numerical failure."""

    def __init__(self, message: str, time: float = 0.0, step: int = 0, **kwargs):
        kwargs.setdefault('category', ErrorCategory.SIMULATION)
        kwargs.setdefault('severity', ErrorSeverity.HIGH)
        kwargs.setdefault('details', {}).update({'time': time, 'step': step})
        super().__init__(message, **kwargs)


# ============================================================================
# Error Handler Decorator
# ============================================================================

def handle_errors(
    fallback_value: Any = None,
    log_traceback: bool = True,
    reraise: bool = False
):
    """
    Decorator to handle errors gracefully with logging and fallback.

    Args:
        fallback_value: Value to return if error occurs
        log_traceback: Whether to log full traceback
        reraise: Whether to reraise the exception after handling
    """
    def decorator(func: Callable) -> Callable:
        @wraps(func)
        def wrapper(*args, **kwargs):
            try:
                return func(*args, **kwargs)
            except ChemowaveError as e:
                logger.error(f"Error in {func.__name__}: {e.message} | {e.to_dict()}")
                if log_traceback:
                    logger.debug(traceback.format_exc())

                if reraise:
                    raise
                return fallback_value

            except Exception as e:
                logger.exception(f"Unexpected error in {func.__name__}: {e}")

                if reraise:
                    raise
                return fallback_value

        return wrapper
    return decorator


# ============================================================================
# Input Validators
# ============================================================================

class InputValidator:
    """Validate numerical inputs before processing."""

    @staticmethod
    def validate_positive(value: float, field: str) -> None:
        """
        Validate that a value is finite and strictly positive.

        Raises:
            InvalidInputError: If the value is not positive
        """
        if not math.isfinite(value) or value <= 0.0:
            raise InvalidInputError(f"{field} must be positive, got {value}", field=field)

    @staticmethod
    def validate_non_negative(value: float, field: str) -> None:
        """
        Validate that a value is finite and non-negative.

        Raises:
            InvalidInputError: If the value is negative
        """
        if not math.isfinite(value) or value < 0.0:
            raise InvalidInputError(f"{field} must be non-negative, got {value}", field=field)

    @staticmethod
    def validate_choice(value: str, choices: Sequence[str], field: str) -> None:
        """
        Validate that a value is one of the allowed options.

        Raises:
            InvalidInputError: If the value is not allowed
        """
        if value not in choices:
            raise InvalidInputError(
                f"{field} must be one of {', '.join(choices)}, got {value!r}",
                field=field
            )

    @staticmethod
    def validate_sensitivities(chi_m: float, chi_n: float) -> None:
        """
        Validate chemotactic sensitivities.

        Raises:
            InvalidParameterError: If a sensitivity is outside [0,1) or their sum is not below 1
        """
        for name, chi in (('chi_m', chi_m), ('chi_n', chi_n)):
            if not 0.0 <= chi < 1.0:
                raise InvalidParameterError(f"{name} must lie in [0, 1), got {chi}", field=name)
        if chi_m + chi_n >= 1.0:
            raise InvalidParameterError(
                f"chi_m + chi_n must be below 1, got {chi_m + chi_n}",
                field='chi_m+chi_n'
            )
