"""
Common error classes and error handling utilities
"""
import logging
from typing import Optional, Dict, Any

logger = logging.getLogger(__name__)

# CLI exit codes
EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_INFEASIBLE = 2


class CompPlannerException(Exception):
    """Base exception for CoMPlan"""
    def __init__(
        self,
        message: str,
        error_code: Optional[str] = None,
        details: Optional[Dict[str, Any]] = None
    ):
        self.message = message
        self.error_code = error_code
        self.details = details or {}
        super().__init__(self.message)


class DomainError(CompPlannerException):
    """Raised when a numeric argument is outside its domain"""
    pass


class UnsupportedOrderError(CompPlannerException):
    """Raised when the cooperation order is not 1, 2 or 3"""
    pass


class InfeasibleUsersError(CompPlannerException):
    """Raised when the user count cannot be served by N*M antennas"""
    pass


class SingularChannelError(CompPlannerException):
    """Raised when a channel matrix is rank deficient"""
    pass


class InfeasibleTargetError(CompPlannerException):
    """Raised when a planning target cannot be met inside the bracket"""
    pass


class ConfigError(CompPlannerException):
    """Raised when a run configuration is malformed"""
    pass


def handle_exception(error: Exception) -> int:
    """Convert CoMPlan exceptions to CLI exit codes"""
    if isinstance(error, InfeasibleTargetError):
        logger.error(describe_exception(error))
        return EXIT_INFEASIBLE
    elif isinstance(error, CompPlannerException):
        logger.error(describe_exception(error))
        return EXIT_CONFIG
    else:
        logger.error(f"Unexpected error: {error}", exc_info=error)
        return EXIT_CONFIG


def describe_exception(error: Exception) -> str:
    """One-line human readable description, including details when present"""
    if isinstance(error, CompPlannerException):
        text = error.message
        if error.details:
            extras = ", ".join(f"{k}={v}" for k, v in sorted(error.details.items()))
            text = f"{text} ({extras})"
        if error.error_code:
            text = f"[{error.error_code}] {text}"
        return text
    return str(error)
