"""Centralized error handling for the simulator and its command line."""

import logging
import sys
import traceback
from functools import wraps
from typing import Callable, Optional, TextIO

import numpy as np

from .exceptions import (
    ConfigurationException,
    DimensionMismatchException,
    SimulatorBaseException,
)

log = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_CONFIGURATION = 2

SEVERITY_LEVELS = {
    "CRITICAL": logging.CRITICAL,
    "ERROR": logging.ERROR,
    "WARNING": logging.WARNING,
    "INFO": logging.INFO,
}


class ErrorHandler:
    """Logs errors by severity and turns them into CLI exit codes."""

    def __init__(self, stream: Optional[TextIO] = None):
        self.stream = stream
        self.error_count = 0
        self.critical_error_count = 0

    def log_error(self, error: Exception, context: Optional[str] = None):
        """Log a simulator error at the level of its severity, anything else with a trace."""
        self.error_count += 1
        where = f" ({context})" if context else ""

        if not isinstance(error, SimulatorBaseException):
            log.error(f"{type(error).__name__}: {error}{where}")
            log.debug(f"Stack trace: {traceback.format_exc()}")
            return

        if error.severity == "CRITICAL":
            self.critical_error_count += 1
        level = SEVERITY_LEVELS.get(error.severity, logging.ERROR)
        log.log(level, f"{type(error).__name__} [{error.severity}] {error.message}{where}")

    def handle_cli_error(self, error: Exception, context: Optional[str] = None) -> int:
        """Log the error, print its machine-readable line and return the exit code."""
        self.log_error(error, context)

        if not isinstance(error, SimulatorBaseException):
            # I/O and other foreign errors keep their own text
            error = SimulatorBaseException(
                message=f"{type(error).__name__}: {error}",
                user_message=str(error),
            )

        stream = self.stream or sys.stderr
        print(error.to_error_line(), file=stream)
        stream.flush()

        if isinstance(error, ConfigurationException):
            return EXIT_CONFIGURATION
        return EXIT_FAILURE


def handle_errors(fallback_message: str = "An error occurred while executing this function."):
    """
    Decorator that converts unexpected exceptions into SimulatorBaseException.

    Args:
        fallback_message: Short message attached to the converted exception
    """
    def decorator(func: Callable) -> Callable:
        @wraps(func)
        def wrapper(*args, **kwargs):
            try:
                return func(*args, **kwargs)
            except SimulatorBaseException as e:
                log.error(f"Simulator exception in {func.__name__}: {e.message}")
                raise
            except OSError:
                # surfaced verbatim
                raise
            except Exception as e:
                log.exception(f"Unhandled exception in {func.__name__}: {str(e)}")
                raise SimulatorBaseException(
                    message=f"Error in {func.__name__}: {str(e)}",
                    user_message=fallback_message
                ) from e
        return wrapper
    return decorator


def raise_if_not_conformable(left: int, right: int, what: str):
    """Raise DimensionMismatchException if two dimensions differ."""
    if left != right:
        raise DimensionMismatchException(
            f"{what}: {left} != {right}",
            f"Dimension mismatch in {what}."
        )


def raise_if_not_matrix(array: np.ndarray, what: str):
    """Raise DimensionMismatchException unless the operand is two dimensional."""
    if array.ndim != 2:
        raise DimensionMismatchException(
            f"{what} must be a matrix, got shape {array.shape}",
            f"{what} must be a matrix."
        )


def raise_if_not_positive(value: float, name: str):
    """Raise ConfigurationException if value is not strictly positive."""
    if not value > 0:
        raise ConfigurationException(
            f"{name} must be > 0, got {value}",
            f"{name} must be positive."
        )


def raise_if_negative(value: float, name: str):
    """Raise ConfigurationException if value is negative."""
    if value < 0:
        raise ConfigurationException(
            f"{name} must be >= 0, got {value}",
            f"{name} must not be negative."
        )
