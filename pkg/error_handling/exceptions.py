"""Custom exception classes for the relay secrecy simulator."""

import json
from typing import Optional


class SimulatorBaseException(Exception):
    """Base exception class for all simulator errors."""

    def __init__(self, message: str, user_message: Optional[str] = None, severity: str = "ERROR"):
        """
        Initialize base exception.

        Args:
            message: Technical error message for logging
            user_message: Short message shown on the command line
            severity: Error severity level (INFO, WARNING, ERROR, CRITICAL)
        """
        super().__init__(message)
        self.message = message
        self.user_message = user_message or "An unexpected error occurred."
        self.severity = severity

    def to_error_line(self) -> str:
        """Render this exception as a single machine-readable JSON line."""
        return json.dumps(
            {
                "error": self.__class__.__name__,
                "severity": self.severity,
                "message": self.message,
                "detail": self.user_message,
            },
            sort_keys=True,
        )


class ConfigurationException(SimulatorBaseException):
    """Exception for invalid scenarios, unknown keys and bad CLI values."""

    def __init__(self, message: str, user_message: Optional[str] = None):
        super().__init__(
            message,
            user_message or "Scenario configuration is invalid.",
            "WARNING"
        )


class DimensionMismatchException(SimulatorBaseException):
    """Exception for non-conformable matrix or vector operands."""

    def __init__(self, message: str, user_message: Optional[str] = None):
        super().__init__(
            message,
            user_message or "Matrix dimensions do not agree.",
            "ERROR"
        )


class SingularChannelException(SimulatorBaseException):
    """Raised when a zero-forcing inversion is rank deficient or ill-conditioned."""

    def __init__(self, message: str, user_message: Optional[str] = None, condition_number: Optional[float] = None):
        super().__init__(
            message,
            user_message or "Channel realization cannot be inverted; redraw it.",
            "WARNING"
        )
        self.condition_number = condition_number


class BufferException(SimulatorBaseException):
    """Exception for illegal relay buffer operations."""

    def __init__(self, message: str, user_message: Optional[str] = None):
        super().__init__(
            message,
            user_message or "Relay buffer operation rejected.",
            "ERROR"
        )


class BufferOverflowException(BufferException):
    """Push into a buffer that cannot hold another block."""

    def __init__(self, message: str, user_message: Optional[str] = None):
        super().__init__(message, user_message or "Relay buffer is full.")


class BufferUnderflowException(BufferException):
    """Pop from a buffer that holds no complete block."""

    def __init__(self, message: str, user_message: Optional[str] = None):
        super().__init__(message, user_message or "Relay buffer is empty.")


class SelectionDeadlockException(SimulatorBaseException):
    """No link is feasible in either phase."""

    def __init__(self, message: str, user_message: Optional[str] = None):
        super().__init__(
            message,
            user_message or "No relay can receive or transmit in this slot.",
            "CRITICAL"
        )


class CriticalSimulatorException(SimulatorBaseException):
    """Exception for failures that abort the whole run."""

    def __init__(self, message: str, user_message: Optional[str] = None):
        super().__init__(
            message,
            user_message or "A critical error aborted the simulation.",
            "CRITICAL"
        )
