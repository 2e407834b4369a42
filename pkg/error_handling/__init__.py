"""Error handling package for the relay secrecy simulator."""

from .exceptions import (
    SimulatorBaseException,
    ConfigurationException,
    DimensionMismatchException,
    SingularChannelException,
    BufferException,
    BufferOverflowException,
    BufferUnderflowException,
    SelectionDeadlockException,
    CriticalSimulatorException
)

from .error_handler import (
    EXIT_OK,
    EXIT_FAILURE,
    EXIT_CONFIGURATION,
    ErrorHandler,
    handle_errors,
    raise_if_not_conformable,
    raise_if_not_matrix,
    raise_if_not_positive,
    raise_if_negative
)

from .redraw_handler import ChannelRedrawHandler

__all__ = [
    'SimulatorBaseException',
    'ConfigurationException',
    'DimensionMismatchException',
    'SingularChannelException',
    'BufferException',
    'BufferOverflowException',
    'BufferUnderflowException',
    'SelectionDeadlockException',
    'CriticalSimulatorException',
    'EXIT_OK',
    'EXIT_FAILURE',
    'EXIT_CONFIGURATION',
    'ErrorHandler',
    'handle_errors',
    'raise_if_not_conformable',
    'raise_if_not_matrix',
    'raise_if_not_positive',
    'raise_if_negative',
    'ChannelRedrawHandler'
]
