"""Buffer service: finite FIFO relay buffers counted in symbols."""

import logging
from collections import deque
from dataclasses import dataclass
from typing import Deque, Optional, Tuple

import numpy as np

from error_handling import (
    BufferOverflowException,
    BufferUnderflowException,
    ConfigurationException,
    raise_if_not_conformable,
)
from services.channel_service import LinkRealization
from services.precoding_service import Precoder

log = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class BufferEntry:
    """A received block y and what the slot it arrived in looked like.

    ``x`` is the precoded vector the source sent with ``precoder``;
    ``eavesdropper_noise`` holds each eavesdropper's noise while it overheard
    the block.
    """
    y: np.ndarray
    h_sr_snapshot: LinkRealization
    slot_index: int
    h_se_snapshot: Tuple[LinkRealization, ...] = ()
    x: Optional[np.ndarray] = None
    precoder: Optional[Precoder] = None
    eavesdropper_noise: Tuple[np.ndarray, ...] = ()

    @property
    def relay_noise(self) -> np.ndarray:
        """Noise stored with the block, y - alpha beta H_sr x; zero when x is unknown."""
        y = np.asarray(self.y, dtype=complex)
        if self.x is None:
            return np.zeros_like(y)
        link = self.h_sr_snapshot
        return y - link.gain * (link.h @ self.x)

    @property
    def symbols(self) -> int:
        return int(np.asarray(self.y).shape[0])


class BufferState:
    """Buffer Q_m of one relay with capacity T symbols and occupancy phi."""

    def __init__(self, capacity: int, n_m: int):
        if capacity < n_m:
            raise ConfigurationException(
                f"buffer capacity T={capacity} violates T ≥ N_m (N_m={n_m})",
                "Buffer size T must hold at least one block."
            )
        self.capacity = capacity
        self.n_m = n_m
        self._entries: Deque[BufferEntry] = deque()
        self._occupancy = 0

    def __len__(self) -> int:
        return len(self._entries)

    def __repr__(self) -> str:
        return f"BufferState(capacity={self.capacity}, occupancy={self._occupancy})"

    @property
    def occupancy(self) -> int:
        return self._occupancy

    @property
    def is_empty(self) -> bool:
        return self._occupancy == 0

    @property
    def is_full(self) -> bool:
        return self._occupancy == self.capacity

    def can_receive(self, n_m: Optional[int] = None) -> bool:
        """True iff another block of n_m symbols fits."""
        n_m = self.n_m if n_m is None else n_m
        return self._occupancy + n_m <= self.capacity

    def can_transmit(self, n_m: Optional[int] = None) -> bool:
        """True iff a whole block of n_m symbols is stored."""
        n_m = self.n_m if n_m is None else n_m
        return self._occupancy >= n_m

    def push(self, entry: BufferEntry):
        raise_if_not_conformable(entry.symbols, self.n_m, "buffered block length vs N_m")
        if not self.can_receive():
            raise BufferOverflowException(
                f"push at occupancy {self._occupancy} would exceed capacity {self.capacity}"
            )
        self._entries.append(entry)
        self._occupancy += entry.symbols

    def peek(self) -> BufferEntry:
        """Oldest entry, left in place."""
        if not self.can_transmit():
            raise BufferUnderflowException(
                f"peek at occupancy {self._occupancy}; a block needs {self.n_m} symbols"
            )
        return self._entries[0]

    def pop(self) -> BufferEntry:
        """Remove and return the oldest entry."""
        if not self.can_transmit():
            raise BufferUnderflowException(
                f"pop at occupancy {self._occupancy}; a block needs {self.n_m} symbols"
            )
        entry = self._entries.popleft()
        self._occupancy -= entry.symbols
        return entry
