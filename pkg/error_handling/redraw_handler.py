"""Redraw-and-retry logic for channel realizations that cannot be inverted."""

import logging
from typing import Callable, TypeVar

from .exceptions import CriticalSimulatorException, SingularChannelException

log = logging.getLogger(__name__)

NetworkT = TypeVar("NetworkT")
ResultT = TypeVar("ResultT")


class ChannelRedrawHandler:
    """Retries a slot with a fresh channel draw when zero-forcing refuses to invert."""

    def __init__(self, max_retries: int = 20):
        self.max_retries = max_retries
        self.redraw_count = 0

    def run_with_redraw(
        self,
        draw: Callable[[], NetworkT],
        use: Callable[[NetworkT], ResultT],
    ) -> ResultT:
        """Draw a realization and hand it to ``use``, redrawing on singular channels."""
        for attempt in range(self.max_retries):
            network = draw()
            try:
                return use(network)
            except SingularChannelException as e:
                self.redraw_count += 1
                log.warning(
                    f"Singular channel on attempt {attempt + 1}/{self.max_retries} "
                    f"(condition {e.condition_number}); redrawing"
                )

        raise CriticalSimulatorException(
            f"Channel redraw budget of {self.max_retries} exhausted",
            "Every channel draw in this slot was singular; check the antenna configuration."
        )
