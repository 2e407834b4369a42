"""Scenario configuration: dimensions, geometry and run lengths of one experiment."""

import logging
from dataclasses import dataclass, field
from typing import Tuple

from error_handling import ConfigurationException
from services.channel_service import LinkGeometry

log = logging.getLogger(__name__)

RELAY_WEIGHTS_IDENTITY = "identity"


def _default_sr() -> LinkGeometry:
    return LinkGeometry(distance=0.5)


def _default_rd() -> LinkGeometry:
    return LinkGeometry(distance=0.5)


def _default_se() -> LinkGeometry:
    return LinkGeometry(distance=1.0)


def _default_re() -> LinkGeometry:
    # eavesdroppers opposite the destination: 0.5 + 1.0
    return LinkGeometry(distance=1.5)


def _default_sd() -> LinkGeometry:
    return LinkGeometry(distance=1.0)


@dataclass(frozen=True)
class GeometryConfig:
    """Link geometry per node class (source at 0, relays at 0.5, users at 1)."""
    sr: LinkGeometry = field(default_factory=_default_sr)
    rd: LinkGeometry = field(default_factory=_default_rd)
    se: LinkGeometry = field(default_factory=_default_se)
    re: LinkGeometry = field(default_factory=_default_re)
    sd: LinkGeometry = field(default_factory=_default_sd)

    LINK_CLASSES = ("sr", "rd", "se", "re", "sd")


@dataclass(frozen=True)
class ScenarioConfig:
    """All dimensional and physical parameters of a run."""
    name: str = "custom"
    n_t: int = 3
    n_m: int = 1
    n_r: int = 1
    n_e: int = 1
    relays: int = 3
    users: int = 3
    eavesdroppers: int = 3
    buffer_size: int = 3
    symbol_energy: float = 1.0
    relay_weights: str = RELAY_WEIGHTS_IDENTITY
    geometry: GeometryConfig = field(default_factory=GeometryConfig)
    snr_db_grid: Tuple[float, ...] = (0.0, 5.0, 10.0, 15.0, 20.0)
    episode_slots: int = 200
    warmup_slots: int = 50
    trials: int = 100
    master_seed: int = 2024
    max_set_size: int = 3

    def __post_init__(self):
        self._check_counts()

        if self.n_t < self.n_m:
            raise ConfigurationException(
                f"n_t={self.n_t} violates N_t ≥ N_m (N_m={self.n_m})",
                "The source needs at least as many antennas as each relay for zero-forcing."
            )
        if not isinstance(self.buffer_size, int) or self.buffer_size < self.n_m:
            raise ConfigurationException(
                f"buffer_size T={self.buffer_size} violates T ≥ N_m (N_m={self.n_m})",
                "Buffer size T must hold at least one block of N_m symbols."
            )
        if self.n_r != self.n_m:
            raise ConfigurationException(
                f"n_r={self.n_r} violates N_r = N_m (N_m={self.n_m})",
                "Amplify-and-forward requires relays and users with the same antenna count."
            )
        if not 1 <= self.max_set_size <= self.relays:
            raise ConfigurationException(
                f"max_set_size={self.max_set_size} violates 1 ≤ max_set_size ≤ M (M={self.relays})",
                "Relay set size must be between 1 and the number of relays."
            )
        if self.relay_weights != RELAY_WEIGHTS_IDENTITY:
            raise ConfigurationException(
                f"relay_weights={self.relay_weights!r} is not supported",
                "Only identity relay weights are modeled."
            )
        if self.symbol_energy <= 0:
            raise ConfigurationException(
                f"symbol_energy={self.symbol_energy} violates E_s > 0",
                "Symbol energy must be positive."
            )
        if not self.snr_db_grid:
            raise ConfigurationException("snr_db_grid is empty", "Provide at least one SNR point.")
        if self.warmup_slots < 0:
            raise ConfigurationException(
                f"warmup_slots={self.warmup_slots} violates warmup_slots ≥ 0",
                "Warm-up length cannot be negative."
            )

        for link in GeometryConfig.LINK_CLASSES:
            for note in getattr(self.geometry, link).soft_range_warnings():
                log.warning(f"Scenario '{self.name}' link {link}: {note}")

    def _check_counts(self):
        counts = {
            "n_t": self.n_t,
            "n_m": self.n_m,
            "n_r": self.n_r,
            "n_e": self.n_e,
            "relays": self.relays,
            "users": self.users,
            "eavesdroppers": self.eavesdroppers,
            "episode_slots": self.episode_slots,
            "trials": self.trials,
        }
        for name, value in counts.items():
            if not isinstance(value, int) or isinstance(value, bool) or value < 1:
                raise ConfigurationException(
                    f"{name}={value!r} violates {name} ≥ 1",
                    f"{name} must be a positive integer."
                )

    @property
    def relay_antennas(self) -> int:
        return self.relays * self.n_m

    def supports_direct(self) -> bool:
        """Direct transmission zero-forces the stacked user channel from the source."""
        return self.n_t >= self.users * self.n_r
