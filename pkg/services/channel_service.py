"""Channel service: path loss, log-normal shadowing and Rayleigh fading draws for every link."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import TYPE_CHECKING, List, Optional, Union

import numpy as np

from error_handling import (
    ConfigurationException,
    raise_if_negative,
    raise_if_not_positive,
)

if TYPE_CHECKING:
    from services.scenario import ScenarioConfig

log = logging.getLogger(__name__)

# Typical ranges; values outside only trigger a warning
PATH_LOSS_EXPONENT_RANGE = (2.0, 5.0)
SHADOWING_SPREAD_RANGE_DB = (0.0, 9.0)

# Symbol energy is fixed; SNR(dB) sets the noise variance
REFERENCE_SYMBOL_ENERGY = 1.0


@dataclass(frozen=True)
class LinkGeometry:
    """Large-scale description of one link class."""
    distance: float
    reference_loss: float = 1.0
    path_loss_exponent: float = 3.0
    shadowing_spread_db: float = 3.0

    def __post_init__(self):
        raise_if_not_positive(self.distance, "distance")
        raise_if_not_positive(self.reference_loss, "reference_loss")
        raise_if_not_positive(self.path_loss_exponent, "path_loss_exponent")
        raise_if_negative(self.shadowing_spread_db, "shadowing_spread_db")

    def soft_range_warnings(self) -> List[str]:
        """Return human-readable notes for parameters outside their typical range."""
        notes = []
        low, high = PATH_LOSS_EXPONENT_RANGE
        if not low <= self.path_loss_exponent <= high:
            notes.append(f"path_loss_exponent {self.path_loss_exponent} outside typical [{low}, {high}]")
        low, high = SHADOWING_SPREAD_RANGE_DB
        if not low <= self.shadowing_spread_db <= high:
            notes.append(f"shadowing_spread_db {self.shadowing_spread_db} outside typical [{low}, {high}] dB")
        return notes


@dataclass(frozen=True, eq=False)
class LinkRealization:
    """One link's amplitude path-loss gain, shadowing gain and small-scale channel."""
    alpha: float
    beta: float
    h: np.ndarray

    @property
    def gain(self) -> float:
        """Combined large-scale amplitude gain alpha * beta."""
        return self.alpha * self.beta

    @property
    def shape(self):
        return self.h.shape


@dataclass(frozen=True, eq=False)
class NetworkRealization:
    """All channels of one slot.

    ``rd`` and ``re`` hold matrices stacked over relays, column block m
    belonging to relay m. ``sd`` is the direct source-to-user link.
    """
    sr: List[LinkRealization]
    rd: List[LinkRealization]
    se: List[LinkRealization]
    re: List[LinkRealization]
    sd: List[LinkRealization]
    noise_variance: float
    symbols_per_relay: int

    @property
    def relays(self) -> int:
        return len(self.sr)

    def relay_columns(self, relay_set) -> np.ndarray:
        """Column indices of the stacked R->D / R->E matrices for a relay set."""
        n_m = self.symbols_per_relay
        return np.concatenate([np.arange(m * n_m, (m + 1) * n_m) for m in relay_set])


def path_loss_gain(geom: LinkGeometry) -> float:
    """Amplitude path-loss gain sqrt(L) / sqrt(d**rho)."""
    return float(np.sqrt(geom.reference_loss) / np.sqrt(geom.distance ** geom.path_loss_exponent))


def shadowing_gain(
    sigma_db: float,
    rng: np.random.Generator,
    size: Optional[int] = None,
) -> Union[float, np.ndarray]:
    """Log-normal shadowing gain 10**(sigma_s * g / 10) with g ~ N(0, 1).

    A real Gaussian exponent is used so the gain stays real.
    """
    if sigma_db < 0:
        raise ConfigurationException(
            f"shadowing spread must be >= 0 dB, got {sigma_db}",
            "Shadowing spread cannot be negative."
        )
    g = rng.standard_normal(size)
    gain = 10.0 ** (sigma_db * g / 10.0)
    if size is None:
        return float(gain)
    return gain


def complex_gaussian(shape, rng: np.random.Generator) -> np.ndarray:
    """I.i.d. CN(0, 1) entries."""
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2.0)


def noise_variance_from_snr(snr_db: float) -> float:
    """Noise variance for E_s = 1 at the given SNR in dB."""
    return REFERENCE_SYMBOL_ENERGY * 10.0 ** (-snr_db / 10.0)


def receiver_noise(rows: int, noise_variance: float, rng: Optional[np.random.Generator] = None) -> np.ndarray:
    """One CN(0, sigma^2 I) noise vector at a receiver with ``rows`` antennas.

    Without a generator every antenna gets the deterministic amplitude
    sigma, so rates computed from it are the average-noise rates.
    """
    if rng is None:
        return np.full(rows, np.sqrt(noise_variance), dtype=complex)
    return np.sqrt(noise_variance) * complex_gaussian(rows, rng)


def draw_link(geom: LinkGeometry, rows: int, cols: int, rng: np.random.Generator) -> LinkRealization:
    """Draw one link: deterministic path loss, fresh shadowing, fresh Rayleigh matrix."""
    if rows <= 0 or cols <= 0:
        raise ConfigurationException(
            f"link dimensions must be positive, got {rows}x{cols}",
            "Antenna and relay counts must be at least 1."
        )
    beta = shadowing_gain(geom.shadowing_spread_db, rng)
    h = complex_gaussian((rows, cols), rng)
    return LinkRealization(alpha=path_loss_gain(geom), beta=beta, h=h)


def draw_network(config: "ScenarioConfig", rng: np.random.Generator, snr_db: float) -> NetworkRealization:
    """Draw every link of one slot in a fixed order: S->R, R->D, S->E, R->E, S->D."""
    relay_antennas = config.relays * config.n_m
    geometry = config.geometry

    sr = [draw_link(geometry.sr, config.n_m, config.n_t, rng) for _ in range(config.relays)]
    rd = [draw_link(geometry.rd, config.n_r, relay_antennas, rng) for _ in range(config.users)]
    se = [draw_link(geometry.se, config.n_e, config.n_t, rng) for _ in range(config.eavesdroppers)]
    re = [draw_link(geometry.re, config.n_e, relay_antennas, rng) for _ in range(config.eavesdroppers)]
    sd = [draw_link(geometry.sd, config.n_r, config.n_t, rng) for _ in range(config.users)]

    return NetworkRealization(
        sr=sr,
        rd=rd,
        se=se,
        re=re,
        sd=sd,
        noise_variance=noise_variance_from_snr(snr_db),
        symbols_per_relay=config.n_m,
    )
