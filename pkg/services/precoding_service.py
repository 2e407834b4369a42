"""Precoding service: zero-forcing precoders, transmit covariance and precoded symbol blocks."""

import logging
from dataclasses import dataclass
from typing import List

import numpy as np
from scipy import linalg

from error_handling import (
    ConfigurationException,
    SingularChannelException,
    raise_if_not_conformable,
    raise_if_not_matrix,
)

log = logging.getLogger(__name__)

# Largest accepted condition number of H @ H^H
MAX_GRAM_CONDITION = 1e12

QPSK_POINTS = np.exp(1j * (np.pi / 4 + np.pi / 2 * np.arange(4)))


@dataclass(frozen=True, eq=False)
class Precoder:
    """Precoding matrix (transmit antennas x streams) and the link it serves."""
    p: np.ndarray
    target: str = "link"

    @property
    def streams(self) -> int:
        return self.p.shape[1]


@dataclass(frozen=True, eq=False)
class SignalCovariance:
    """Transmit covariance Q with trace(Q) = E_s."""
    matrix: np.ndarray
    total_power: float

    @property
    def streams(self) -> int:
        return self.matrix.shape[0]


@dataclass(frozen=True, eq=False)
class PilotBlock:
    """Unit-modulus symbols s and their precoded transmit vector x = P s."""
    s: np.ndarray
    x: np.ndarray


def _gram_solve(gram: np.ndarray, rhs: np.ndarray, target: str) -> np.ndarray:
    """Solve G X = rhs for a Hermitian Gram matrix through a Cholesky factorization."""
    condition = float(np.linalg.cond(gram))
    if not np.isfinite(condition) or condition >= MAX_GRAM_CONDITION:
        raise SingularChannelException(
            f"{target}: Gram matrix condition number {condition:.3e} exceeds {MAX_GRAM_CONDITION:.0e}",
            condition_number=condition,
        )

    try:
        factor = linalg.cho_factor(gram, lower=True, check_finite=False)
    except linalg.LinAlgError as e:
        raise SingularChannelException(
            f"{target}: Cholesky factorization failed: {e}",
            condition_number=condition,
        ) from e
    return linalg.cho_solve(factor, rhs, check_finite=False)


def _checked_channel(h) -> np.ndarray:
    h = np.atleast_2d(np.asarray(h, dtype=complex))
    raise_if_not_matrix(h, "channel")
    return h


def zf_precoder(h: np.ndarray, target: str = "link") -> Precoder:
    """Right pseudo-inverse H^H (H H^H)^-1, refusing rank-deficient channels."""
    h = _checked_channel(h)
    rows, cols = h.shape
    if rows > cols:
        raise SingularChannelException(
            f"{target}: zero-forcing needs rows <= cols, got {rows}x{cols}",
            "Not enough transmit antennas to zero-force this link."
        )

    # P = H^H G^-1  <=>  G P^H = H  (G Hermitian)
    p = _gram_solve(h @ h.conj().T, h, target).conj().T
    return Precoder(p=p, target=target)


def left_inverse_precoder(h: np.ndarray, target: str = "link") -> Precoder:
    """Least-squares left pseudo-inverse (H^H H)^-1 H^H of a tall channel.

    P H = I holds on the transmit side; the receivers see the projection
    H P instead of the identity.
    """
    h = _checked_channel(h)
    rows, cols = h.shape
    if rows < cols:
        raise SingularChannelException(
            f"{target}: the left inverse needs rows >= cols, got {rows}x{cols}",
            "This link has more transmit antennas than receive antennas."
        )

    p = _gram_solve(h.conj().T @ h, h.conj().T, target)
    return Precoder(p=p, target=target)


def signal_covariance(streams: int, total_power: float) -> SignalCovariance:
    """Uniform power allocation Q = (E_s / streams) I."""
    if streams < 1:
        raise ConfigurationException(f"streams must be >= 1, got {streams}", "At least one stream is required.")
    if total_power <= 0:
        raise ConfigurationException(f"E_s must be > 0, got {total_power}", "Signal energy must be positive.")
    matrix = (total_power / streams) * np.eye(streams, dtype=complex)
    return SignalCovariance(matrix=matrix, total_power=float(total_power))


def precoded_covariance(precoder: Precoder, total_power: float) -> np.ndarray:
    """Covariance P Q P^H of the transmit vector x = P s under uniform stream power."""
    q = signal_covariance(precoder.streams, total_power).matrix
    return precoder.p @ q @ precoder.p.conj().T


def precode(precoder: Precoder, s: np.ndarray) -> np.ndarray:
    """Transmit vector x = P s."""
    s = np.asarray(s, dtype=complex)
    raise_if_not_conformable(precoder.p.shape[1], s.shape[0], f"precode {precoder.target}")
    return precoder.p @ s


def unit_modulus_symbols(count: int, rng: np.random.Generator) -> np.ndarray:
    """QPSK symbols on the unit circle."""
    return QPSK_POINTS[rng.integers(0, len(QPSK_POINTS), size=count)]


def make_pilot_block(precoder: Precoder, rng: np.random.Generator) -> PilotBlock:
    """Draw unit-modulus symbols for every stream of ``precoder`` and precode them."""
    s = unit_modulus_symbols(precoder.streams, rng)
    return PilotBlock(s=s, x=precode(precoder, s))


def relay_precoders(user_channels: List[np.ndarray]) -> List[Precoder]:
    """Pseudo-inverse precoders from the selected relays to every user.

    The stacked users' channel is inverted as a whole and each user gets
    its column block. With enough relay antennas that is the zero-forcing
    right inverse; otherwise it is the least-squares left inverse.
    """
    stacked = np.vstack(user_channels)
    bounds = np.cumsum([0] + [h.shape[0] for h in user_channels])

    if stacked.shape[0] <= stacked.shape[1]:
        joint = zf_precoder(stacked, target="rd[joint]")
    else:
        joint = left_inverse_precoder(stacked, target="rd[joint]")
    return [
        Precoder(p=joint.p[:, bounds[r]:bounds[r + 1]], target=f"rd[{r}]")
        for r in range(len(user_channels))
    ]
