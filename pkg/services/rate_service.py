"""Rate service: log-det capacities, two-hop destination and eavesdropper rates, secrecy rate."""

import logging
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence, Union

import numpy as np

from error_handling import raise_if_not_conformable, raise_if_not_matrix
from services.precoding_service import SignalCovariance

log = logging.getLogger(__name__)

# Round-off below this magnitude is reported as exactly zero
NEGATIVE_ROUNDOFF = 1e-12

# Half-duplex relaying needs two time units per delivered block
TWO_PHASE_FACTOR = 0.5

# Smallest per-antenna noise power a channel is whitened with
NOISE_POWER_FLOOR = np.finfo(float).tiny

Covariance = Union[SignalCovariance, np.ndarray, float]


@dataclass(frozen=True)
class RateSample:
    """Destination, eavesdropper and secrecy rates in bits/s/Hz."""
    r_d: float
    r_e: float
    r_secrecy: float
    r_secrecy_clipped: float

    @classmethod
    def from_rates(cls, r_d: float, r_e: float) -> "RateSample":
        secrecy = r_d - r_e
        return cls(r_d=r_d, r_e=r_e, r_secrecy=secrecy, r_secrecy_clipped=max(0.0, secrecy))

    @classmethod
    def total(cls, samples: Iterable["RateSample"]) -> "RateSample":
        """Sum per-user samples into one system sample; clipping applies to the sum."""
        r_d = 0.0
        r_e = 0.0
        for sample in samples:
            r_d += sample.r_d
            r_e += sample.r_e
        return cls.from_rates(r_d, r_e)


def _as_matrix(value, what: str) -> np.ndarray:
    matrix = np.atleast_2d(np.asarray(value, dtype=complex))
    raise_if_not_matrix(matrix, what)
    return matrix


def _covariance(q: Covariance) -> np.ndarray:
    if isinstance(q, SignalCovariance):
        return q.matrix
    return _as_matrix(q, "covariance")


def _log2det(matrix: np.ndarray) -> float:
    _, logabsdet = np.linalg.slogdet(matrix)
    value = float(logabsdet / np.log(2.0))
    if -NEGATIVE_ROUNDOFF < value < 0.0:
        return 0.0
    return value


def whiten(h, noise) -> np.ndarray:
    """Divide each receive row of H by the realized noise amplitude on that antenna."""
    h = _as_matrix(h, "channel")
    power = np.abs(np.atleast_1d(np.asarray(noise, dtype=complex))) ** 2
    raise_if_not_conformable(h.shape[0], power.shape[0], "channel rows vs noise samples")
    return h / np.sqrt(np.maximum(power, NOISE_POWER_FLOOR))[:, None]


def forwarded_noise_covariance(p_d, relay_noise) -> np.ndarray:
    """Covariance P_d diag(|n_r|^2) P_d^H of the relay noise an AF relay passes on."""
    p_d = _as_matrix(p_d, "relay precoder")
    power = np.abs(np.atleast_1d(np.asarray(relay_noise, dtype=complex))) ** 2
    raise_if_not_conformable(p_d.shape[1], power.shape[0], "precoder streams vs relay noise")
    return (p_d * power) @ p_d.conj().T


def logdet_capacity(h, q: Covariance) -> float:
    """log2 det(I + H Q H^H)."""
    h = _as_matrix(h, "channel")
    q = _covariance(q)
    raise_if_not_conformable(h.shape[1], q.shape[0], "capacity H columns vs Q")
    gram = h @ q @ h.conj().T
    return _log2det(np.eye(h.shape[0], dtype=complex) + gram)


def _two_hop_rate(base: np.ndarray, h, p_d, h_sr, q_s: Covariance, q_r: Optional[Covariance]) -> float:
    """½ log2 det(base + N D^-1).

    ``h`` is whitened by the receiver noise. N = H P_d H_sr Q_s H_sr^H P_d^H H^H
    carries the forwarded block and D = H Q_r H^H + I the relay noise that
    travels with it on top of the receiver's own. The ratio uses the right
    inverse of D. Without Q_r the transmit covariance Q_s stands in for it.
    """
    h = _as_matrix(h, "second-hop channel")
    p_d = _as_matrix(p_d, "relay precoder")
    h_sr = _as_matrix(h_sr, "S->R channel")
    q_s = _covariance(q_s)
    q_r = q_s if q_r is None else _covariance(q_r)

    raise_if_not_conformable(h.shape[1], p_d.shape[0], "second-hop columns vs precoder rows")
    raise_if_not_conformable(p_d.shape[1], h_sr.shape[0], "precoder streams vs relay antennas")
    raise_if_not_conformable(h_sr.shape[1], q_s.shape[0], "S->R columns vs Q_s")
    raise_if_not_conformable(h.shape[1], q_r.shape[0], "second-hop columns vs Q_r")
    raise_if_not_conformable(base.shape[0], h.shape[0], "base term vs receive antennas")

    end_to_end = h @ p_d @ h_sr
    numerator = end_to_end @ q_s @ end_to_end.conj().T
    denominator = h @ q_r @ h.conj().T + np.eye(h.shape[0], dtype=complex)
    ratio = np.linalg.solve(denominator.T, numerator.T).T
    return TWO_PHASE_FACTOR * _log2det(base + ratio)


def gamma_term(h_se, q_s: Covariance) -> np.ndarray:
    """Eavesdropper Phase-I accumulation I + H_se Q_s H_se^H."""
    h_se = _as_matrix(h_se, "S->E channel")
    q_s = _covariance(q_s)
    raise_if_not_conformable(h_se.shape[1], q_s.shape[0], "S->E columns vs Q_s")
    return np.eye(h_se.shape[0], dtype=complex) + h_se @ q_s @ h_se.conj().T


def destination_rate(h_rd, p_d, h_sr, q_s: Covariance, q_r: Optional[Covariance] = None) -> float:
    h_rd = _as_matrix(h_rd, "R->D channel")
    base = np.eye(h_rd.shape[0], dtype=complex)
    return _two_hop_rate(base, h_rd, p_d, h_sr, q_s, q_r)


def eavesdropper_rate(h_re, p_d, h_sr, h_se, q_s: Covariance, q_r: Optional[Covariance] = None) -> float:
    h_re = _as_matrix(h_re, "R->E channel")
    return _two_hop_rate(gamma_term(h_se, q_s), h_re, p_d, h_sr, q_s, q_r)


def secrecy_rate(h_rd, h_re, h_se, p_d, h_sr, q_s: Covariance, q_r: Optional[Covariance] = None) -> RateSample:
    """Relayed secrecy rate R = R_d - R_e for one user and one eavesdropper."""
    r_d = destination_rate(h_rd, p_d, h_sr, q_s, q_r)
    r_e = eavesdropper_rate(h_re, p_d, h_sr, h_se, q_s, q_r)
    return RateSample.from_rates(r_d, r_e)


def worst_case_secrecy_rate(
    h_rd,
    eavesdroppers: Sequence[tuple],
    p_d,
    h_sr,
    q_s: Covariance,
    q_r: Optional[Covariance] = None,
) -> RateSample:
    """Secrecy rate against the eavesdropper with the largest rate.

    ``eavesdroppers`` holds (H_re, H_se) pairs.
    """
    r_d = destination_rate(h_rd, p_d, h_sr, q_s, q_r)
    r_e = max(eavesdropper_rate(h_re, p_d, h_sr, h_se, q_s, q_r) for h_re, h_se in eavesdroppers)
    return RateSample.from_rates(r_d, r_e)


def direct_secrecy_rate(h_ba, h_ea, q_s: Covariance) -> float:
    """Single-phase secrecy rate (no ½ factor) of one user against one eavesdropper."""
    return logdet_capacity(h_ba, q_s) - logdet_capacity(h_ea, q_s)


def worst_case_direct_rate(h_ba, eavesdropper_channels: Sequence, q_s: Covariance) -> RateSample:
    """Direct secrecy rate against the eavesdropper that leaves the user the least."""
    r_d = logdet_capacity(h_ba, q_s)
    worst = min(direct_secrecy_rate(h_ba, h_ea, q_s) for h_ea in eavesdropper_channels)
    return RateSample.from_rates(r_d, r_d - worst)
