"""
Selection service for the relay selection policies.

Handles the maximum-likelihood link metric, feasible relay-set enumeration,
pilot observations of every candidate link, the ML-RS and ML-SRS rules, the
max-ratio and max-link baselines and the relay-free direct transmission.
"""

import logging
from dataclasses import dataclass
from enum import Enum
from itertools import combinations
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from error_handling import (
    ConfigurationException,
    SelectionDeadlockException,
    raise_if_not_conformable,
)
from services.buffer_service import BufferState
from services.channel_service import NetworkRealization, receiver_noise
from services.precoding_service import signal_covariance, unit_modulus_symbols, zf_precoder
from services.rate_service import RateSample, whiten, worst_case_direct_rate

log = logging.getLogger(__name__)

# Floor for the max-ratio denominator
RATIO_DENOMINATOR_FLOOR = 1e-12

RelaySet = Tuple[int, ...]


class LinkPhase(Enum):
    """Half-duplex phase of a slot."""
    RECEIVE = "receive"    # S -> R
    TRANSMIT = "transmit"  # R -> D

    @property
    def rank(self) -> int:
        """Tie-break rank: Receive before Transmit."""
        return 0 if self is LinkPhase.RECEIVE else 1


class SelectionPolicy(Enum):
    """Selection policies by their command-line names."""
    DIRECT = "direct"
    MAX_RATIO = "max-ratio"
    MAX_LINK = "max-link"
    ML_RS = "ml-rs"
    ML_SRS = "ml-srs"

    @property
    def policy_id(self) -> int:
        """Stable index of the policy, used to derive random substreams."""
        return list(SelectionPolicy).index(self)

    @property
    def uses_pilots(self) -> bool:
        return self in (SelectionPolicy.ML_RS, SelectionPolicy.ML_SRS)

    @classmethod
    def from_name(cls, name: str) -> "SelectionPolicy":
        try:
            return cls(name.strip().lower())
        except ValueError:
            valid = ", ".join(p.value for p in cls)
            raise ConfigurationException(
                f"unknown policy {name!r}",
                f"Unknown policy '{name}'. Valid policies: {valid}"
            ) from None


@dataclass(frozen=True)
class CandidateLink:
    """A feasible (phase, relay set) pair and its score under some policy."""
    phase: LinkPhase
    relay_set: RelaySet
    metric: float = 0.0

    @property
    def tie_break(self) -> tuple:
        return (self.phase.rank, self.relay_set[0], len(self.relay_set), self.relay_set)


@dataclass(frozen=True)
class SelectionDecision:
    """The phase and relay set that act in a slot."""
    phase: LinkPhase
    relay_set: RelaySet
    winning_metric: float

    @classmethod
    def from_candidate(cls, candidate: CandidateLink) -> "SelectionDecision":
        return cls(phase=candidate.phase, relay_set=candidate.relay_set, winning_metric=candidate.metric)


@dataclass(frozen=True, eq=False)
class PilotObservation:
    """Known pilot x, the observation y of one candidate link and its noise.

    The noise is the receivers' realization on that link in this slot; the
    data block of a winning candidate sees the same realization.
    """
    x: np.ndarray
    y: np.ndarray
    noise: np.ndarray


PilotSet = Dict[Tuple[LinkPhase, RelaySet], PilotObservation]


def ml_metric(y, h, x, alpha, beta) -> float:
    """Squared residual ||y - alpha beta H x||^2.

    ``alpha`` and ``beta`` may be scalars or per-row gains of a stacked channel.
    """
    y = np.atleast_1d(np.asarray(y, dtype=complex))
    h = np.atleast_2d(np.asarray(h, dtype=complex))
    x = np.atleast_1d(np.asarray(x, dtype=complex))
    raise_if_not_conformable(h.shape[1], x.shape[0], "ML metric H columns vs pilot")
    raise_if_not_conformable(h.shape[0], y.shape[0], "ML metric H rows vs observation")

    gain = np.asarray(alpha, dtype=float) * np.asarray(beta, dtype=float)
    residual = y - gain * (h @ x)
    return float(np.real(np.vdot(residual, residual)))


def normalized_ml_metric(y, h, x, gains) -> float:
    """ML residual per unit of received channel energy, ||y - G H x||^2 / ||G H||_F^2.

    This is the inverse of the SNR the pilot arrived at, so links of any
    size compare on one scale.
    """
    gains = np.asarray(gains, dtype=float)
    h = np.atleast_2d(np.asarray(h, dtype=complex))
    energy = float(np.sum(np.abs(np.reshape(gains, (-1, 1)) * h) ** 2))
    return ml_metric(y, h, x, gains, 1.0) / max(energy, RATIO_DENOMINATOR_FLOOR)


def all_relay_sets(relays: int, max_set_size: Optional[int] = None) -> List[RelaySet]:
    """Nonempty subsets of range(relays), by cardinality then lexicographically."""
    limit = relays if max_set_size is None else min(max_set_size, relays)
    return [subset for size in range(1, limit + 1) for subset in combinations(range(relays), size)]


def enumerate_feasible_sets(
    buffers: Sequence[BufferState],
    phase: LinkPhase,
    max_set_size: int,
) -> List[CandidateLink]:
    """All nonempty subsets of relays feasible for ``phase`` with at most max_set_size members."""
    if phase is LinkPhase.RECEIVE:
        feasible = [m for m, buf in enumerate(buffers) if buf.can_receive()]
    else:
        feasible = [m for m, buf in enumerate(buffers) if buf.can_transmit()]

    candidates = []
    for size in range(1, min(max_set_size, len(feasible)) + 1):
        for subset in combinations(feasible, size):
            candidates.append(CandidateLink(phase=phase, relay_set=subset))
    return candidates


def candidate_channel(net: NetworkRealization, phase: LinkPhase, relay_set: RelaySet) -> Tuple[np.ndarray, np.ndarray]:
    """Block-stacked small-scale channel of a candidate and its per-row gain alpha*beta.

    Receive stacks the S->R matrices of the set. Transmit stacks every
    user's R->D matrix restricted to the set's relay columns.
    """
    if phase is LinkPhase.RECEIVE:
        links = [net.sr[m] for m in relay_set]
        h = np.vstack([link.h for link in links])
        gains = np.concatenate([np.full(link.h.shape[0], link.gain) for link in links])
        return h, gains

    cols = net.relay_columns(relay_set)
    h = np.vstack([link.h[:, cols] for link in net.rd])
    gains = np.concatenate([np.full(link.h.shape[0], link.gain) for link in net.rd])
    return h, gains


def eavesdropper_channels(net: NetworkRealization, phase: LinkPhase, relay_set: RelaySet) -> List[np.ndarray]:
    """Gain-weighted channels the eavesdroppers observe for a candidate."""
    if phase is LinkPhase.RECEIVE:
        return [link.gain * link.h for link in net.se]
    cols = net.relay_columns(relay_set)
    return [link.gain * link.h[:, cols] for link in net.re]


def draw_pilots(net: NetworkRealization, rng: np.random.Generator) -> PilotSet:
    """Send a unit-modulus pilot over every (phase, relay set) pair.

    Pilots are drawn for all subsets in canonical order regardless of
    buffer state, so random consumption does not depend on feasibility.
    """
    pilots: PilotSet = {}
    for phase in LinkPhase:
        for relay_set in all_relay_sets(net.relays):
            h, gains = candidate_channel(net, phase, relay_set)
            x = unit_modulus_symbols(h.shape[1], rng)
            noise = receiver_noise(h.shape[0], net.noise_variance, rng)
            pilots[(phase, relay_set)] = PilotObservation(x=x, y=gains * (h @ x) + noise, noise=noise)
    return pilots


def _best(candidates: List[CandidateLink], policy: str) -> SelectionDecision:
    if not candidates:
        raise SelectionDeadlockException(f"{policy}: no feasible link in either phase")
    winner = min(candidates, key=lambda c: (c.metric,) + c.tie_break)
    return SelectionDecision.from_candidate(winner)


def _best_score(candidates: List[CandidateLink], policy: str) -> SelectionDecision:
    """Largest metric wins; ties fall back to the shared order."""
    if not candidates:
        raise SelectionDeadlockException(f"{policy}: no feasible link in either phase")
    winner = min(candidates, key=lambda c: (-c.metric,) + c.tie_break)
    return SelectionDecision.from_candidate(winner)


def _feasible(buffers: Sequence[BufferState], max_set_size: int) -> List[CandidateLink]:
    return [
        candidate
        for phase in LinkPhase
        for candidate in enumerate_feasible_sets(buffers, phase, max_set_size)
    ]


def _score_ml(net: NetworkRealization, pilots: PilotSet, candidate: CandidateLink) -> CandidateLink:
    pilot = pilots[(candidate.phase, candidate.relay_set)]
    h, gains = candidate_channel(net, candidate.phase, candidate.relay_set)
    metric = normalized_ml_metric(pilot.y, h, pilot.x, gains)
    return CandidateLink(phase=candidate.phase, relay_set=candidate.relay_set, metric=metric)


def ml_srs_select(
    net: NetworkRealization,
    pilots: PilotSet,
    buffers: Sequence[BufferState],
    max_set_size: int,
) -> SelectionDecision:
    """Minimum normalized ML residual over every feasible relay set of either phase."""
    scored = [_score_ml(net, pilots, c) for c in _feasible(buffers, max_set_size)]
    return _best(scored, "ml-srs")


def ml_rs_select(net: NetworkRealization, pilots: PilotSet, buffers: Sequence[BufferState]) -> SelectionDecision:
    """Minimum normalized ML residual over every feasible single link of either phase."""
    scored = [_score_ml(net, pilots, c) for c in _feasible(buffers, 1)]
    return _best(scored, "ml-rs")


def effective_norm(net: NetworkRealization, phase: LinkPhase, relay_set: RelaySet) -> float:
    """Squared Frobenius norm of the gain-weighted candidate channel."""
    h, gains = candidate_channel(net, phase, relay_set)
    return float(np.sum(np.abs(gains[:, None] * h) ** 2))


def max_ratio_select(net: NetworkRealization, buffers: Sequence[BufferState]) -> SelectionDecision:
    """Largest legitimate-to-strongest-eavesdropper channel gain ratio."""
    scored = []
    for candidate in _feasible(buffers, 1):
        legit = effective_norm(net, candidate.phase, candidate.relay_set)
        eve = max(
            float(np.sum(np.abs(h) ** 2))
            for h in eavesdropper_channels(net, candidate.phase, candidate.relay_set)
        )
        ratio = legit / max(eve, RATIO_DENOMINATOR_FLOOR)
        scored.append(CandidateLink(phase=candidate.phase, relay_set=candidate.relay_set, metric=ratio))
    return _best_score(scored, "max-ratio")


def max_link_select(net: NetworkRealization, buffers: Sequence[BufferState]) -> SelectionDecision:
    """Strongest feasible single link of either phase."""
    scored = [
        CandidateLink(
            phase=c.phase,
            relay_set=c.relay_set,
            metric=effective_norm(net, c.phase, c.relay_set),
        )
        for c in _feasible(buffers, 1)
    ]
    return _best_score(scored, "max-link")


def direct_transmission(
    net: NetworkRealization,
    symbol_energy: float = 1.0,
    rng: Optional[np.random.Generator] = None,
) -> RateSample:
    """Source-to-users transmission without relays.

    The stacked direct channel is zero-forced from the source; every user's
    rate is taken against its strongest eavesdropper. With ``rng`` every
    receiver sees a realized noise vector, otherwise the average noise.
    Raises SingularChannelException when the stacked channel cannot be
    inverted.
    """
    users = len(net.sd)
    stacked = np.vstack([link.h for link in net.sd])
    joint = zf_precoder(stacked, target="sd[joint]")
    eve_noise = [receiver_noise(eve.h.shape[0], net.noise_variance, rng) for eve in net.se]

    samples = []
    offset = 0
    for link in net.sd:
        n_r = link.h.shape[0]
        p_r = joint.p[:, offset:offset + n_r]
        offset += n_r
        q = signal_covariance(n_r, symbol_energy / users)
        h_ba = whiten(link.gain * (link.h @ p_r), receiver_noise(n_r, net.noise_variance, rng))
        h_eas = [whiten(eve.gain * (eve.h @ p_r), noise) for eve, noise in zip(net.se, eve_noise)]
        samples.append(worst_case_direct_rate(h_ba, h_eas, q))
    return RateSample.total(samples)


def select(
    policy: SelectionPolicy,
    net: NetworkRealization,
    buffers: Sequence[BufferState],
    pilots: Optional[PilotSet] = None,
    max_set_size: int = 1,
) -> SelectionDecision:
    """Dispatch to the relay selection rule of ``policy``."""
    if policy is SelectionPolicy.ML_RS:
        return ml_rs_select(net, pilots, buffers)
    if policy is SelectionPolicy.ML_SRS:
        return ml_srs_select(net, pilots, buffers, max_set_size)
    if policy is SelectionPolicy.MAX_RATIO:
        return max_ratio_select(net, buffers)
    if policy is SelectionPolicy.MAX_LINK:
        return max_link_select(net, buffers)
    raise ConfigurationException(
        f"policy {policy.value!r} does not select relays",
        "Direct transmission bypasses relay selection."
    )
