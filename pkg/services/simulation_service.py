"""Simulation service: the slot engine, episodes and the seeded Monte Carlo sweep."""

import logging
from dataclasses import dataclass, field
from multiprocessing import Pool
from typing import List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from scipy import stats
from tqdm import tqdm

from error_handling import ChannelRedrawHandler, ConfigurationException
from services.buffer_service import BufferEntry, BufferState
from services.channel_service import NetworkRealization, draw_network, receiver_noise
from services.precoding_service import (
    precode,
    precoded_covariance,
    relay_precoders,
    signal_covariance,
    unit_modulus_symbols,
    zf_precoder,
)
from services.rate_service import RateSample, forwarded_noise_covariance, whiten, worst_case_secrecy_rate
from services.scenario import ScenarioConfig
from services.selection_service import (
    LinkPhase,
    PilotSet,
    SelectionDecision,
    SelectionPolicy,
    candidate_channel,
    direct_transmission,
    draw_pilots,
    select,
)

log = logging.getLogger(__name__)

CSV_COLUMNS = ["policy", "snr_db", "mean_secrecy_rate_bps_hz", "std_err", "trials", "episode_slots"]


@dataclass
class EpisodeState:
    """Mutable state of one episode: the relay buffers and symbol accounting."""
    config: ScenarioConfig
    snr_db: float
    buffers: List[BufferState]
    slot_index: int = 0
    symbols_pushed: int = 0
    symbols_popped: int = 0
    redraw_handler: ChannelRedrawHandler = field(default_factory=ChannelRedrawHandler)

    @classmethod
    def initial(cls, config: ScenarioConfig, snr_db: float) -> "EpisodeState":
        buffers = [BufferState(config.buffer_size, config.n_m) for _ in range(config.relays)]
        return cls(config=config, snr_db=snr_db, buffers=buffers)

    def occupancies(self) -> Tuple[int, ...]:
        return tuple(buf.occupancy for buf in self.buffers)

    @property
    def total_occupancy(self) -> int:
        return sum(self.occupancies())


@dataclass(frozen=True, eq=False)
class SlotOutcome:
    """What happened in one slot.

    ``rate`` is present only when data reached the users; ``decision`` is
    None for direct transmission.
    """
    decision: Optional[SelectionDecision]
    rate: Optional[RateSample]
    buffer_occupancies: Tuple[int, ...]

    @property
    def secrecy_rate(self) -> float:
        return self.rate.r_secrecy_clipped if self.rate is not None else 0.0

    @property
    def raw_secrecy_rate(self) -> float:
        return self.rate.r_secrecy if self.rate is not None else 0.0


@dataclass(frozen=True, eq=False)
class _SlotPlan:
    decision: Optional[SelectionDecision]
    rate: Optional[RateSample]
    pushes: Tuple[Tuple[int, BufferEntry], ...] = ()
    pops: Tuple[int, ...] = ()


@dataclass(frozen=True, eq=False)
class EpisodeResult:
    """Measured slots of one episode and its long-run secrecy rate."""
    policy: SelectionPolicy
    snr_db: float
    outcomes: Tuple[SlotOutcome, ...]
    symbols_pushed: int
    symbols_popped: int
    final_occupancy: int
    redraws: int

    @property
    def mean_secrecy_rate(self) -> float:
        """Average clipped slot secrecy rate over the measured slots."""
        return float(np.mean([o.secrecy_rate for o in self.outcomes]))

    @property
    def mean_raw_secrecy_rate(self) -> float:
        return float(np.mean([o.raw_secrecy_rate for o in self.outcomes]))


def _link_noise(net: NetworkRealization, decision: SelectionDecision, pilots: Optional[PilotSet], rng: np.random.Generator):
    """Receiver noise on the selected link; ML policies reuse the pilot's realization."""
    if pilots is not None:
        return pilots[(decision.phase, decision.relay_set)].noise
    h, _ = candidate_channel(net, decision.phase, decision.relay_set)
    return receiver_noise(h.shape[0], net.noise_variance, rng)


def _plan_receive(state: EpisodeState, net: NetworkRealization, relay_set, noise: np.ndarray, rng: np.random.Generator):
    """Phase I: the source zero-forces each selected relay and the relays store y.

    The eavesdroppers overhear the same slot with noise of their own.
    """
    config = state.config
    eavesdropper_noise = tuple(receiver_noise(link.h.shape[0], net.noise_variance, rng) for link in net.se)
    pushes = []
    offset = 0
    for m in relay_set:
        link = net.sr[m]
        rows = link.h.shape[0]
        precoder = zf_precoder(link.h, target=f"sr[{m}]")
        s = np.sqrt(config.symbol_energy) * unit_modulus_symbols(precoder.streams, rng)
        x = precode(precoder, s)
        y = link.gain * (link.h @ x) + noise[offset:offset + rows]
        offset += rows
        entry = BufferEntry(
            y=y,
            h_sr_snapshot=link,
            slot_index=state.slot_index,
            h_se_snapshot=tuple(net.se),
            x=x,
            precoder=precoder,
            eavesdropper_noise=eavesdropper_noise,
        )
        pushes.append((m, entry))
    return tuple(pushes)


def _source_covariance(entry: BufferEntry, symbol_energy: float) -> np.ndarray:
    if entry.precoder is None:
        return signal_covariance(entry.h_sr_snapshot.h.shape[1], symbol_energy).matrix
    return precoded_covariance(entry.precoder, symbol_energy)


def _plan_transmit(state: EpisodeState, net: NetworkRealization, relay_set, noise: np.ndarray, rng: np.random.Generator):
    """Phase II: the selected relays forward their oldest block to every user.

    Each relay passes on the noise stored with its block, so the rates see
    that noise next to the users' and eavesdroppers' own.
    """
    config = state.config
    cols = net.relay_columns(relay_set)
    user_channels = [link.h[:, cols] for link in net.rd]
    precoders = relay_precoders(user_channels)
    bounds = np.cumsum([0] + [h.shape[0] for h in user_channels])
    eavesdropper_noise = [receiver_noise(link.h.shape[0], net.noise_variance, rng) for link in net.re]
    overheard = tuple(receiver_noise(link.h.shape[0], net.noise_variance) for link in net.se)

    samples = []
    for m in relay_set:
        entry = state.buffers[m].peek()
        sr = entry.h_sr_snapshot
        h_sr = sr.gain * sr.h
        q_s = _source_covariance(entry, config.symbol_energy)
        se_links = entry.h_se_snapshot or tuple(net.se)
        se_noise = entry.eavesdropper_noise or overheard

        for r, link in enumerate(net.rd):
            p_d = precoders[r].p
            q_r = forwarded_noise_covariance(p_d, entry.relay_noise)
            h_rd = whiten(link.gain * user_channels[r], noise[bounds[r]:bounds[r + 1]])
            eavesdroppers = [
                (whiten(re_link.gain * re_link.h[:, cols], re_noise), whiten(se_link.gain * se_link.h, n_se))
                for re_link, re_noise, se_link, n_se in zip(net.re, eavesdropper_noise, se_links, se_noise)
            ]
            samples.append(worst_case_secrecy_rate(h_rd, eavesdroppers, p_d, h_sr, q_s, q_r))

    return RateSample.total(samples)


def _plan_slot(state: EpisodeState, policy: SelectionPolicy, net: NetworkRealization, rng: np.random.Generator):
    config = state.config
    if policy is SelectionPolicy.DIRECT:
        return _SlotPlan(decision=None, rate=direct_transmission(net, config.symbol_energy, rng))

    pilots = draw_pilots(net, rng) if policy.uses_pilots else None
    decision = select(policy, net, state.buffers, pilots=pilots, max_set_size=config.max_set_size)
    noise = _link_noise(net, decision, pilots, rng)

    if decision.phase is LinkPhase.RECEIVE:
        pushes = _plan_receive(state, net, decision.relay_set, noise, rng)
        return _SlotPlan(decision=decision, rate=None, pushes=pushes)

    rate = _plan_transmit(state, net, decision.relay_set, noise, rng)
    return _SlotPlan(decision=decision, rate=rate, pops=tuple(decision.relay_set))


def run_slot(state: EpisodeState, policy: SelectionPolicy, rng: np.random.Generator) -> SlotOutcome:
    """Draw a fresh network, apply the policy and update the buffers.

    The slot is planned against a realization before any buffer changes, so
    a singular zero-forcing inversion redraws the channel on clean state.
    """
    plan = state.redraw_handler.run_with_redraw(
        lambda: draw_network(state.config, rng, state.snr_db),
        lambda net: _plan_slot(state, policy, net, rng),
    )

    for m, entry in plan.pushes:
        state.buffers[m].push(entry)
        state.symbols_pushed += entry.symbols
    for m in plan.pops:
        state.symbols_popped += state.buffers[m].pop().symbols

    if plan.decision is not None:
        log.debug(
            f"slot {state.slot_index}: {plan.decision.phase.value} {plan.decision.relay_set} "
            f"metric={plan.decision.winning_metric:.4g} occupancy={state.occupancies()}"
        )
    state.slot_index += 1

    return SlotOutcome(
        decision=plan.decision,
        rate=plan.rate,
        buffer_occupancies=state.occupancies(),
    )


def check_policies(config: ScenarioConfig, policies: Sequence[SelectionPolicy]):
    """Reject policies the scenario cannot run."""
    if SelectionPolicy.DIRECT in policies and not config.supports_direct():
        raise ConfigurationException(
            f"direct policy needs N_t ≥ N_D·N_r, got n_t={config.n_t}, users={config.users}, n_r={config.n_r}",
            "Direct transmission needs N_t ≥ N_D·N_r source antennas."
        )


def run_episode(
    config: ScenarioConfig,
    policy: SelectionPolicy,
    snr_db: float,
    rng: np.random.Generator,
) -> EpisodeResult:
    """Run warm-up slots (discarded) followed by the measured slots."""
    check_policies(config, [policy])
    state = EpisodeState.initial(config, snr_db)

    for _ in range(config.warmup_slots):
        run_slot(state, policy, rng)
    outcomes = tuple(run_slot(state, policy, rng) for _ in range(config.episode_slots))

    return EpisodeResult(
        policy=policy,
        snr_db=snr_db,
        outcomes=outcomes,
        symbols_pushed=state.symbols_pushed,
        symbols_popped=state.symbols_popped,
        final_occupancy=state.total_occupancy,
        redraws=state.redraw_handler.redraw_count,
    )


def trial_rng(master_seed: int, policy: SelectionPolicy, snr_index: int, trial: int) -> np.random.Generator:
    """Independent substream of one trial."""
    seed = np.random.SeedSequence([master_seed, policy.policy_id, snr_index, trial])
    return np.random.default_rng(seed)


def _run_trial(task) -> Tuple[int, int, int, float]:
    config, policy, policy_index, snr_index, trial = task
    rng = trial_rng(config.master_seed, policy, snr_index, trial)
    result = run_episode(config, policy, config.snr_db_grid[snr_index], rng)
    return policy_index, snr_index, trial, result.mean_secrecy_rate


@dataclass(frozen=True)
class ResultRow:
    policy: str
    snr_db: float
    mean_secrecy_rate: float
    std_err: float
    trials: int
    episode_slots: int


@dataclass(frozen=True)
class PolicyGap:
    """Difference of two mean secrecy rates with its Student-t half width."""
    first: str
    second: str
    snr_db: float
    difference: float
    half_width: float
    confidence: float

    @property
    def significant(self) -> bool:
        """True when the whole interval lies above zero."""
        return self.difference - self.half_width > 0.0


def compare_rows(first: ResultRow, second: ResultRow, confidence: float = 0.95) -> PolicyGap:
    """Gap first - second between two independent result rows."""
    dof = min(first.trials, second.trials) - 1
    if dof < 1:
        half_width = float("inf")
    else:
        quantile = stats.t.ppf(0.5 + confidence / 2.0, dof)
        half_width = float(quantile * np.hypot(first.std_err, second.std_err))
    return PolicyGap(
        first=first.policy,
        second=second.policy,
        snr_db=first.snr_db,
        difference=first.mean_secrecy_rate - second.mean_secrecy_rate,
        half_width=half_width,
        confidence=confidence,
    )


@dataclass(frozen=True)
class ResultTable:
    """One row per (policy, SNR) pair."""
    rows: Tuple[ResultRow, ...]
    policies: Tuple[str, ...] = ()

    def sorted_rows(self) -> List[ResultRow]:
        return sorted(self.rows, key=lambda row: (row.policy, row.snr_db))

    def row(self, policy: str, snr_db: float) -> ResultRow:
        for candidate in self.rows:
            if candidate.policy == policy and candidate.snr_db == snr_db:
                return candidate
        raise KeyError(f"no row for policy={policy!r} snr_db={snr_db}")

    def to_frame(self) -> pd.DataFrame:
        records = [
            (row.policy, row.snr_db, row.mean_secrecy_rate, row.std_err, row.trials, row.episode_slots)
            for row in self.sorted_rows()
        ]
        return pd.DataFrame.from_records(records, columns=CSV_COLUMNS)

    def gap(self, first: str, second: str, snr_db: float, confidence: float = 0.95) -> PolicyGap:
        return compare_rows(self.row(first, snr_db), self.row(second, snr_db), confidence)

    def snr_steps(self, policy: str, confidence: float = 0.95) -> List[PolicyGap]:
        """Gaps between adjacent SNR points of one policy (higher minus lower)."""
        rows = sorted((row for row in self.rows if row.policy == policy), key=lambda row: row.snr_db)
        return [compare_rows(upper, lower, confidence) for lower, upper in zip(rows, rows[1:])]


def sweep(
    config: ScenarioConfig,
    policies: Sequence[SelectionPolicy],
    workers: int = 1,
    progress: bool = False,
) -> ResultTable:
    """Run ``trials`` episodes for every (policy, SNR) pair.

    Each trial owns a substream derived from (master_seed, policy, SNR
    index, trial index) and results are merged by index, so the table does
    not depend on worker count or policy order.
    """
    policies = list(dict.fromkeys(policies))
    if not policies:
        raise ConfigurationException("no policies requested", "Request at least one policy.")
    if workers < 1:
        raise ConfigurationException(f"workers={workers} violates workers ≥ 1", "Worker count must be positive.")
    check_policies(config, policies)

    grid = config.snr_db_grid
    tasks = [
        (config, policy, p, s, trial)
        for p, policy in enumerate(policies)
        for s in range(len(grid))
        for trial in range(config.trials)
    ]
    values = np.zeros((len(policies), len(grid), config.trials))

    log.info(
        f"Sweeping scenario '{config.name}': {len(policies)} policies x {len(grid)} SNR points "
        f"x {config.trials} trials on {workers} worker(s)"
    )

    with tqdm(total=len(tasks), desc="Episodes", disable=not progress, leave=False) as bar:
        if workers == 1:
            for task in tasks:
                p, s, trial, value = _run_trial(task)
                values[p, s, trial] = value
                bar.update()
        else:
            with Pool(workers) as pool:
                for p, s, trial, value in pool.imap(_run_trial, tasks, chunksize=max(1, config.trials // 4)):
                    values[p, s, trial] = value
                    bar.update()

    rows = []
    for p, policy in enumerate(policies):
        for s, snr_db in enumerate(grid):
            trial_values = values[p, s]
            std_err = 0.0
            if config.trials > 1:
                std_err = float(np.std(trial_values, ddof=1) / np.sqrt(config.trials))
            rows.append(ResultRow(
                policy=policy.value,
                snr_db=float(snr_db),
                mean_secrecy_rate=float(np.mean(trial_values)),
                std_err=std_err,
                trials=config.trials,
                episode_slots=config.episode_slots,
            ))
            log.info(f"{policy.value} @ {snr_db} dB: {rows[-1].mean_secrecy_rate:.4f} ± {std_err:.4f} bits/s/Hz")

    return ResultTable(rows=tuple(rows), policies=tuple(p.value for p in policies))
