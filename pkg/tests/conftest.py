"""Pytest configuration and shared fixtures for the relay secrecy simulator tests."""

import dataclasses
from typing import Any, Dict, List, Optional

import numpy as np
import pytest

from services.buffer_service import BufferEntry, BufferState
from services.channel_service import LinkRealization, NetworkRealization, draw_network
from services.scenario import ScenarioConfig
from utils.config_manager import ScenarioConfigManager


@pytest.fixture
def rng():
    """Seeded generator for reproducible draws."""
    return np.random.default_rng(12345)


@pytest.fixture
def config_manager():
    """ScenarioConfigManager with the built-in presets."""
    return ScenarioConfigManager()


@pytest.fixture
def fig2_config(config_manager):
    """Single-antenna preset."""
    return config_manager.parse_scenario("fig2")


@pytest.fixture
def fig3_config(config_manager):
    """MIMO preset."""
    return config_manager.parse_scenario("fig3")


@pytest.fixture
def short_config(fig2_config):
    """fig2 with short episodes for fast engine tests."""
    return dataclasses.replace(
        fig2_config,
        snr_db_grid=(0.0, 10.0),
        episode_slots=20,
        warmup_slots=5,
        trials=3,
    )


@pytest.fixture
def fig2_network(fig2_config, rng):
    """One slot of fig2 channels at 10 dB."""
    return draw_network(fig2_config, rng, 10.0)


@pytest.fixture
def fig3_network(fig3_config, rng):
    """One slot of fig3 channels at 10 dB."""
    return draw_network(fig3_config, rng, 10.0)


@pytest.fixture
def fill_buffer():
    """Push ``blocks`` dummy entries into a buffer."""
    def _fill(buffer: BufferState, blocks: int, n_t: int = 3) -> BufferState:
        for i in range(blocks):
            buffer.push(TestConfig.entry(buffer.n_m, n_t, slot_index=i))
        return buffer
    return _fill


@pytest.fixture
def buffers_at(fill_buffer):
    """Buffers with the given occupancies in blocks."""
    def _make(blocks: List[int], capacity: int = 3, n_m: int = 1) -> List[BufferState]:
        return [fill_buffer(BufferState(capacity, n_m), b) for b in blocks]
    return _make


class TestConfig:
    """Helper class for canned scenario dictionaries and hand-built channels."""

    @staticmethod
    def default_scenario() -> Dict[str, Any]:
        """Return a small valid scenario dictionary."""
        return {
            "name": "unit",
            "n_t": 3,
            "n_m": 1,
            "n_r": 1,
            "n_e": 1,
            "relays": 3,
            "users": 3,
            "eavesdroppers": 3,
            "buffer_size": 3,
            "snr_db_grid": [0, 10],
            "episode_slots": 10,
            "warmup_slots": 2,
            "trials": 2,
            "master_seed": 7,
            "max_set_size": 3,
        }

    @staticmethod
    def link(h, alpha: float = 1.0, beta: float = 1.0) -> LinkRealization:
        return LinkRealization(alpha=alpha, beta=beta, h=np.atleast_2d(np.asarray(h, dtype=complex)))

    @staticmethod
    def network(
        sr: list,
        rd: list,
        se: list,
        re: list,
        sd: Optional[list] = None,
        noise_variance: float = 1.0,
        n_m: int = 1,
    ) -> NetworkRealization:
        """Network from plain matrices, every large-scale gain equal to one."""
        links = TestConfig.link
        return NetworkRealization(
            sr=[links(h) for h in sr],
            rd=[links(h) for h in rd],
            se=[links(h) for h in se],
            re=[links(h) for h in re],
            sd=[links(h) for h in (sd or [])],
            noise_variance=noise_variance,
            symbols_per_relay=n_m,
        )

    @staticmethod
    def entry(n_m: int = 1, n_t: int = 3, slot_index: int = 0) -> BufferEntry:
        return BufferEntry(
            y=np.zeros(n_m, dtype=complex),
            h_sr_snapshot=TestConfig.link(np.ones((n_m, n_t))),
            slot_index=slot_index,
        )

    @staticmethod
    def scenario(**overrides) -> ScenarioConfig:
        data = TestConfig.default_scenario()
        data.update(overrides)
        return ScenarioConfigManager().from_dict(data)
