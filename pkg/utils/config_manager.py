"""Scenario configuration management: JSON files and built-in presets."""

import dataclasses
import json
import logging
import os
from typing import Any, Dict

from error_handling import ConfigurationException
from services.channel_service import LinkGeometry
from services.scenario import GeometryConfig, ScenarioConfig
from utils.scenario_presets import PresetManager

log = logging.getLogger(__name__)

SCENARIO_KEYS = {f.name for f in dataclasses.fields(ScenarioConfig)}
GEOMETRY_KEYS = {f.name for f in dataclasses.fields(LinkGeometry)}


class ScenarioConfigManager:
    """Reads, validates and writes scenario documents."""

    def __init__(self, preset_manager: PresetManager = None):
        self.preset_manager = preset_manager or PresetManager()

    def parse_scenario(self, source: str) -> ScenarioConfig:
        """Resolve a preset name or a JSON file path into a validated config."""
        preset = self.preset_manager.get_preset(source)
        if preset is not None:
            log.info(f"Using built-in preset '{source}'")
            return self.from_dict(preset.to_dict())

        if not os.path.exists(source):
            presets = ", ".join(self.preset_manager.list_available_presets())
            raise ConfigurationException(
                f"scenario {source!r} is neither a preset nor an existing file",
                f"Unknown scenario '{source}'. Built-in presets: {presets}"
            )

        with open(source, "r", encoding="utf-8") as f:
            try:
                data = json.load(f)
            except json.JSONDecodeError as e:
                raise ConfigurationException(
                    f"parse error in {source}: {e}",
                    f"Scenario file '{source}' is not valid JSON."
                ) from e

        log.info(f"Loaded scenario file {source}")
        config = self.from_dict(data)
        if config.name == "custom":
            config = dataclasses.replace(config, name=os.path.splitext(os.path.basename(source))[0])
        return config

    def from_dict(self, data: Dict[str, Any]) -> ScenarioConfig:
        """Build a config from a scenario dictionary; missing keys take defaults."""
        if not isinstance(data, dict):
            raise ConfigurationException(
                f"scenario document must be a JSON object, got {type(data).__name__}",
                "Scenario document must be a JSON object."
            )

        unknown = sorted(set(data) - SCENARIO_KEYS)
        if unknown:
            raise ConfigurationException(
                f"unknown scenario keys: {', '.join(unknown)}",
                f"Unknown scenario keys: {', '.join(unknown)}"
            )

        kwargs = dict(data)
        if "geometry" in kwargs:
            kwargs["geometry"] = self._parse_geometry(kwargs["geometry"])
        if "snr_db_grid" in kwargs:
            grid = kwargs["snr_db_grid"]
            if not isinstance(grid, (list, tuple)):
                raise ConfigurationException(
                    f"snr_db_grid must be a list, got {type(grid).__name__}",
                    "snr_db_grid must be a list of SNR values in dB."
                )
            kwargs["snr_db_grid"] = tuple(float(snr) for snr in grid)

        return ScenarioConfig(**kwargs)

    def _parse_geometry(self, data: Any) -> GeometryConfig:
        if not isinstance(data, dict):
            raise ConfigurationException("geometry must be an object", "geometry must be a JSON object.")

        unknown = sorted(set(data) - set(GeometryConfig.LINK_CLASSES))
        if unknown:
            raise ConfigurationException(
                f"unknown geometry link classes: {', '.join(unknown)}",
                f"Geometry link classes must be among {', '.join(GeometryConfig.LINK_CLASSES)}."
            )

        defaults = GeometryConfig()
        links = {}
        for link, fields in data.items():
            if not isinstance(fields, dict):
                raise ConfigurationException(f"geometry.{link} must be an object", f"geometry.{link} must be an object.")
            bad = sorted(set(fields) - GEOMETRY_KEYS)
            if bad:
                raise ConfigurationException(
                    f"unknown geometry.{link} keys: {', '.join(bad)}",
                    f"Unknown keys in geometry.{link}: {', '.join(bad)}"
                )
            merged = dataclasses.asdict(getattr(defaults, link))
            merged.update(fields)
            links[link] = LinkGeometry(**merged)
        return GeometryConfig(**links)

    def to_dict(self, config: ScenarioConfig) -> Dict[str, Any]:
        """Fully resolved scenario dictionary."""
        data = dataclasses.asdict(config)
        data["snr_db_grid"] = list(config.snr_db_grid)
        return data

    def serialize_scenario(self, config: ScenarioConfig) -> str:
        return json.dumps(self.to_dict(config), indent=2, sort_keys=True)

    def save_scenario(self, config: ScenarioConfig, path: str):
        with open(path, "w", encoding="utf-8") as f:
            f.write(self.serialize_scenario(config))
            f.write("\n")

    def with_overrides(self, config: ScenarioConfig, **overrides) -> ScenarioConfig:
        """Copy of ``config`` with the given fields replaced and revalidated."""
        overrides = {key: value for key, value in overrides.items() if value is not None}
        unknown = sorted(set(overrides) - SCENARIO_KEYS)
        if unknown:
            raise ConfigurationException(f"unknown scenario keys: {', '.join(unknown)}")
        if "snr_db_grid" in overrides:
            overrides["snr_db_grid"] = tuple(float(snr) for snr in overrides["snr_db_grid"])
        return dataclasses.replace(config, **overrides)
