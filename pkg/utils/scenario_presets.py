"""Built-in scenario presets.

Each preset is a named set of overrides applied on top of the scenario
defaults before validation.
"""

from typing import Any, Dict, List, Optional


class ScenarioPreset:
    """A named collection of scenario overrides."""

    def __init__(self, name: str, description: str = ""):
        self.name = name
        self.description = description
        self.overrides: Dict[str, Any] = {}

    def add_override(self, key: str, value: Any):
        self.overrides[key] = value

    def to_dict(self) -> dict:
        """Scenario dictionary for this preset, including its name."""
        return {"name": self.name, **self.overrides}


class PresetManager:
    """Registry of the built-in scenarios."""

    def __init__(self):
        self.presets: Dict[str, ScenarioPreset] = {}
        self._initialize_default_presets()

    def _initialize_default_presets(self):
        # Single-antenna nodes
        fig2 = ScenarioPreset("fig2", "Single-antenna nodes: N_t=3, N_m=N_r=N_e=1, M=3, N_D=N_E=3, T=3")
        for key, value in {
            "n_t": 3, "n_m": 1, "n_r": 1, "n_e": 1,
            "relays": 3, "users": 3, "eavesdroppers": 3, "buffer_size": 3,
        }.items():
            fig2.add_override(key, value)
        self.presets["fig2"] = fig2

        # Two-antenna relays and users
        fig3 = ScenarioPreset("fig3", "MIMO nodes: N_t=6, N_m=N_r=N_e=2, M=3, N_D=N_E=3, T=6")
        for key, value in {
            "n_t": 6, "n_m": 2, "n_r": 2, "n_e": 2,
            "relays": 3, "users": 3, "eavesdroppers": 3, "buffer_size": 6,
        }.items():
            fig3.add_override(key, value)
        self.presets["fig3"] = fig3

    def get_preset(self, name: str) -> Optional[ScenarioPreset]:
        return self.presets.get(name)

    def list_available_presets(self) -> List[str]:
        return list(self.presets.keys())

    def get_preset_info(self, name: str) -> Optional[Dict]:
        """Name, description and overrides of a preset."""
        preset = self.get_preset(name)
        if preset is None:
            return None
        return {
            "name": preset.name,
            "description": preset.description,
            "overrides": dict(preset.overrides),
        }
