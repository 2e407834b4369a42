"""Result persistence: the CSV table and the run manifest next to it."""

import hashlib
import json
import logging
import os
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone
from typing import Any, Dict, List, Tuple

from error_handling import SimulatorBaseException
from services.simulation_service import ResultTable

log = logging.getLogger(__name__)

CSV_FLOAT_FORMAT = "%.6g"


def _timestamp() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


def run_identifier(scenario: Dict[str, Any], policies: List[str]) -> str:
    """Short content hash of the resolved scenario and policy list."""
    canonical = json.dumps({"scenario": scenario, "policies": policies}, sort_keys=True, separators=(",", ":"))
    return hashlib.sha1(canonical.encode("utf-8")).hexdigest()[:12]


@dataclass(frozen=True)
class RunManifest:
    """Everything needed to reproduce a results file."""
    scenario: Dict[str, Any]
    policies: List[str]
    output_path: str
    run_id: str
    workers: int = 1
    timestamp: str = field(default_factory=_timestamp)

    @classmethod
    def create(cls, scenario: Dict[str, Any], policies: List[str], output_path: str, workers: int = 1) -> "RunManifest":
        return cls(
            scenario=scenario,
            policies=list(policies),
            output_path=output_path,
            run_id=run_identifier(scenario, list(policies)),
            workers=workers,
        )

    @property
    def stem(self) -> str:
        return f"{self.scenario.get('name', 'scenario')}_{self.run_id}"

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True)


def emit_results(table: ResultTable, out_dir: str, manifest: RunManifest) -> Tuple[str, str]:
    """Write ``<stem>.csv`` and ``<stem>.manifest.json`` into out_dir.

    Returns the two paths. I/O errors propagate unchanged.
    """
    if not table.rows:
        raise SimulatorBaseException("refusing to write an empty result table", "No results to write.")

    os.makedirs(out_dir, exist_ok=True)
    csv_path = os.path.join(out_dir, f"{manifest.stem}.csv")
    manifest_path = os.path.join(out_dir, f"{manifest.stem}.manifest.json")

    frame = table.to_frame()
    frame.to_csv(csv_path, index=False, float_format=CSV_FLOAT_FORMAT, lineterminator="\n")

    with open(manifest_path, "w", encoding="utf-8") as f:
        f.write(manifest.to_json())
        f.write("\n")

    log.info(f"Wrote {len(frame)} rows to {csv_path}")
    log.info(f"Wrote run manifest to {manifest_path}")
    return csv_path, manifest_path
