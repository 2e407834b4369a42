"""Relay Secrecy Simulator - Command Line Entry Point."""
import argparse
import logging
import os
import sys
from typing import List, Optional, Sequence, Tuple

import numpy as np
from dotenv import load_dotenv

from error_handling import EXIT_OK, ConfigurationException, ErrorHandler, handle_errors
from services.selection_service import SelectionPolicy
from services.simulation_service import ResultTable, sweep
from utils.config_manager import ScenarioConfigManager
from utils.results_writer import RunManifest, emit_results
from utils.scenario_presets import PresetManager

DEFAULT_POLICIES = "direct,max-ratio,max-link,ml-rs"
DEFAULT_OUTPUT_DIR = "results"


def setup_logging(level: str = "INFO"):
    """Configure logging for console output only."""
    log = logging.getLogger()

    numeric_level = logging.getLevelName(level.upper())
    if not isinstance(numeric_level, int):
        raise ConfigurationException(f"unknown log level {level!r}", f"Unknown log level '{level}'.")
    log.setLevel(numeric_level)

    # Only add handler if none exist to prevent duplication
    if not log.handlers:
        formatter = logging.Formatter(
            '[{asctime}] [{levelname:<8}] {name}: {message}',
            datefmt='%Y-%m-%d %H:%M:%S',
            style='{'
        )
        console_handler = logging.StreamHandler()
        console_handler.setFormatter(formatter)
        log.addHandler(console_handler)

        # Disable Python's default "last resort" handler to prevent duplication
        logging.lastResort = None

        logging.debug("Logging configured successfully.")


def _env_int(name: str) -> Optional[int]:
    raw = os.getenv(name)
    if raw is None or raw.strip() == "":
        return None
    try:
        return int(raw)
    except ValueError:
        raise ConfigurationException(f"{name}={raw!r} is not an integer", f"Environment variable {name} must be an integer.") from None


def parse_snr_range(text: str) -> Tuple[float, ...]:
    """Parse 'min:max:step' (inclusive) or a single value in dB."""
    parts = text.split(":")
    try:
        values = [float(part) for part in parts]
    except ValueError:
        raise ConfigurationException(f"--snr {text!r} is not numeric", "--snr expects min:max:step in dB.") from None

    if len(values) == 1:
        return (values[0],)
    if len(values) != 3:
        raise ConfigurationException(f"--snr {text!r} must have the form min:max:step", "--snr expects min:max:step in dB.")

    low, high, step = values
    if step <= 0 or high < low:
        raise ConfigurationException(
            f"--snr {text!r} needs step > 0 and min ≤ max",
            "--snr needs a positive step and min ≤ max."
        )
    count = int(np.floor((high - low) / step + 1e-9)) + 1
    return tuple(round(low + step * i, 10) for i in range(count))


def parse_policies(text: str) -> List[SelectionPolicy]:
    names = [name for name in text.split(",") if name.strip()]
    if not names:
        raise ConfigurationException("--policies is empty", "Request at least one policy.")
    return [SelectionPolicy.from_name(name) for name in names]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="relay-secrecy-sim",
        description="Secrecy rate of buffer-aided relay selection policies versus SNR",
    )
    parser.add_argument("--scenario", default="fig2", help="Preset name or JSON scenario file (default: fig2)")
    parser.add_argument("--policies", default=DEFAULT_POLICIES, help=f"Comma separated policies (default: {DEFAULT_POLICIES})")
    parser.add_argument("--snr", help="SNR grid as min:max:step in dB, inclusive")
    parser.add_argument("--trials", type=int, help="Episodes per (policy, SNR) pair")
    parser.add_argument("--seed", type=int, help="Master seed")
    parser.add_argument("--slots", type=int, help="Measured slots per episode")
    parser.add_argument("--warmup", type=int, help="Discarded warm-up slots per episode")
    parser.add_argument("--max-set-size", type=int, help="Largest relay set considered by ml-srs")
    parser.add_argument("--relays", type=int, help="Number of relays M (overrides the scenario)")
    parser.add_argument("--out", help=f"Output directory (CLI > env:SIM_OUTPUT_DIR > {DEFAULT_OUTPUT_DIR})")
    parser.add_argument("--workers", type=int, help="Worker processes (CLI > env:SIM_WORKERS > 1)")
    parser.add_argument("--report", action="store_true", help="Log policy gaps and SNR steps with 95%% intervals")
    parser.add_argument("--quiet", action="store_true", help="Disable the progress bar")
    parser.add_argument("--log-level", help="Logging level (CLI > env:SIM_LOG_LEVEL > INFO)")
    parser.add_argument("--list-presets", action="store_true", help="List built-in scenarios and exit")
    return parser


def log_report(table: ResultTable):
    """Log adjacent-policy gaps and per-policy SNR steps."""
    snr_points = sorted({row.snr_db for row in table.rows})
    for first, second in zip(table.policies, table.policies[1:]):
        for snr_db in snr_points:
            gap = table.gap(first, second, snr_db)
            verdict = "significant" if gap.significant else "not significant"
            logging.info(
                f"{first} - {second} @ {snr_db} dB: {gap.difference:+.4f} ± {gap.half_width:.4f} ({verdict})"
            )
    for policy in table.policies:
        for step in table.snr_steps(policy):
            if step.difference + step.half_width < 0.0:
                logging.warning(f"{policy}: mean secrecy rate drops below {step.snr_db} dB by {-step.difference:.4f}")


@handle_errors("Simulation run failed.")
def run(args: argparse.Namespace) -> int:
    manager = ScenarioConfigManager()
    config = manager.parse_scenario(args.scenario)

    max_set_size = args.max_set_size
    if args.relays is not None and max_set_size is None:
        max_set_size = args.relays

    config = manager.with_overrides(
        config,
        snr_db_grid=parse_snr_range(args.snr) if args.snr else None,
        trials=args.trials,
        master_seed=args.seed,
        episode_slots=args.slots,
        warmup_slots=args.warmup,
        relays=args.relays,
        max_set_size=max_set_size,
    )
    policies = parse_policies(args.policies)

    workers = args.workers
    if workers is None:
        workers = _env_int("SIM_WORKERS")
    if workers is None:
        workers = 1
    out_dir = args.out or os.getenv("SIM_OUTPUT_DIR") or DEFAULT_OUTPUT_DIR

    logging.info(f"Resolved scenario:\n{manager.serialize_scenario(config)}")
    table = sweep(config, policies, workers=workers, progress=not args.quiet)

    manifest = RunManifest.create(manager.to_dict(config), [p.value for p in policies], out_dir, workers)
    emit_results(table, out_dir, manifest)

    if args.report:
        log_report(table)
    return EXIT_OK


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Parse arguments, run the sweep and return the process exit code."""
    load_dotenv()
    args = build_parser().parse_args(argv)
    error_handler = ErrorHandler()

    try:
        setup_logging(args.log_level or os.getenv("SIM_LOG_LEVEL") or "INFO")

        if args.list_presets:
            presets = PresetManager()
            for name in presets.list_available_presets():
                print(f"{name}: {presets.get_preset(name).description}")
            return EXIT_OK

        return run(args)
    except Exception as e:
        return error_handler.handle_cli_error(e, context=f"scenario={args.scenario}")


if __name__ == "__main__":
    try:
        sys.exit(main())
    except KeyboardInterrupt:
        logging.info("Simulation interrupted by request.")
        sys.exit(1)
