"""
Main application entry point for the aggregate warehouse simulator.
Parses the command line, builds the simulation configuration, runs the
selected scenario and writes the metrics CSV.
"""

import argparse
import sys
from contextlib import ExitStack
from typing import Any, Dict, List, Optional

import yaml

from simulator.engine import create_scenario, run
from utils.config import Config, ConfigError, SimConfig, config, load_flat_config
from utils.files import atomic_write
from utils.logger import setup_logger

# Create logger
logger = setup_logger("app")

SCENARIOS = ["warehouse", "gradient-demo", "spawn-demo", "collision"]


def build_parser() -> argparse.ArgumentParser:
    """
    Command-line parser. Flags mirror SimConfig field names.
    """
    parser = argparse.ArgumentParser(description="Aggregate programming warehouse simulator")
    parser.add_argument("--scenario", choices=SCENARIOS, help="Scenario to run (default: warehouse)")
    parser.add_argument("--seed", type=int, help="Random seed")
    parser.add_argument("--duration", type=float, help="Simulated seconds")
    parser.add_argument("--comm-radius", type=float, help="Radio range in metres")
    parser.add_argument("--drop-rate", type=float, help="Message loss probability per recipient")
    parser.add_argument("--period", type=float, help="Seconds between rounds")
    parser.add_argument("--rows", type=int, help="Rows of storage blocks")
    parser.add_argument("--cols", type=int, help="Columns of storage blocks")
    parser.add_argument("--forklifts", type=int, help="Number of forklifts")
    parser.add_argument("--out", default="metrics.csv", help="Metrics CSV path (default: metrics.csv)")
    parser.add_argument("--config", help="Flat 'key = value' experiment manifest")
    parser.add_argument("--profile", help="Named profile from config.yaml, e.g. lossy")
    parser.add_argument("--dump-state", metavar="PATH", help="Write one JSON line per executed round")
    parser.add_argument("--ledger", metavar="PATH", help="Write created logs and their receipts as JSON")
    parser.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                        help="Override any configuration field; repeatable")
    return parser


def resolve_config(args: argparse.Namespace, defaults: Config = config) -> SimConfig:
    """
    Layer the configuration: YAML defaults, profile, manifest, flags, --set.

    Args:
        args: Parsed arguments
        defaults: YAML configuration

    Returns:
        Validated SimConfig

    Raises:
        ConfigError: on unknown keys, bad values or an unknown profile
    """
    sim = SimConfig.from_config(defaults)
    if args.profile:
        profile = defaults.get(f"profiles.{args.profile}")
        if not isinstance(profile, dict):
            raise ConfigError(f"Unknown profile '{args.profile}'")
        sim = sim.with_overrides(profile)
    if args.config:
        sim = sim.with_overrides(load_flat_config(args.config))

    flags: Dict[str, Any] = {
        name: getattr(args, name)
        for name in ("scenario", "seed", "duration", "comm_radius", "drop_rate", "period", "rows", "cols", "forklifts")
    }
    sim = sim.with_overrides(flags)

    extra: Dict[str, Any] = {}
    for item in args.set:
        if '=' not in item:
            raise ConfigError(f"--set expects KEY=VALUE (got {item!r})")
        key, raw = item.split('=', 1)
        extra[key.strip()] = load_value(raw.strip())
    return sim.with_overrides(extra).validate()


def load_value(raw: str) -> Any:
    try:
        return yaml.safe_load(raw)
    except yaml.YAMLError as e:
        raise ConfigError(f"Cannot parse value {raw!r}: {e}")


def format_summary(sim: SimConfig, summary: Dict[str, Any]) -> str:
    return (
        f"scenario={sim.scenario} seed={sim.seed} rows={sim.rows} "
        f"logs_created={summary['logs_created']} logs_collected={summary['logs_collected']} "
        f"max_msg={summary['max_msg']} over_budget={summary['over_budget']} warnings={summary['warnings']}"
    )


def main(argv: Optional[List[str]] = None) -> int:
    """
    Main application entry point.

    Args:
        argv: Arguments without the program name; defaults to sys.argv[1:]

    Returns:
        Exit code: 0 on success, 1 on I/O or runtime failure, 2 on invalid configuration
    """
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)

    try:
        sim = resolve_config(args)
        scenario = create_scenario(sim)
        logger.info(f"Running {sim.scenario} with seed {sim.seed} for {sim.duration}s")
        with ExitStack() as outputs:
            # The dump is renamed into place only after every other output succeeded.
            dump = outputs.enter_context(atomic_write(args.dump_state, prefix=".dump-")) if args.dump_state else None
            series = run(sim, scenario=scenario, dump_state=dump)
            series.to_csv(args.out)
            if args.ledger and scenario.ledger is not None:
                scenario.ledger.save_to_file(args.ledger)
    except ConfigError as e:
        parser.print_usage(sys.stderr)
        print(f"error: {e}", file=sys.stderr)
        return 2
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    except Exception as e:
        logger.error(f"Error in simulation run: {e}")
        print(f"error: {e}", file=sys.stderr)
        return 1

    summary = series.summary()
    print(format_summary(sim, summary))
    extra = scenario.summary()
    if extra:
        logger.info(f"Scenario totals: {extra}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
