import argparse
import glob
import json
import logging
import os
import sys
from typing import List, Optional

from pydantic import ValidationError

from app.exceptions import SimulationError
from app.schemas.experiment_schemas import ExperimentConfig
from app.services.experiment_service import EXIT_CONFIG, EXIT_OK, EXIT_SIMULATION, ExperimentService
from app.services.opcheck_service import run_check_suite
from app.services.preset_service import list_presets, write_preset
from app.services.sweep_service import SweepService
from config.config import DEFAULT_SEED, DEFAULT_WORKERS, OUTPUT_DIR

logger = logging.getLogger(__name__)

EXIT_CHECK_FAILED = 1


def load_config(path: str, seed: Optional[int] = None) -> ExperimentConfig:
    with open(path, "r", encoding="utf-8") as f:
        config = ExperimentConfig.model_validate_json(f.read())
    if seed is not None:
        config = config.model_copy(update={"seed": seed})
    return config


def load_config_dir(directory: str, seed: Optional[int] = None) -> List[ExperimentConfig]:
    if not os.path.isdir(directory):
        raise FileNotFoundError(f"No such config directory: {directory}")
    paths = sorted(glob.glob(os.path.join(directory, "*.json")))
    if not paths:
        raise ValueError(f"No *.json configs in {directory}")
    return [load_config(path, seed) for path in paths]


# ------------- Verbs -------------
def cmd_run(args: argparse.Namespace) -> int:
    config = load_config(args.config, args.seed)
    result = ExperimentService(args.output_dir).run_experiment(config)
    print(json.dumps({"name": result.name, "status": result.status, "run_dir": result.run_dir}))
    return result.exit_code


def cmd_sweep(args: argparse.Namespace) -> int:
    configs = load_config_dir(args.directory, args.seed)
    rows = SweepService(args.output_dir, args.workers).sweep(configs)
    for row in rows:
        print(f"{row['config_hash']}  {row['name']:<40} {row['status']}")
    return EXIT_OK


def cmd_check(args: argparse.Namespace) -> int:
    seed = DEFAULT_SEED if args.seed is None else args.seed
    failed = 0
    for name, report in run_check_suite(seed):
        print(json.dumps({"name": name, **report.as_dict()}))
        failed += not report.passed
    return EXIT_CHECK_FAILED if failed else EXIT_OK


def cmd_preset(args: argparse.Namespace) -> int:
    for path in write_preset(args.name, args.out, args.seed):
        print(path)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="kdvb", description="Pseudospectral KdV-Benjamin experiments")
    parser.add_argument("--seed", type=int, default=None, help="Override the seed of every config")
    parser.add_argument("--output-dir", default=OUTPUT_DIR, help="Base directory for run outputs")
    sub = parser.add_subparsers(dest="verb", required=True)

    run = sub.add_parser("run", help="Run one experiment config")
    run.add_argument("config")
    run.set_defaults(handler=cmd_run)

    sweep = sub.add_parser("sweep", help="Run every *.json config in a directory")
    sweep.add_argument("directory")
    sweep.add_argument("--workers", type=int, default=DEFAULT_WORKERS)
    sweep.set_defaults(handler=cmd_sweep)

    check = sub.add_parser("check", help="Run the operator check suite")
    check.set_defaults(handler=cmd_check)

    preset = sub.add_parser("preset", help="Write the configs of a catalog preset")
    preset.add_argument("name", choices=list_presets())
    preset.add_argument("--out", required=True)
    preset.set_defaults(handler=cmd_preset)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.handler(args)
    except SimulationError as e:
        logger.error(f"Simulation failed: {e}")
        return EXIT_SIMULATION
    except (ValidationError, ValueError, json.JSONDecodeError, FileNotFoundError) as e:
        logger.error(f"Invalid configuration: {e}")
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
