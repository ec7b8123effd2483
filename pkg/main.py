import argparse
import json
import logging
import sys
from pathlib import Path
from typing import List, Optional

from pydantic import ValidationError

import config as settings
from commands import detect, electric, generate, kdist, learning, suite
from models.errors import InvalidParameterError, WalkSearchError
from schemas.experiment import ExperimentConfig
from schemas.results import CommandResponse

logger = logging.getLogger("walksearch")

COMMANDS = [generate, detect, electric, learning, kdist, suite]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="walksearch", description="Quantum walk search via electric networks")
    parser.add_argument("--config", help="JSON file mirroring ExperimentConfig")
    parser.add_argument("--seed", type=int)
    parser.add_argument("--model", choices=["ideal", "kernel"])
    parser.add_argument("--c1", type=float)
    parser.add_argument("--c2", type=float)
    parser.add_argument("--out", help="Output directory")
    subparsers = parser.add_subparsers(dest="command", required=True)
    for command in COMMANDS:
        command.register(subparsers)
    return parser


def load_config(args: argparse.Namespace) -> ExperimentConfig:
    """Environment defaults, then command-line flags, then the config file"""
    values = {}
    flags = {"seed": args.seed, "model": args.model, "c1": args.c1, "c2": args.c2, "out_dir": args.out}
    values.update({key: value for key, value in flags.items() if value is not None})
    if args.config:
        path = Path(args.config)
        try:
            values.update(json.loads(path.read_text()))
        except (OSError, json.JSONDecodeError) as e:
            raise InvalidParameterError(f"cannot read config file: {e}", str(path))
    try:
        return ExperimentConfig(**values)
    except ValidationError as e:
        raise InvalidParameterError(f"invalid configuration: {e}", args.config)


def run(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = load_config(args)
        response = args.handler(args, config)
    except WalkSearchError as e:
        logger.error(str(e))
        response = CommandResponse(success=False, message=str(e), data={"error": type(e).__name__})

    print(response.model_dump_json(indent=2))
    return 0 if response.success else 1


if __name__ == "__main__":
    logging.basicConfig(
        level=getattr(logging, settings.LOG_LEVEL.upper(), logging.INFO),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s"
    )
    sys.exit(run())
