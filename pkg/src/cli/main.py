"""
Command-line entry point.

Usage:
    python -m src.cli.main sweep --config config/bump.yaml --jobs 8
    python -m src.cli.main interval --config config/laminar.yaml --set interval.xi=[1,1]
    python -m src.cli.main validate --quick

Log level: --verbose forces DEBUG; otherwise PINLAB_LOG (error|warn|info|debug),
which may come from a local .env file.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from pathlib import Path
from typing import List, Optional

from dotenv import load_dotenv

from src.cli.commands import COMMANDS
from src.utils.config import load_config
from src.utils.errors import EXIT_CONFIG, PinlabError, exit_code_for
from src.utils.manifest import RunManifest

logger = logging.getLogger(__name__)

LOG_LEVELS = {
    "error": logging.ERROR,
    "warn": logging.WARNING,
    "warning": logging.WARNING,
    "info": logging.INFO,
    "debug": logging.DEBUG,
}


def configure_logging(verbose: bool = False) -> int:
    load_dotenv()
    if verbose:
        level = logging.DEBUG
    else:
        name = os.environ.get("PINLAB_LOG", "info").strip().lower()
        level = LOG_LEVELS.get(name, logging.INFO)
    logging.basicConfig(
        level=level,
        format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
    )
    return level


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pinlab",
        description="Pinning intervals and free boundaries in periodic media",
    )
    subparsers = parser.add_subparsers(dest="command", required=True)
    for name, func in COMMANDS.items():
        sub = subparsers.add_parser(name, help=(func.__doc__ or "").strip().splitlines()[0])
        sub.add_argument("--config", type=Path, default=None, help="YAML run configuration")
        sub.add_argument("--out", type=Path, default=None, help="Output directory (overrides output.out_dir)")
        sub.add_argument("--jobs", type=int, default=None, help="Worker processes (overrides solver.jobs)")
        sub.add_argument("--seed", type=int, default=None, help="Random seed for property suites")
        sub.add_argument("--dump-field", action="store_true", help="Write solution fields as text")
        sub.add_argument(
            "--set",
            dest="overrides",
            action="append",
            default=[],
            metavar="SECTION.KEY=VALUE",
            help="Override a config value (repeatable)",
        )
        sub.add_argument("--verbose", action="store_true", help="Enable verbose logging")
        if name == "validate":
            sub.add_argument("--quick", action="store_true", help="Shrink grids and t-lists for a smoke run")
    return parser


def _flag_overrides(args: argparse.Namespace) -> List[str]:
    overrides = list(args.overrides)
    if args.out is not None:
        overrides.append(f"output.out_dir={args.out}")
    if args.jobs is not None:
        overrides.append(f"solver.jobs={args.jobs}")
    if args.seed is not None:
        overrides.append(f"seed={args.seed}")
    if args.dump_field:
        overrides.append("output.dump_field=true")
    if getattr(args, "quick", False):
        overrides.append("validate.quick=true")
    return overrides


def main(argv: Optional[List[str]] = None) -> int:
    """Parse arguments, run one command and return its exit code."""
    args = build_parser().parse_args(argv)
    configure_logging(args.verbose)

    try:
        config = load_config(args.config, _flag_overrides(args))
    except PinlabError as e:
        logger.error("%s", e)
        return EXIT_CONFIG

    out_dir = Path(config.output.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    manifest = RunManifest(command=args.command, config=config.resolved(), seed=config.seed)
    try:
        code = COMMANDS[args.command](config, out_dir, manifest)
    except PinlabError as e:
        logger.error("%s failed: %s", args.command, e)
        manifest.status = type(e).__name__
        code = exit_code_for(e)
    manifest.write(out_dir)
    return code


if __name__ == "__main__":
    sys.exit(main())
