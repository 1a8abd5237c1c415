#!/usr/bin/env python3
"""RFRBoost - Thin CLI Entry Point.

This module provides the command-line interface for RFRBoost.
All heavy lifting is delegated to modular components in src/.

Usage Examples:
    # Fit a model and save it with a training report
    uv run main.py train --config configs/sine_train.toml

    # Score a saved model on held-out data
    uv run main.py evaluate --config configs/sine_evaluate.toml

    # k-fold CV, and grid search with nested CV
    uv run main.py cv --config configs/friedman_cv.toml --seed 3
    uv run main.py gridcv --config configs/ripple_gridcv.toml --out runs/grid

    # Concentric circles experiment (no config needed)
    uv run main.py pointcloud --out runs/pointcloud

Exit codes: 0 success, 1 usage or configuration error, 2 data error,
3 numerical error.
"""

from __future__ import annotations

import argparse
import sys

# Load environment variables FIRST before any other imports
import src.env_loader  # noqa: F401
from src.cli.commands import COMMANDS, EXIT_CONFIG, run_command
from src.cli.display import print_msg
from src.exceptions import ConfigurationError
from src.logging_config import set_log_level
from src.validation import load_run_config


class _ArgumentParser(argparse.ArgumentParser):
    """Usage errors exit with the configuration-error code."""

    def error(self, message: str):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    """Build CLI argument parser."""
    parser = _ArgumentParser(
        prog="rfrboost",
        description="RFRBoost - Random feature representation boosting",
    )
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_ArgumentParser)

    helps = {
        "train": "Fit a model on data.train_path and save it",
        "evaluate": "Score a saved model on data.test_path",
        "cv": "k-fold cross-validation of the configured model",
        "gridcv": "Grid search with nested cross-validation",
        "pointcloud": "Concentric circles experiment with representation dumps",
    }
    for name in COMMANDS:
        cmd = sub.add_parser(name, help=helps[name])
        cmd.add_argument("--config", "-c", required=name != "pointcloud",
                         help="TOML run configuration")
        cmd.add_argument("--seed", type=int, help="Override the configured seed")
        cmd.add_argument("--out", "-o", help="Override the output directory")
        cmd.add_argument("--log-level", choices=["DEBUG", "INFO", "WARNING", "ERROR"],
                         help="Override RFRBOOST_LOG_LEVEL for this run")

    return parser


def main(argv: list[str] | None = None) -> int:
    """RFRBoost CLI entry point."""
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.log_level:
        set_log_level(args.log_level)

    try:
        cfg = load_run_config(args.config, task=args.command, seed=args.seed, out_dir=args.out)
    except ConfigurationError as e:
        print_msg(str(e), "error")
        return EXIT_CONFIG

    return run_command(cfg)


if __name__ == "__main__":
    sys.exit(main())
