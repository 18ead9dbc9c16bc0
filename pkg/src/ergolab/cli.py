"""Command-line entry point: one subcommand per experiment kind, plus ``validate``."""
from __future__ import annotations

import argparse
import sys

from . import _config
from ._kernels import DriftError
from .experiments import KINDS, ConfigError, load_config, run, validate

EXIT_OK, EXIT_FAILED, EXIT_CONFIG, EXIT_BUDGET = 0, 1, 2, 3


def _seed(text: str) -> int:
    value = int(text, 0)
    if not 0 <= value < 2 ** 64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return value


def _workers(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("workers must be at least 1")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ergolab",
        description="Run reproducible ergodic-average experiments from YAML configs.",
        epilog="ERGOLAB_BUDGET caps the number of orbit steps a run may take.")
    sub = parser.add_subparsers(dest="command", required=True)
    for kind in KINDS:
        p = sub.add_parser(kind, help=f"run a {kind} experiment")
        p.add_argument("--config", required=True, help="path to the experiment config")
        p.add_argument("--out", required=True, help="output directory")
        p.add_argument("--workers", type=_workers, default=1, help="parallel workers (default 1)")
        p.add_argument("--seed", type=_seed, default=None, help="override the config seed")
    p = sub.add_parser("validate", help="check a config without running it")
    p.add_argument("--config", required=True, help="path to the experiment config")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
    except OSError as exc:
        print(f"error: cannot read config: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ConfigError as exc:
        for d in exc.diagnostics:
            print(f"{args.config}: {d}", file=sys.stderr)
        return EXIT_CONFIG

    if args.command == "validate":
        diags = validate(cfg)
        for d in diags:
            print(f"{args.config}: {d}")
        if not diags:
            print(f"{args.config}: ok")
        return EXIT_CONFIG if diags else EXIT_OK

    if cfg.data.get("kind") != args.command:
        print(f"{args.config}: kind: config is {cfg.data.get('kind')!r} but the subcommand is "
              f"{args.command!r}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        files = run(cfg, args.out, args.workers, args.seed)
    except ConfigError as exc:
        for d in exc.diagnostics:
            print(f"{args.config}: {d}", file=sys.stderr)
        budget = any("budget" in d for d in exc.diagnostics)
        return EXIT_BUDGET if budget else EXIT_CONFIG
    except _config.BudgetExceeded as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except (DriftError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAILED
    for f in files:
        print(f)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
