"""Command-line entry point for the experiment runner.

Exit codes: 0 success, 2 configuration error, 3 too many replicate failures.
"""

from __future__ import annotations

import argparse
import dataclasses
import os
import sys

from .harness import (
    ConfigError,
    ExperimentConfig,
    MAX_FAILURE_FRACTION,
    run_inconsistency_experiment,
    run_variance_experiment,
)

__all__ = ["main"]


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rkhslab", description="Variance-curve and interpolation-error experiments."
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, doc in (
        ("variance", "evaluate V, V1, V2 over a lambda grid"),
        ("inconsistency", "measure gamma-norm error growth of interpolation"),
    ):
        p = sub.add_parser(name, help=doc)
        p.add_argument("--config", required=True, help="path to a JSON experiment config")
        p.add_argument("--seed", type=int, default=None, help="override the config seed")
        p.add_argument("--out", default=None, help="override the config output directory")
        p.add_argument(
            "--threads", type=int, default=1, help="worker threads; 0 selects the CPU count"
        )
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        cfg = ExperimentConfig.from_json(args.config)
        if args.seed is not None:
            cfg = dataclasses.replace(cfg, seed=args.seed)
        if args.out is not None:
            cfg = dataclasses.replace(cfg, output_dir=args.out)
    except ConfigError as err:
        print(f"config error: {err}", file=sys.stderr)
        return 2
    threads = args.threads if args.threads > 0 else (os.cpu_count() or 1)

    try:
        if args.command == "variance":
            summary = run_variance_experiment(cfg, threads=threads)
            counts = summary["per_n"].values()
            total_fail = sum(c["failures"] for c in counts)
            bad = any(
                c["failures"] > MAX_FAILURE_FRACTION * cfg.replicates for c in counts
            )
            print(f"variance experiment done; {total_fail} failed replicates")
            return 3 if bad else 0
        result = run_inconsistency_experiment(cfg, threads=threads)
        bad = any(
            f > MAX_FAILURE_FRACTION * cfg.replicates for f in result.failure_counts
        )
        slope = "n/a" if result.fitted_slope is None else f"{result.fitted_slope:.3f}"
        print(
            f"inconsistency experiment done; fitted slope {slope}, "
            f"theoretical exponent {result.theoretical_exponent:.3f} "
            f"({result.classification})"
        )
        return 3 if bad else 0
    except ConfigError as err:
        print(f"config error: {err}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
