"""Command line entry point: ``hm-finalstate <experiment> [options]``.

Exit status is 0 on success, 1 when an invariant check fails and 2 on
configuration or I/O errors.
"""
from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from .config import ENSEMBLES, EXPERIMENTS, FORMATS, ConfigError, parse_config_text, validate_config
from .report import emit
from .runner import run

EXIT_OK, EXIT_INVARIANT, EXIT_CONFIG = 0, 1, 2


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="hm-finalstate",
        description="Run seeded final-state projection experiments.",
    )
    p.add_argument("experiment", choices=EXPERIMENTS)
    p.add_argument("--n", dest="n_values", help="dimensions, e.g. 2,3,4 or 2..6")
    p.add_argument("--trials", help="trials per dimension (default 100)")
    p.add_argument("--mc-samples", dest="mc_samples", help="Monte Carlo samples (default 100000)")
    p.add_argument("--seed", help="64-bit seed (default 0)")
    p.add_argument("--ensemble", dest="unitary_ensemble", choices=ENSEMBLES)
    p.add_argument("--format", dest="output_format", choices=FORMATS)
    p.add_argument("--out", dest="output_path", help="write the report here instead of stdout")
    p.add_argument("--config", type=Path, help="key = value file; command line options win")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        raw = parse_config_text(args.config.read_text()) if args.config else {}
        overrides = {k: v for k, v in vars(args).items()
                     if k not in ("config", "verbose") and v is not None}
        cfg = validate_config({**raw, **overrides})
        report = run(cfg)
        if not cfg.output_path:
            sys.stdout.buffer.write(emit(report, cfg.output_format))
            sys.stdout.flush()
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    for name, inv in report.invariants.items():
        status = "ok" if inv["passed"] else "FAILED"
        print(f"{name}: {status} ({inv['violations']}/{inv['checked']} violations)", file=sys.stderr)
    return EXIT_OK if report.passed else EXIT_INVARIANT
