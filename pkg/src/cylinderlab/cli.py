"""Command line front end: lab <kind> --config <path> [--out DIR] [--seed N] [--fixed-clock]."""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace

from .config import KINDS, load_config
from .errors import LabError, ParseError
from .reports import export_report
from .runner import run


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lab",
        description="Run one configured experiment and write its report.",
    )
    parser.add_argument("kind", choices=KINDS, help="experiment kind; must match the config")
    parser.add_argument("--config", required=True, help="path to the JSON experiment config")
    parser.add_argument("--out", default=None, help="output directory (overrides the config)")
    parser.add_argument("--seed", type=int, default=None, help="random seed (overrides the config)")
    parser.add_argument(
        "--fixed-clock",
        action="store_true",
        help="zero the wall clock in the report for byte-identical reruns",
    )
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        config = load_config(args.config)
    except ParseError as exc:
        print(f"error: {args.config}:{exc.line}:{exc.column}: {exc}", file=sys.stderr)
        return 2
    except LabError as exc:
        print(f"error: {args.config}: {exc}", file=sys.stderr)
        return 2

    if config.kind != args.kind:
        print(
            f"error: config kind {config.kind!r} does not match requested {args.kind!r}",
            file=sys.stderr,
        )
        return 2

    overrides = {}
    if args.out is not None:
        overrides["out_dir"] = args.out
    if args.seed is not None:
        if args.seed < 0:
            print("error: --seed must be nonnegative", file=sys.stderr)
            return 2
        overrides["seed"] = args.seed
    if overrides:
        config = replace(config, **overrides)

    report = run(config, fixed_clock=args.fixed_clock)
    try:
        written = export_report(report, config.out_dir)
    except LabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2

    for v in report.verdicts:
        status = "PASS" if v.passed else "FAIL"
        print(f"{status} {v.name}: {v.detail}")
    print(f"report: {written[0]} ({len(written)} files, {report.wall_clock:.2f} s)")
    return 0 if report.all_pass else 1


if __name__ == "__main__":
    sys.exit(main())
