"""Command-line front end.

    chaoscomm <subcommand> [--config FILE] [--out DIR] [--seed N] [--set key=value ...]

Subcommands are the canned experiments; every config key can be overridden
with --set.  Exit codes: 0 all verdicts pass, 1 an acceptance verdict failed,
2 usage or configuration error.  The summary block goes to stdout (identical
to the summary.txt artifact); wall time goes to stderr so artifact bytes stay
deterministic.
"""

from __future__ import annotations

import argparse
import sys

from .config import EXPERIMENTS, ConfigError, parse_config
from .experiments import run_experiment


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="chaoscomm",
                                     description="Chua-oscillator secure-communication bench")
    sub = parser.add_subparsers(dest="experiment", required=True, metavar="subcommand")
    for name in EXPERIMENTS:
        sp = sub.add_parser(name, help=f"run the {name} experiment")
        sp.add_argument("--config", help="key = value config file")
        sp.add_argument("--out", help="output directory (default: out)")
        sp.add_argument("--seed", type=int, help="deterministic seed")
        sp.add_argument("--set", action="append", default=[], metavar="key=value",
                        help="override one config key (repeatable)")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)

    text = ""
    if args.config:
        try:
            with open(args.config) as fh:
                text = fh.read()
        except OSError as exc:
            print(f"error: cannot read config: {exc}", file=sys.stderr)
            return 2

    overrides = {}
    for item in args.set:
        if "=" not in item:
            print(f"error: --set expects key=value, got '{item}'", file=sys.stderr)
            return 2
        key, _, value = item.partition("=")
        overrides[key.strip()] = value.strip()
    if args.seed is not None:
        overrides["seed"] = str(args.seed)
    if args.out is not None:
        overrides["output_dir"] = args.out

    if "experiment" not in text.replace(" ", "").replace("\t", ""):
        text = f"experiment = {args.experiment}\n" + text

    try:
        cfg = parse_config(text, overrides)
    except ConfigError as exc:
        for err in exc.errors:
            print(f"config error: {err}", file=sys.stderr)
        return 2

    if cfg.experiment != args.experiment:
        print(f"config error: config file names experiment '{cfg.experiment}' "
              f"but subcommand is '{args.experiment}'", file=sys.stderr)
        return 2

    try:
        report, _paths = run_experiment(cfg)
    except (ValueError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2

    sys.stdout.write(report.summary_text())
    print(f"wall_time_s = {report.wall_time_s:.3f}", file=sys.stderr)
    return 0 if report.passed else 1


if __name__ == "__main__":
    sys.exit(main())
