"""Command-line entry point: ``rceprecoding run`` and ``rceprecoding plot``."""

from __future__ import annotations

import argparse
import dataclasses
import logging
import sys
from pathlib import Path

from .experiment import AXES, PRECODERS, emit_csv, emit_plot, load_config, read_csv, run_experiment, write_manifest


def _run(args) -> int:
    config = load_config(args.config)
    changes = {}
    if args.seed is not None:
        changes["seed"] = args.seed
    if args.precoders:
        changes["precoders"] = tuple(p.strip() for p in args.precoders.split(",") if p.strip())
    if changes:
        config = dataclasses.replace(config, **changes)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    rows = run_experiment(config, threads=args.threads)
    csv_path = emit_csv(rows, out / "results.csv")
    write_manifest(config, out)
    print(csv_path)
    return 0


def _plot(args) -> int:
    rows = read_csv(args.input)
    print(emit_plot(rows, args.axis, args.out, db=args.db))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rceprecoding", description=__doc__)
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a Monte-Carlo sweep and write results.csv + manifest.json")
    run.add_argument("--config", required=True, help="INI experiment file")
    run.add_argument("--out", required=True, help="output directory")
    run.add_argument("--seed", type=int, help="override the master seed")
    run.add_argument("--precoders", help=f"comma-separated subset of {','.join(PRECODERS)}")
    run.add_argument("--threads", type=int, default=1, help="worker threads over channel realizations")
    run.set_defaults(func=_run)

    plot = sub.add_parser("plot", help="plot BER against a power axis from a results CSV")
    plot.add_argument("--in", dest="input", required=True, help="results CSV")
    plot.add_argument("--axis", choices=sorted(AXES), default="available")
    plot.add_argument("--out", required=True, help="output figure (.svg recommended)")
    plot.add_argument("--db", action="store_true", help="power axis in dB")
    plot.set_defaults(func=_plot)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    level = logging.WARNING - 10 * min(args.verbose, 2)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
