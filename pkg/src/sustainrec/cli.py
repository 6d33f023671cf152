"""Command-line driver.

Every subcommand accepts ``--config FILE`` (``key = value`` lines) plus one
flag per configuration field; flags override the file, which overrides the
defaults. Subcommands run their upstream stages as needed, reusing cached
artifacts in the output directory.
"""

from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import fields

from . import corpus, synthetic
from .pipeline import STAGES, RunConfig, StageError, coerce, parse_config_text, run_pipeline

_log = logging.getLogger("sustainrec")

SUBCOMMANDS = {
    "ingest": "ingest",
    "topics": "topics",
    "train-sustain": "train-sustain",
    "recommend": "recommend",
    "evaluate": "evaluate",
    "run-all": "evaluate",
}


def _add_config_flags(parser):
    parser.add_argument("--config", help="key = value configuration file")
    for f in fields(RunConfig):
        flag = "--" + f.name.replace("_", "-")
        parser.add_argument(flag, dest=f.name, default=None, metavar="BOOL" if f.type == "bool"
                            else f.type.upper(), help=f"default: {f.default}")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sustainrec", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True)
    for name in SUBCOMMANDS:
        _add_config_flags(sub.add_parser(name, help=f"run the pipeline up to {SUBCOMMANDS[name]}"))
    synth = sub.add_parser("synth", help="write a synthetic post log for trying the pipeline")
    synth.add_argument("path")
    synth.add_argument("--users", type=int, default=60)
    synth.add_argument("--groups", type=int, default=6)
    synth.add_argument("--seed", type=int, default=0)
    return parser


def resolve_config(args) -> RunConfig:
    values = {}
    if args.config:
        with open(args.config, encoding="utf-8") as f:
            values.update(parse_config_text(f.read()))
    for f in fields(RunConfig):
        raw = getattr(args, f.name)
        if raw is not None:
            values[f.name] = coerce(f.name, raw)
    return RunConfig(**values)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    level = logging.WARNING - 10 * min(args.verbose, 2)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")

    if args.command == "synth":
        ds = synthetic.generate_posts(n_users=args.users, n_groups=args.groups, seed=args.seed)
        corpus.write_posts(ds, args.path)
        print(f"wrote {ds!r} to {args.path}")
        return 0

    try:
        config = resolve_config(args)
    except (ValueError, OSError) as exc:
        print(f"error [config]: {exc}", file=sys.stderr)
        return 2
    until = SUBCOMMANDS[args.command]
    assert until in STAGES
    try:
        pipe = run_pipeline(config, until)
    except StageError as exc:
        print(f"error [{exc.stage}]: {exc.cause}", file=sys.stderr)
        return 1
    if pipe.reports:
        print(pipe.out.joinpath("summary.txt").read_text(encoding="utf-8"), end="")
    else:
        print(f"{args.command}: done ({', '.join(pipe.executed) or 'all cached'})")
    return 0


if __name__ == "__main__":
    sys.exit(main())
