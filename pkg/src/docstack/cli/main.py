"""``docstack`` entry point."""
from __future__ import annotations

import argparse
import logging
import sys

from ..kvconfig import ConfigError
from .config import PipelineConfig, help_text
from .pipeline import REGIONS, STAGES, Pipeline, StageError


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="docstack",
        description="Region-based document classification with transfer learning and stacked generalisation.",
        epilog="configuration keys (key = default, description):\n" + help_text(),
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    parser.add_argument("--config", help="key=value configuration file")
    parser.add_argument("--seed", type=int, help="master seed (overrides the config)")
    parser.add_argument("--out", default="run", help="run directory (default: run)")
    parser.add_argument("--set", action="append", default=[], metavar="KEY=VALUE", help="override one config key")
    parser.add_argument("--force", action="store_true", help="rerun stages even when up to date")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    for stage in STAGES + ("run-all",):
        sp = sub.add_parser(stage)
        if stage == "train-region":
            sp.add_argument("name", choices=REGIONS)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(asctime)s %(name)s %(message)s")
    try:
        cfg = PipelineConfig.load(args.config, args.set, args.seed)
    except (ConfigError, OSError) as exc:
        print(f"docstack: config error: {exc}", file=sys.stderr)
        return 2
    pipe = Pipeline(cfg, args.out)
    try:
        if args.command == "run-all":
            pipe.run_all(force=args.force)
        else:
            pipe.run(args.command, getattr(args, "name", None), force=args.force)
    except StageError as exc:
        print(f"docstack: {exc}", file=sys.stderr)
        return 1
    for label, secs in pipe.timings.items():
        print(f"{label}: {secs:.1f}s")
    return 0


if __name__ == "__main__":
    sys.exit(main())
