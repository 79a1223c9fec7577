"""Command line: ``advfuzz [run] --road urban2 --budget 200 --seed 1``, ``advfuzz report DIR``,
``advfuzz export DIR --kind fitness``.

Exit codes: 0 success, 1 usage, 2 I/O, 3 internal error.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys

from .campaign import EXPORT_KINDS, CampaignSettings, export_series, report, run_campaign, settings_from_file, \
    worker_count
from .ego import controller_names
from .errors import AdvFuzzError, InvalidGeometryError

EXIT_OK, EXIT_USAGE, EXIT_IO, EXIT_INTERNAL = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _positive_int(text: str) -> int:
    value = int(text)
    if value <= 0:
        raise argparse.ArgumentTypeError(f"must be a positive integer, got {text}")
    return value


def _positive_float(text: str) -> float:
    value = float(text)
    if not value > 0:
        raise argparse.ArgumentTypeError(f"must be positive, got {text}")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="advfuzz", description="Adversarial NPC scenario fuzzing campaigns.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    run = sub.add_parser("run", help="run a fuzzing campaign")
    run.add_argument("--config", help="JSON campaign config (flags override its values)")
    run.add_argument("--road", help="urban2, highway4 or custom:<file.json> (default urban2)")
    run.add_argument("--budget", type=_positive_int, help="number of scenarios to execute")
    run.add_argument("--hours", type=_positive_float, help="wall-clock budget in hours")
    run.add_argument("--seed", type=int, help="master seed (default 0)")
    run.add_argument("--ell", type=_positive_float, help="perception zone length: 20, 30, 40 or any positive value")
    run.add_argument("--tau", type=_positive_int, help="population size (default 20)")
    run.add_argument("--out", help="output directory (default ./campaign)")
    run.add_argument("--ego", choices=controller_names(), help="EGO controller (default baseline)")
    run.add_argument("-q", "--quiet", action="store_true", help="no per-scenario progress lines")

    rep = sub.add_parser("report", help="recompute the report of a campaign directory")
    rep.add_argument("dir")
    rep.add_argument("--clock", choices=("simulated", "wall"), default="simulated")

    exp = sub.add_parser("export", help="write plot-ready CSV series")
    exp.add_argument("dir")
    exp.add_argument("--kind", required=True, choices=EXPORT_KINDS)
    exp.add_argument("--out", help="directory for the CSV (default: the campaign directory)")
    return parser


def _settings(args) -> CampaignSettings:
    flags = dict(road=args.road, budget=args.budget, hours=args.hours, seed=args.seed, ell=args.ell,
                 tau=args.tau, out=args.out, ego=args.ego)
    try:
        if args.config:
            settings = settings_from_file(args.config, **flags)
        else:
            settings = CampaignSettings(**{k: v for k, v in flags.items() if v is not None})
        settings.workers = worker_count()
        settings.build_road()
    except (ValueError, InvalidGeometryError, TypeError) as exc:
        raise UsageError(str(exc)) from exc
    return settings


def _run(args) -> int:
    settings = _settings(args)

    def progress(record):
        if not args.quiet:
            kinds = ",".join(v.kind for v in record.violations) or "-"
            print(f"gen {record.meta['generation']:3d} #{record.meta['index']:03d}  "
                  f"{record.outcome:16s} {kinds}", flush=True)

    result = run_campaign(settings, progress)
    print(json.dumps(result.to_dict(), indent=2))
    return EXIT_OK


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    at = next((i for i, a in enumerate(argv) if a not in ("-v", "--verbose")), len(argv))
    if at == len(argv) or argv[at].startswith("-") and argv[at] not in ("-h", "--help"):
        argv.insert(at, "run")
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "run":
            return _run(args)
        if args.command == "report":
            print(json.dumps(report(args.dir, args.clock).to_dict(), indent=2))
            return EXIT_OK
        if args.command == "export":
            print(export_series(args.dir, args.kind, args.out))
            return EXIT_OK
        parser.print_usage(sys.stderr)
        return EXIT_USAGE
    except UsageError as exc:
        print(f"advfuzz: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (OSError, json.JSONDecodeError) as exc:
        print(f"advfuzz: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except AdvFuzzError as exc:
        print(f"advfuzz: internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    except Exception as exc:  # noqa: BLE001 - last-resort exit code contract
        logging.getLogger(__name__).exception("unexpected failure")
        print(f"advfuzz: internal error: {exc!r}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
