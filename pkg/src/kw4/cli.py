"""``kw4`` command line.

Exit codes: 0 when every trial passes, 1 when any trial fails, 2 on a
scenario parse or validation error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import __version__
from .errors import KW4Error
from .scenario import (
    Scenario,
    ScenarioError,
    dumps_report,
    format_text,
    load_scenario,
    parse_scenario,
    run_scenario,
)
from .structures import StructureKind, parse_signature

EXIT_OK, EXIT_FAIL, EXIT_INVALID = 0, 1, 2


def _floats(text: str) -> tuple[float, ...]:
    try:
        vals = tuple(float(x) for x in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None
    if len(vals) != 4:
        raise argparse.ArgumentTypeError("expected four values f1,f2,f3,f4")
    return vals


def _signature(text: str) -> tuple[int, int]:
    try:
        return parse_signature(text)
    except (ValueError, KW4Error) as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _nonneg_int(text: str) -> int:
    n = int(text)
    if n < 0:
        raise argparse.ArgumentTypeError("must be non-negative")
    return n


def _pos_int(text: str) -> int:
    n = int(text)
    if n < 1:
        raise argparse.ArgumentTypeError("must be positive")
    return n


def _tolerance(text: str) -> float:
    x = float(text)
    if x < 0:
        raise argparse.ArgumentTypeError("must be non-negative")
    return x


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="kw4", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"kw4 {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--report", type=Path, help="write the machine report (JSON) here")
        p.add_argument("--jobs", type=_pos_int, default=1, help="worker processes (default 1)")
        p.add_argument("--tolerance", type=_tolerance, help="override the pass threshold")

    p = sub.add_parser("run", help="run a scenario file")
    p.add_argument("scenario", type=Path)
    common(p)

    p = sub.add_parser("star-table", help="check the Hodge star table of the flat neutral model")
    p.add_argument("--flip-orientation", action="store_true", help="use the opposite orientation")
    common(p)

    p = sub.add_parser("example-3-2", help="warped neutral metric g(d2, d4) = exp(2f)")
    p.add_argument("--f", type=_floats, required=True, metavar="f1,f2,f3,f4")
    p.add_argument("--trials", type=_pos_int, default=1, help="extra random draws after the first")
    p.add_argument("--seed", type=_nonneg_int, default=0)
    common(p)

    p = sub.add_parser("verify", help="randomized existence sweep")
    p.add_argument("--kind", choices=[k.value for k in StructureKind], default="para")
    p.add_argument("--signature", type=_signature, default=(2, 2))
    p.add_argument("--scalars", choices=["real", "complex"], default="real")
    p.add_argument("--trials", type=_pos_int, default=100)
    p.add_argument("--seed", type=_nonneg_int, default=0)
    common(p)
    return parser


def _scenario_from_args(args) -> Scenario:
    if args.command == "run":
        return load_scenario(args.scenario)
    raw: dict = {"mode": args.command}
    if args.command == "star-table":
        raw["flip_orientation"] = args.flip_orientation
    elif args.command == "example-3-2":
        raw.update(f=list(args.f), trials=args.trials, seed=args.seed)
    else:
        raw.update(
            kind=args.kind,
            signature=list(args.signature),
            scalars=args.scalars,
            trials=args.trials,
            seed=args.seed,
        )
    return parse_scenario(json.dumps(raw, indent=1))


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        sc = _scenario_from_args(args)
    except ScenarioError as exc:
        where = args.scenario if args.command == "run" else "<arguments>"
        print(f"kw4: {where}: {exc}", file=sys.stderr)
        return EXIT_INVALID
    if args.tolerance is not None:
        sc.tolerance = args.tolerance
    report = run_scenario(sc, jobs=args.jobs)
    print(format_text(report))
    if args.report is not None:
        args.report.write_text(dumps_report(report), encoding="utf-8")
    return EXIT_OK if report["summary"]["all_pass"] else EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
