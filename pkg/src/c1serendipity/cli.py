"""Command line front end: ``study``, ``verify`` and ``dump-element``.

Exit status is 0 on success, 1 when a verification check or a solve fails,
and 2 for usage errors (bad ranges, unsupported degrees, unwritable paths).
"""

from __future__ import annotations

import argparse
import logging
import sys

from .mesh import MAX_GRID_LEVEL
from .ref_element import (
    BFS,
    MAX_ELEMENT_DEGREE,
    MIN_BFS_DEGREE,
    MIN_SERENDIPITY_DEGREE,
    SERENDIPITY,
    UnisolvenceError,
    build_element,
    dump_element,
)
from .study import emit_report, run_study, verify

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2
MIN_DEGREE = {BFS: MIN_BFS_DEGREE, SERENDIPITY: MIN_SERENDIPITY_DEGREE}


def parse_range(text: str) -> range:
    """``"3..5"`` -> ``range(3, 6)``; a single integer is a one-element range."""
    lo, sep, hi = text.partition("..")
    try:
        a = int(lo)
        b = int(hi) if sep else a
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected A..B with integers, got {text!r}") from None
    if b < a:
        raise argparse.ArgumentTypeError(f"empty range {text!r}")
    return range(a, b + 1)


def _check_degree(parser, flavor: str, k: int):
    lo = MIN_DEGREE[flavor]
    if not lo <= k <= MAX_ELEMENT_DEGREE:
        parser.error(f"{flavor} elements need {lo} <= degree <= {MAX_ELEMENT_DEGREE}, got {k}")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="c1fem",
        description="C1 BFS and serendipity elements for the clamped biharmonic problem.",
    )
    p.add_argument("-v", "--verbose", action="store_true", help="log per-grid progress to stderr")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("study", help="convergence study on the halving grid sequence")
    s.add_argument("--element", choices=[BFS, SERENDIPITY], required=True)
    s.add_argument("--degree", type=int, required=True)
    s.add_argument("--grids", type=parse_range, required=True, help="grid levels, e.g. 1..5")
    s.add_argument("--quad", type=int, default=None, help="Gauss points per direction (default k+2)")
    s.add_argument("--solver", choices=["cholesky", "pcg"], default="cholesky")
    s.add_argument("--format", choices=["table", "csv", "json"], default="table")
    s.add_argument("--out", default=None, help="output file (default stdout)")

    v = sub.add_parser("verify", help="element certificates: unisolvence, duality, C1 audit")
    v.add_argument("--degrees", type=parse_range, required=True)
    v.add_argument("--element", choices=[BFS, SERENDIPITY], default=None,
                   help="restrict to one flavor (default both)")
    v.add_argument("--seed", type=int, default=0)

    d = sub.add_parser("dump-element", help="export shape-function coefficients")
    d.add_argument("--element", choices=[BFS, SERENDIPITY], required=True)
    d.add_argument("--degree", type=int, required=True)
    d.add_argument("--out", required=True)
    return p


def _study(args, parser) -> int:
    _check_degree(parser, args.element, args.degree)
    if args.grids.start < 1 or args.grids.stop - 1 > MAX_GRID_LEVEL:
        parser.error(f"grid levels must lie in 1..{MAX_GRID_LEVEL}")
    if args.quad is not None and args.quad < args.degree + 1:
        parser.error(f"--quad must be at least degree + 1 = {args.degree + 1}")
    report = run_study(args.element, args.degree, args.grids, args.quad, args.solver)
    try:
        emit_report(report, args.format, args.out)
    except OSError as exc:
        print(f"error: cannot write report: {exc}", file=sys.stderr)
        return EXIT_USAGE
    return EXIT_FAIL if any(r.error for r in report.rows) else EXIT_OK


def _verify(args, parser) -> int:
    flavors = (args.element,) if args.element else (BFS, SERENDIPITY)
    lo = min(MIN_DEGREE[fl] for fl in flavors)
    if args.degrees.start < lo or args.degrees.stop - 1 > MAX_ELEMENT_DEGREE:
        parser.error(f"degrees must lie in {lo}..{MAX_ELEMENT_DEGREE}")
    checks = verify(args.degrees, flavors, seed=args.seed)
    for c in checks:
        print(c.line())
    failed = sum(not c.passed for c in checks)
    print(f"{len(checks) - failed}/{len(checks)} checks passed")
    return EXIT_FAIL if failed else EXIT_OK


def _dump(args, parser) -> int:
    _check_degree(parser, args.element, args.degree)
    try:
        element = build_element(args.degree, args.element)
    except UnisolvenceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL
    try:
        dump_element(element, args.out)
    except OSError as exc:
        print(f"error: cannot write {args.out}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse exits with 2 on usage errors, 0 on --help
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    handler = {"study": _study, "verify": _verify, "dump-element": _dump}[args.command]
    try:
        return handler(args, parser)
    except SystemExit as exc:
        return int(exc.code or 0)


if __name__ == "__main__":
    sys.exit(main())
