"""``ak-scan``: sweeps, point reports, invariant checks and extremum search.

Exit codes: 0 success, 1 invariant failure or I/O error, 2 usage error,
3 numeric failure.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
import time

from . import scan
from .errors import InvalidArgument, NumericFailure

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_NUMERIC = 0, 1, 2, 3


def angle(text: str) -> float:
    """Parses radians, or a multiple of pi written ``pi:0.25``."""
    text = text.strip()
    try:
        if text.startswith("pi:"):
            return float(text[3:]) * math.pi
        return float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an angle: {text!r}") from None


def _grid_args(parser, r_steps=201, theta_steps=181):
    g = parser.add_argument_group("grid")
    g.add_argument("--r-min", type=float, default=-5.0)
    g.add_argument("--r-max", type=float, default=5.0)
    g.add_argument("--r-steps", type=int, default=r_steps)
    g.add_argument("--theta-min", type=angle, default=0.0)
    g.add_argument("--theta-max", type=angle, default=2 * math.pi)
    g.add_argument("--theta-steps", type=int, default=theta_steps)


def _grid(args) -> scan.SweepGrid:
    return scan.SweepGrid(
        args.r_min, args.r_max, args.r_steps, args.theta_min, args.theta_max, args.theta_steps
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ak-scan",
        description="Entanglement of the three-mode Arthurs-Kelly Gaussian state over (r, theta).",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sweep", help="evaluate every grid point and write CSV or JSON")
    _grid_args(p)
    p.add_argument("--out", help="output file (default: stdout)")
    p.add_argument("--format", choices=("csv", "json"), default="csv")

    p = sub.add_parser("point", help="full report at one (r, theta)")
    p.add_argument("--r", type=float, default=0.0)
    p.add_argument("--theta", type=angle, default=0.0)
    p.add_argument("--q", type=float, default=0.0)
    p.add_argument("--p", type=float, default=0.0)
    p.add_argument("--format", choices=("csv", "json"), default="json")

    p = sub.add_parser("verify", help="run the invariant battery")
    _grid_args(p, r_steps=41, theta_steps=37)
    p.add_argument("--tol", type=float, default=1e-9)
    p.add_argument("--inject-fault", choices=scan.FAULTS, help=argparse.SUPPRESS)

    p = sub.add_parser("extremize", help="grid scan plus golden-section refinement")
    _grid_args(p, r_steps=scan.EXTREMIZE_GRID.r_steps, theta_steps=scan.EXTREMIZE_GRID.theta_steps)
    p.add_argument("--quantity", required=True,
                   choices=[f for f in scan.NUMERIC_FIELDS if f not in ("r", "theta")])
    p.add_argument("--mode", choices=("max", "min"), default="max")
    p.add_argument("--r", type=float, help="pin r and search theta only")
    p.add_argument("--theta", type=angle, help="pin theta and search r only")
    return parser


def _cmd_sweep(args) -> int:
    t0 = time.perf_counter()
    rows = scan.sweep(_grid(args))
    text = scan.rows_to_csv(rows) if args.format == "csv" else scan.rows_to_json(rows)
    if args.out:
        try:
            with open(args.out, "w", newline="") as fh:
                fh.write(text)
        except OSError as exc:
            print(f"ak-scan: cannot write {args.out}: {exc}", file=sys.stderr)
            return EXIT_FAIL
    else:
        sys.stdout.write(text)
    occupancy = ", ".join(f"{k}={v}" for k, v in sorted(scan.branch_occupancy(rows).items()))
    print(f"{len(rows)} rows in {time.perf_counter() - t0:.1f}s; g branches: {occupancy}",
          file=sys.stderr)
    return EXIT_OK


def _cmd_point(args) -> int:
    if args.format == "csv":
        sys.stdout.write(scan.rows_to_csv([scan.evaluate_point(args.r, args.theta, args.q, args.p)]))
    else:
        print(json.dumps(scan.point_report(args.r, args.theta, args.q, args.p), indent=2))
    return EXIT_OK


def _cmd_verify(args) -> int:
    checks = scan.verify(args.tol, _grid(args), fault=args.inject_fault)
    for c in checks:
        status = "PASS" if c.passed else "FAIL"
        r, t = c.where
        print(f"{status} {c.name:<24} worst={c.worst:.3e} at r={r:.4f} theta={t:.4f}"
              + ("" if c.passed else f" ({c.failures} points over tol={args.tol:g})"))
    failed = [c.name for c in checks if not c.passed]
    if failed:
        print(f"ak-scan: invariant failure: {', '.join(failed)}", file=sys.stderr)
        return EXIT_FAIL
    return EXIT_OK


def _cmd_extremize(args) -> int:
    t0 = time.perf_counter()
    ext = scan.extremize(args.quantity, args.mode, _grid(args), fixed_r=args.r, fixed_theta=args.theta)
    print(f"{ext.mode} {ext.quantity} = {ext.value:.12g} at r={ext.r:.10g} theta={ext.theta:.10g} "
          f"({time.perf_counter() - t0:.1f}s)")
    return EXIT_OK


COMMANDS = {
    "sweep": _cmd_sweep,
    "point": _cmd_point,
    "verify": _cmd_verify,
    "extremize": _cmd_extremize,
}


def run(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except NumericFailure as exc:
        print(f"ak-scan: numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (InvalidArgument, ValueError) as exc:
        print(f"ak-scan: {exc}", file=sys.stderr)
        return EXIT_USAGE


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
