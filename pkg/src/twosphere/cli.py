"""Command-line interface: ``twosphere {sequences,field,coeffs,verify,sweep}``.

Exit codes: 0 success, 2 invalid input, 3 a ``verify`` check failed.
"""

import argparse
import math
import os
import sys
from dataclasses import dataclass

import numpy as np

from . import _io
from .analysis import CSV_COLUMNS, blowup_sweep
from .background import parse_polynomial
from .coefficients import coefficient_report
from .errors import TwoSphereError
from .geometry import config_from_delta
from .sequences import build_sequence
from .singular import evaluate_batch
from .verify import run_checks, format_table

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_CHECK_FAILED = 3


class UsageError(ValueError):
    pass


@dataclass(frozen=True)
class RunConfig:
    subcommand: str
    delta: float = None
    background: str = "x"
    tol: float = 1e-10
    order: int = 64
    out: str = None
    fmt: str = "text"
    threads: int = None

    @property
    def eps(self):
        return None if self.delta is None else 2.0 * self.delta


def _resolve_delta(args):
    delta = getattr(args, "delta", None)
    eps = getattr(args, "eps", None)
    if (delta is None) == (eps is None):
        raise UsageError("give exactly one of --delta or --eps")
    if eps is not None:
        delta = eps / 2.0
    if not (delta > 0 and math.isfinite(delta)):
        raise UsageError(f"the gap must be positive, got delta={delta}")
    return delta


def _check_tol(tol):
    if not (0.0 < tol <= 1e-2):
        raise UsageError(f"--tol must lie in (0, 1e-2], got {tol}")
    return tol


def _add_gap_flags(p):
    g = p.add_mutually_exclusive_group()
    g.add_argument("--delta", type=float, help="half-gap in the unit-radius frame")
    g.add_argument("--eps", type=float, help="gap in the unit-radius frame (eps = 2 delta)")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="twosphere",
        description="Field concentration between two nearly touching conducting spheres.",
    )
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p = sub.add_parser("sequences", help="dump image positions and weights as CSV")
    _add_gap_flags(p)
    p.add_argument("--tol", type=float, default=1e-10)
    p.add_argument("--out", help="output file (default: stdout)")

    p = sub.add_parser("field", help="evaluate h and grad v at points, CSV output")
    _add_gap_flags(p)
    p.add_argument("--points", required=True,
                   help="file with x,y,z rows, or a grid spec 'x0:x1:nx,y0:y1:ny,z0:z1:nz'")
    p.add_argument("--tol", type=float, default=1e-10)
    p.add_argument("--out")

    p = sub.add_parser("coeffs", help="blow-up coefficients as JSON")
    _add_gap_flags(p)
    p.add_argument("--background", default="x")
    p.add_argument("--tol", type=float, default=1e-10)
    p.add_argument("--n-max", type=int, default=10**6)
    p.add_argument("--out")

    p = sub.add_parser("verify", help="flux and identity checks with a pass/fail table")
    _add_gap_flags(p)
    p.add_argument("--background", default="x")
    p.add_argument("--tol", type=float, default=1e-12)
    p.add_argument("--order", type=int, default=64)
    p.add_argument("--format", dest="fmt", choices=("text", "json"), default="text")
    p.add_argument("--out")

    p = sub.add_parser("sweep", help="blow-up experiments over a list of gaps")
    p.add_argument("--background", default="x")
    p.add_argument("--eps-list", required=True, help="comma separated, e.g. 1e-3,1e-4")
    p.add_argument("--tol", type=float, default=1e-10)
    p.add_argument("--radial", type=int, default=5, help="radial levels in the gap grid")
    p.add_argument("--azimuthal", type=int, default=8, help="angles per radial level")
    p.add_argument("--out", help="JSON report path")
    p.add_argument("--csv", help="CSV report path")
    p.add_argument("--dat", help="two-column eps/product file (default: eps_vs_product.dat "
                                 "next to --out or --csv)")

    for p in sub.choices.values():
        p.add_argument("--threads", type=int, default=None)
    return parser


def _emit(text, path):
    if path:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _parse_axis(spec):
    parts = spec.split(":")
    if len(parts) == 1:
        return np.array([float(parts[0])])
    if len(parts) == 3:
        a, b, n = float(parts[0]), float(parts[1]), int(parts[2])
        if n < 1:
            raise UsageError(f"grid count must be positive in {spec!r}")
        return np.linspace(a, b, n)
    raise UsageError(f"bad grid axis {spec!r}; expected 'a:b:n' or a single value")


def load_points(spec):
    """Points from a file (comma or whitespace separated) or a grid spec."""
    if os.path.exists(spec):
        rows = []
        with open(spec, encoding="utf-8") as fh:
            for line in fh:
                line = line.split("#", 1)[0].strip()
                if not line:
                    continue
                fields = line.replace(",", " ").split()
                try:
                    rows.append([float(v) for v in fields])
                except ValueError:
                    if rows:
                        raise UsageError(f"non-numeric row in {spec}: {line!r}") from None
                    continue  # header
        pts = np.array(rows, dtype=float)
        if pts.ndim != 2 or pts.shape[1] != 3:
            raise UsageError(f"{spec} must contain rows of three numbers")
        return pts
    axes = spec.split(",")
    if len(axes) != 3:
        raise UsageError(f"--points {spec!r} is neither a file nor a 3-axis grid spec")
    try:
        gx, gy, gz = (_parse_axis(a) for a in axes)
    except ValueError as exc:
        raise UsageError(f"bad grid spec {spec!r}: {exc}") from None
    X, Y, Z = np.meshgrid(gx, gy, gz, indexing="ij")
    return np.stack([X.ravel(), Y.ravel(), Z.ravel()], axis=1)


def cmd_sequences(args):
    delta = _resolve_delta(args)
    seq = build_sequence(delta, _check_tol(args.tol))
    rows = zip(range(seq.M + 1), seq.p_n, seq.q_n, seq.mu_n)
    _emit(_io.csv_text(("n", "p_n", "q_n", "mu_n"), rows), args.out)
    return EXIT_OK


def cmd_field(args):
    delta = _resolve_delta(args)
    config = config_from_delta(delta)
    seq = build_sequence(delta, _check_tol(args.tol))
    pts = load_points(args.points)
    b = evaluate_batch(config, seq, pts)
    rows = (
        (p[0], p[1], p[2], h, g[0], g[1], g[2], e)
        for p, h, g, e in zip(b.points, b.h, b.grad_v, b.trunc_err)
    )
    header = ("x", "y", "z", "h", "vx", "vy", "vz", "trunc_err")
    _emit(_io.csv_text(header, rows), args.out)
    return EXIT_OK


def cmd_coeffs(args):
    H = parse_polynomial(args.background)
    delta = _resolve_delta(args)
    seq = build_sequence(delta, _check_tol(args.tol))
    rep = coefficient_report(seq, H, args.n_max)
    _emit(_io.dumps_json(rep.as_dict()), args.out)
    return EXIT_OK


def cmd_verify(args):
    H = parse_polynomial(args.background)
    delta = _resolve_delta(args)
    checks = run_checks(delta, H, tol=_check_tol(args.tol), order=args.order)
    if args.fmt == "json":
        text = _io.dumps_json({
            "delta": delta,
            "background": str(H),
            "checks": [c.as_dict() for c in checks],
            "passed": all(c.passed for c in checks),
        })
    else:
        text = format_table(checks)
    _emit(text, args.out)
    return EXIT_OK if all(c.passed for c in checks) else EXIT_CHECK_FAILED


def _parse_eps_list(text):
    try:
        vals = [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise UsageError(f"bad --eps-list {text!r}") from None
    if not vals:
        raise UsageError("--eps-list is empty")
    return vals


def cmd_sweep(args):
    H = parse_polynomial(args.background)
    eps_list = _parse_eps_list(args.eps_list)
    report = blowup_sweep(
        H, eps_list, tol=_check_tol(args.tol), n_radial=args.radial,
        n_azimuth=args.azimuthal, threads=args.threads,
    )
    json_text = _io.dumps_json(report.as_dict())
    rows = [[getattr(r, c) for c in CSV_COLUMNS] for r in report.records]
    csv_text = _io.csv_text(CSV_COLUMNS, rows)
    dat_lines = ["# eps blowup_product"] + [
        f"{_io.fmt(r.eps)} {_io.fmt(r.blowup_product)}" for r in report.records
    ]
    dat_text = "\n".join(dat_lines) + "\n"

    if args.out:
        _emit(json_text, args.out)
    if args.csv:
        _emit(csv_text, args.csv)
    if not args.out and not args.csv:
        _emit(json_text, None)
    dat_path = args.dat
    if dat_path is None:
        anchor = args.out or args.csv
        base = os.path.dirname(os.path.abspath(anchor)) if anchor else os.getcwd()
        dat_path = os.path.join(base, "eps_vs_product.dat")
    _emit(dat_text, dat_path)
    return EXIT_OK


COMMANDS = {
    "sequences": cmd_sequences,
    "field": cmd_field,
    "coeffs": cmd_coeffs,
    "verify": cmd_verify,
    "sweep": cmd_sweep,
}


def run(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_OK
    if args.threads is not None and args.threads < 1:
        print("UsageError: --threads must be positive", file=sys.stderr)
        return EXIT_INVALID
    try:
        return COMMANDS[args.subcommand](args)
    except (TwoSphereError, UsageError, ValueError) as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INVALID


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
