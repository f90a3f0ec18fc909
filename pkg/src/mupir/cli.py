"""``mupir`` command line: simulate, audit, curve and verify-all.

Exit codes: 0 success, 1 invalid configuration, 2 verification failure.
"""
from __future__ import annotations

import argparse
import csv
import io
import os
import sys
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import bounds, verify
from .audit import StrawmanScheme, audit_privacy
from .cia import Cia1Scheme, Cia2Scheme
from .distinct import dd_corner1, dd_corner2
from .errors import DecodeFailure, MupirError
from .product import NaiveScheme, ProductDesign
from .sjpir import SjScheme
from .system import MessageLibrary, Scheme, parse_frac, run_transcript

EXIT_OK, EXIT_CONFIG, EXIT_FAIL = 0, 1, 2
SCHEMES = ("cia1", "cia2", "dd1", "dd2", "sj", "pd", "naive", "share", "strawman")
CURVE_SETS = ("fig2a", "fig2b", "fig3")


class ConfigError(Exception):
    pass


def default_seed() -> int:
    raw = os.environ.get("MUPIR_SEED", "0")
    try:
        return int(raw)
    except ValueError:
        raise ConfigError(f"MUPIR_SEED must be an integer, got {raw!r}") from None


def build_scheme(args: argparse.Namespace) -> Scheme:
    name = args.scheme
    N = args.N if args.N is not None else 2
    if name == "cia1":
        return Cia1Scheme(N)
    if name == "cia2":
        return Cia2Scheme(N)
    if name == "dd1":
        return dd_corner1()
    if name == "dd2":
        return dd_corner2()
    K = args.K if args.K is not None else 2
    Ku = args.Ku if args.Ku is not None else 2
    if name == "sj":
        return SjScheme(K, N)
    if name == "pd":
        if args.t is None:
            raise ConfigError("pd needs --t")
        return ProductDesign(K, Ku, N, args.t)
    if name == "naive":
        if args.L is None:
            raise ConfigError("naive needs --L")
        return NaiveScheme(K, Ku, N, args.L, parse_frac(args.M or "0"))
    if name == "share":
        lam = parse_frac(args.lam if args.lam is not None else "1/2")
        return bounds.memory_share(Cia1Scheme(N), Cia2Scheme(N), lam)
    if name == "strawman":
        return StrawmanScheme(K, Ku, N)
    raise ConfigError(f"unknown scheme {name!r}")


def _theta(raw: str) -> tuple[int, ...]:
    try:
        return tuple(int(x) for x in raw.split(","))
    except ValueError:
        raise ConfigError(f"demand must be comma-separated integers, got {raw!r}") from None


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text, encoding="utf-8", newline="\n")
    else:
        sys.stdout.write(text)


def cmd_simulate(args) -> int:
    scheme = build_scheme(args)
    theta = scheme.check_demand(_theta(args.theta))
    seed = args.seed if args.seed is not None else default_seed()
    library = MessageLibrary.random(scheme.params.K, scheme.params.L, np.random.default_rng([seed, 0]))
    try:
        transcript = run_transcript(scheme, library, theta, seed)
    except DecodeFailure as e:
        print(f"error: DecodeFailure: {e}", file=sys.stderr)
        return EXIT_FAIL
    _emit(transcript.dumps(), args.out)
    if not transcript.correct:
        print(f"error: decoded messages differ from the library for demand {theta}", file=sys.stderr)
        return EXIT_FAIL
    return EXIT_OK


def cmd_audit(args) -> int:
    scheme = build_scheme(args)
    seed = args.seed if args.seed is not None else default_seed()
    demands = None
    if args.theta_set:
        demands = [_theta(x) for x in args.theta_set.split(";")]
    report = audit_privacy(scheme, args.db, demands, mode=args.mode, seed=seed, samples=args.samples,
                           threshold=args.threshold)
    _emit(report.dumps(), args.out)
    return EXIT_OK if report.passed else EXIT_FAIL


def curve_rows(name: str, points: int, lo=None, hi=None) -> list[tuple[Fraction, Fraction, str]]:
    """(M, R, label) rows of one curve set, ordered by label then M."""
    if name in ("fig2a", "fig2b"):
        N = 2 if name == "fig2a" else 3
        top = Fraction(2)
        extra = [Fraction(N - 1, 2 * N), Fraction(2 * (N - 1), 2 * N - 1), Fraction(1, 3), Fraction(2, 3)]
        curves = [
            ("cia", lambda M: bounds.cia_load(M, N)),
            ("uncoded_optimal", lambda M: bounds.uncoded_optimal_load(M, N)),
            ("distinct_optimal", bounds.distinct_optimal_load),
            ("pir_bound", lambda M: bounds.single_user_pir_bound(2, N, M)),
        ]
    elif name == "fig3":
        top = Fraction(6)
        extra = bounds.pd_curve(6, 6, 2).breakpoints() + bounds.yu_curve_6x6().breakpoints()
        curves = [
            ("pd", lambda M: bounds.pd_load(6, 6, 2, M)),
            ("yu_bound", bounds.yu_bound_6x6),
        ]
    else:
        raise ConfigError(f"unknown curve set {name!r}; choose from {', '.join(CURVE_SETS)}")
    lo = Fraction(0) if lo is None else parse_frac(lo)
    hi = top if hi is None else parse_frac(hi)
    if points < 1 or lo > hi or lo < 0 or hi > top:
        raise ConfigError(f"empty or invalid grid: points={points}, range=[{lo}, {hi}] within [0, {top}]")
    grid = bounds.grid(lo, hi, points, extra)
    return [(M, f(M), label) for label, f in curves for M in grid]


def _sig(x: Fraction) -> str:
    return f"{float(x):.12g}"


def cmd_curve(args) -> int:
    rows = curve_rows(args.set, args.points, args.m_min, args.m_max)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["M", "R", "label"])
    for M, R, label in rows:
        writer.writerow([_sig(M), _sig(R), label])
    _emit(buf.getvalue(), args.out)
    return EXIT_OK


def cmd_verify_all(args) -> int:
    seed = args.seed if args.seed is not None else default_seed()
    only = None
    if args.only:
        try:
            only = [int(x) for x in args.only.split(",")]
        except ValueError:
            raise ConfigError(f"--only takes comma-separated criterion numbers, got {args.only!r}") from None
        unknown = set(only) - {n for n, _, _ in verify.CHECKS}
        if unknown:
            raise ConfigError(f"unknown criteria {sorted(unknown)}")
    results = verify.run_all(seed, only)
    for line in verify.matrix_lines(results):
        print(line)
    report = verify.report_json(results, seed)
    if args.out:
        Path(args.out).write_text(report, encoding="utf-8", newline="\n")
    ok = all(t.passed for t in results)
    print(f"{sum(t.passed for t in results)}/{len(results)} criteria passed")
    return EXIT_OK if ok else EXIT_FAIL


def _scheme_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--scheme", required=True, choices=SCHEMES)
    p.add_argument("--K", type=int)
    p.add_argument("--Ku", type=int)
    p.add_argument("--N", type=int)
    p.add_argument("--t", type=int, help="product-design memory index")
    p.add_argument("--L", type=int, help="message length (naive scheme)")
    p.add_argument("--M", help="cache size as a fraction, e.g. 1/2 (naive scheme)")
    p.add_argument("--lam", help="memory-sharing weight of corner 1 (share scheme)")
    p.add_argument("--seed", type=int, help="defaults to $MUPIR_SEED or 0")
    p.add_argument("--out", help="output file (stdout if omitted)")


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mupir", description="Multi-user cache-aided PIR simulator and auditor")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="run one protocol instance and write its transcript")
    _scheme_flags(p)
    p.add_argument("--theta", required=True, help="demand vector, e.g. 1,2")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("audit", help="audit per-database query privacy")
    _scheme_flags(p)
    p.add_argument("--db", type=int, default=1)
    p.add_argument("--mode", choices=("exhaustive", "sampled"), default="exhaustive")
    p.add_argument("--samples", type=int, default=100_000)
    p.add_argument("--threshold", type=float, default=0.02)
    p.add_argument("--theta-set", help="restrict to demands, e.g. '1,2;2,1'")
    p.set_defaults(func=cmd_audit)

    p = sub.add_parser("curve", help="write memory-load curves as CSV")
    p.add_argument("--set", required=True, choices=CURVE_SETS)
    p.add_argument("--points", type=int, default=201)
    p.add_argument("--m-min")
    p.add_argument("--m-max")
    p.add_argument("--out")
    p.set_defaults(func=cmd_curve)

    p = sub.add_parser("verify-all", help="run the acceptance suite")
    p.add_argument("--seed", type=int)
    p.add_argument("--only", help="comma-separated criterion numbers")
    p.add_argument("--out", help="report JSON path")
    p.set_defaults(func=cmd_verify_all)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = make_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_OK if e.code == 0 else EXIT_CONFIG
    try:
        return args.func(args)
    except (ConfigError, MupirError, ValueError, ZeroDivisionError) as e:
        print(f"error: {type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
