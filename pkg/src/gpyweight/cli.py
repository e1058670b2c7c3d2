"""Command-line front end.

Exit codes: 0 success, 1 usage error, 2 invariant violation or failed computation.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from typing import Any, Optional, Sequence

from . import bounds, extremal, quasipoly, rayleigh, series, spectral
from .specfun import first_zero, zeros

EXIT_OK, EXIT_USAGE, EXIT_INVARIANT = 0, 1, 2
ROUTE_TOL = 1e-4


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _fmt(x) -> str:
    if isinstance(x, float):
        return format(x, ".15g")
    if isinstance(x, Fraction):
        return format(float(x), ".15g")
    return str(x)


def _round15(obj):
    """Round every float to 15 significant digits, recursively."""
    if isinstance(obj, float):
        return float(format(obj, ".15g")) if math.isfinite(obj) else obj
    if isinstance(obj, dict):
        return {k: _round15(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_round15(v) for v in obj]
    return obj


def _dump_json(obj) -> str:
    return json.dumps(_round15(obj), indent=2, sort_keys=False)


def _table(pairs: Sequence[tuple[str, Any]]) -> str:
    width = max(len(k) for k, _ in pairs)
    return "\n".join(f"{k:<{width}}  {_fmt(v)}" for k, v in pairs)


# ---------------------------------------------------------------- sk

@dataclass
class Report:
    k: int
    alpha: float
    S_closed_form: float
    bounds: dict
    best_monomial: dict
    S_nystrom: Optional[float] = None
    S_nystrom_extrapolated: Optional[float] = None
    quasipoly: Optional[dict] = None
    notes: list = field(default_factory=list)
    violations: list = field(default_factory=list)
    timing: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {k: v for k, v in asdict(self).items() if v is not None}


def build_report(k: int, nystrom: Optional[int] = None, c1: Optional[Fraction] = None) -> Report:
    timing = {}
    t0 = time.perf_counter()
    alpha = first_zero(k - 2).value
    S = extremal.S_of_k(k)
    timing["closed_form"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    br = bounds.bound_report(k)
    bdict = {"product_bound": br.product_bound, "trivial_bound": br.trivial_bound}
    if br.refined_bound is not None:
        bdict["refined_bound"] = br.refined_bound
    if br.cnorm_bound is not None:
        bdict["cnorm_bound"] = br.cnorm_bound
    timing["bounds"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    ell, ratio = rayleigh.best_monomial(k)
    timing["monomial"] = time.perf_counter() - t0

    rep = Report(
        k=k, alpha=alpha, S_closed_form=S, bounds=bdict,
        best_monomial={"ell": ell, "ratio": float(ratio)}, notes=list(br.notes), timing=timing,
    )
    v = rep.violations
    if not float(ratio) <= S:
        v.append("best monomial ratio exceeds S(k)")
    if not S < br.product_bound:
        v.append("S(k) not below the product bound")
    if br.refined_bound is not None and not S < br.refined_bound:
        v.append("S(k) not below the refined bound")
    if br.cnorm_bound is not None and not S <= br.cnorm_bound:
        v.append("S(k) exceeds the operator-norm bound")
    if not S < br.trivial_bound:
        v.append("S(k) not below 4/k")

    if nystrom is not None:
        t0 = time.perf_counter()
        rep.S_nystrom = spectral.nystrom_lambda1(k, nystrom).lambda1
        sizes = (nystrom // 4, nystrom // 2, nystrom)
        if sizes[0] >= 50 and nystrom % 4 == 0:
            rep.S_nystrom_extrapolated = spectral.nystrom_extrapolated(k, sizes).value
            best = rep.S_nystrom_extrapolated
        else:
            rep.notes.append("extrapolation needs N divisible by 4 with N/4 >= 50")
            best = rep.S_nystrom
        timing["nystrom"] = time.perf_counter() - t0
        if not abs(best - S) / S <= ROUTE_TOL:
            v.append(f"spectral and closed-form routes differ by more than {ROUTE_TOL:g}")

    if c1 is not None:
        t0 = time.perf_counter()
        cert = quasipoly.certify(quasipoly.build(k, c1))
        rep.quasipoly = {
            "C1": float(cert.C1), "M": cert.M, "ratio": float(cert.ratio),
            "margin": cert.margin, "certified": cert.certified,
        }
        timing["quasipoly"] = time.perf_counter() - t0
        if not float(cert.ratio) <= S:
            v.append("quasi-polynomial ratio exceeds S(k)")
    return rep


def _report_table(rep: Report) -> str:
    pairs: list[tuple[str, Any]] = [
        ("k", rep.k), ("alpha_{k-2,1}", rep.alpha), ("S(k)", rep.S_closed_form),
    ]
    if rep.S_nystrom is not None:
        pairs.append(("S nystrom", rep.S_nystrom))
    if rep.S_nystrom_extrapolated is not None:
        pairs.append(("S nystrom extrapolated", rep.S_nystrom_extrapolated))
    pairs += [(name, val) for name, val in rep.bounds.items()]
    pairs += [("best monomial ell", rep.best_monomial["ell"]), ("best monomial ratio", rep.best_monomial["ratio"])]
    if rep.quasipoly:
        pairs += [(f"quasipoly {k}", v) for k, v in rep.quasipoly.items()]
    lines = [_table(pairs)]
    lines += [f"note: {n}" for n in rep.notes]
    lines += [f"VIOLATION: {n}" for n in rep.violations]
    return "\n".join(lines)


def cmd_sk(args) -> int:
    if args.k < 3:
        raise UsageError("k must be at least 3")
    if args.nystrom is not None and not 50 <= args.nystrom <= 10_000:
        raise UsageError("--nystrom must lie in [50, 10000]")
    c1 = None
    if args.c1 is not None:
        c1 = _parse_fraction(args.c1)
        if args.k < 8:
            raise UsageError("--c1 needs k >= 8")
    try:
        rep = build_report(args.k, args.nystrom, c1)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    print(_dump_json(rep.to_dict()) if args.json else _report_table(rep))
    return EXIT_INVARIANT if rep.violations else EXIT_OK


# ---------------------------------------------------------------- scan

SCAN_COLUMNS = ("k", "S", "4/S-k", "(4/S-k)/k^(1/3)", "product_bound", "refined_bound", "trivial_bound", "cnorm_bound")


def scan_row(k: int) -> tuple:
    S = extremal.S_of_k(k)
    gap = 4.0 / S - k
    br = bounds.bound_report(k)
    return (k, S, gap, gap / k ** (1.0 / 3.0), br.product_bound, br.refined_bound, br.trivial_bound, br.cnorm_bound)


def _scan_rows(ks: list[int], threads: int) -> list[tuple]:
    if threads <= 1 or len(ks) < 2:
        return [scan_row(k) for k in ks]
    with ProcessPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(scan_row, ks, chunksize=max(1, len(ks) // (4 * threads))))


def _scan_violations(rows: list[tuple]) -> list[str]:
    out = []
    for prev, row in zip(rows, rows[1:]):
        if not row[1] < prev[1]:
            out.append(f"S not decreasing between k={prev[0]} and k={row[0]}")
    for k, S, _, _, product, refined, trivial, cnorm in rows:
        strict = [b for b in (product, refined, trivial) if b is not None]
        if not all(S < b for b in strict) or (cnorm is not None and not S <= cnorm):
            out.append(f"bound violated at k={k}")
    return out


def _csv_text(rows: list[tuple]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(SCAN_COLUMNS)
    for row in rows:
        writer.writerow(["" if v is None else _fmt(v) for v in row])
    return buf.getvalue()


def cmd_scan(args) -> int:
    if not 3 <= args.kmin <= args.kmax <= 1_000_000:
        raise UsageError("need 3 <= kmin <= kmax <= 10**6")
    if args.step < 1:
        raise UsageError("--step must be positive")
    threads = args.threads if args.threads is not None else (os.cpu_count() or 1)
    if threads < 1:
        raise UsageError("--threads must be positive")
    ks = list(range(args.kmin, args.kmax + 1, args.step))
    rows = _scan_rows(ks, threads)
    if args.csv is not None:
        text = _csv_text(rows)
        if args.csv == "-":
            sys.stdout.write(text)
        else:
            try:
                with open(args.csv, "w", encoding="utf-8", newline="") as fh:
                    fh.write(text)
            except OSError as exc:
                print(f"error: cannot write {args.csv}: {exc.strerror}", file=sys.stderr)
                return EXIT_INVARIANT
    else:
        widths = [max(len(c), 22) for c in SCAN_COLUMNS]
        print("  ".join(c.rjust(w) for c, w in zip(SCAN_COLUMNS, widths)))
        for row in rows:
            print("  ".join(("-" if v is None else _fmt(v)).rjust(w) for v, w in zip(row, widths)))
    problems = _scan_violations(rows)
    for p in problems:
        print(f"VIOLATION: {p}", file=sys.stderr)
    return EXIT_INVARIANT if problems else EXIT_OK


# ---------------------------------------------------------------- certify

def _parse_fraction(text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise UsageError(f"not a number: {text!r}") from exc


def parse_c1_scan(text: str) -> list[Fraction]:
    parts = text.split(":")
    if len(parts) not in (2, 3):
        raise UsageError("--c1-scan expects LO:HI or LO:HI:STEP")
    lo, hi = _parse_fraction(parts[0]), _parse_fraction(parts[1])
    step = _parse_fraction(parts[2]) if len(parts) == 3 else Fraction(1)
    if step <= 0 or lo > hi:
        raise UsageError("--c1-scan needs LO <= HI and STEP > 0")
    count = int((hi - lo) / step) + 1
    if count > 10_000:
        raise UsageError("--c1-scan has more than 10000 values")
    return [lo + i * step for i in range(count)]


def certify_payload(k: int, values: list[Fraction]) -> dict:
    certs = quasipoly.scan_C1(k, values)
    best = quasipoly.smallest_certifying(certs)
    entries = [
        {"C1": float(c.C1), "M": c.M, "degree": c.degree, "ratio": float(c.ratio),
         "target": c.target, "margin": c.margin, "certified": c.certified}
        for c in certs
    ]
    out: dict[str, Any] = {"k": k, "S": extremal.S_of_k(k)}
    if best is None:
        out["outcome"] = "no certifying C1 in range"
        out["smallest_certifying"] = None
    else:
        out["outcome"] = "certified"
        out["smallest_certifying"] = {
            "C1": float(best.C1), "margin": best.margin, "M": best.M, "degree": best.degree,
            "ratio": float(best.ratio),
        }
    out["scan"] = entries
    return out


def cmd_certify(args) -> int:
    if args.k < 64:
        raise UsageError("certification needs k >= 64")
    values = parse_c1_scan(args.c1_scan)
    payload = certify_payload(args.k, values)
    if args.json:
        print(_dump_json(payload))
    else:
        best = payload["smallest_certifying"]
        if best is None:
            print(f"k={args.k}: {payload['outcome']}")
        else:
            print(_table([("k", args.k), ("smallest certifying C1", best["C1"]), ("M", best["M"]),
                          ("degree", best["degree"]), ("ratio", best["ratio"]), ("margin", best["margin"]),
                          ("S(k)", payload["S"])]))
    bad = [e for e in payload["scan"] if not e["ratio"] <= payload["S"]]
    return EXIT_INVARIANT if bad else EXIT_OK


# ---------------------------------------------------------------- series

def cmd_series(args) -> int:
    try:
        ev = series.FG_series(args.m, args.r, args.bits)
    except series.InsufficientPrecisionError as exc:
        print(f"error: insufficient precision: {exc}", file=sys.stderr)
        return EXIT_INVARIANT
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    lam = ev.eigenvalue
    rel = float(abs(ev.ratio - lam) / lam)
    payload = {
        "m": ev.m, "r": ev.r, "bits": ev.precision_bits, "b": float(ev.b), "F": float(ev.F),
        "G": float(ev.G), "ratio": float(ev.ratio), "eigenvalue": float(lam), "relative_error": rel,
        "terms_used": ev.terms_used, "cancellation_digits": ev.cancellation,
    }
    print(_dump_json(payload) if args.json else _table(list(payload.items())))
    return EXIT_OK if rel <= 1e-8 else EXIT_INVARIANT


# ---------------------------------------------------------------- zeros

def cmd_zeros(args) -> int:
    if args.m < 0 or not 1 <= args.rmax <= 10_000:
        raise UsageError("need m >= 0 and 1 <= rmax <= 10000")
    zs = zeros(args.m, args.rmax)
    rows = [(z.index, z.value, z.bracket[0], z.bracket[1]) for z in zs]
    if args.json:
        print(_dump_json([{"m": args.m, "r": r, "alpha": a, "lo": lo, "hi": hi} for r, a, lo, hi in rows]))
    elif args.csv:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(("m", "r", "alpha", "lo", "hi"))
        for r in rows:
            w.writerow((args.m,) + tuple(_fmt(v) for v in r))
        sys.stdout.write(buf.getvalue())
    else:
        for r, a, lo, hi in rows:
            print(f"{r:>6}  {_fmt(a):>22}  [{_fmt(lo)}, {_fmt(hi)}]")
    ordered = all(x.value < y.value for x, y in zip(zs, zs[1:]))
    return EXIT_OK if ordered else EXIT_INVARIANT


# ---------------------------------------------------------------- entry

def make_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="gpyweight", description="Extremal sieve weights: S(k), bounds and certificates.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("sk", help="report for one k")
    s.add_argument("k", type=int)
    s.add_argument("--nystrom", type=int, metavar="N", help="add the spectral route with N nodes")
    s.add_argument("--c1", metavar="C1", help="also certify the quasi-polynomial at this C1")
    s.add_argument("--json", action="store_true")
    s.set_defaults(func=cmd_sk)

    s = sub.add_parser("scan", help="S(k) and bounds over a range of k")
    s.add_argument("kmin", type=int)
    s.add_argument("kmax", type=int)
    s.add_argument("--step", type=int, default=1)
    s.add_argument("--csv", metavar="PATH", help="write CSV to PATH ('-' for stdout)")
    s.add_argument("--threads", type=int, help="worker processes (default: all cores)")
    s.set_defaults(func=cmd_scan)

    s = sub.add_parser("certify", help="certify the quasi-polynomial over a C1 scan")
    s.add_argument("k", type=int)
    s.add_argument("--c1-scan", default="1:60:1", metavar="LO:HI:STEP")
    s.add_argument("--json", action="store_true")
    s.set_defaults(func=cmd_certify)

    s = sub.add_parser("series", help="eigenvalue from the power series in high precision")
    s.add_argument("m", type=int)
    s.add_argument("r", type=int)
    s.add_argument("--bits", type=int, default=256)
    s.add_argument("--json", action="store_true")
    s.set_defaults(func=cmd_series)

    s = sub.add_parser("zeros", help="zeros of J_m")
    s.add_argument("m", type=int)
    s.add_argument("rmax", type=int)
    fmt = s.add_mutually_exclusive_group()
    fmt.add_argument("--json", action="store_true")
    fmt.add_argument("--csv", action="store_true")
    s.set_defaults(func=cmd_zeros)
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = make_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"gpyweight: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


def entry() -> None:
    sys.exit(main())
