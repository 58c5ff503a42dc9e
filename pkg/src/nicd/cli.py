"""Command-line entry point: ``nicd <subcommand> ...``.

Exit codes: 0 success or claim verified, 1 claim falsified, 2 usage error.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from fractions import Fraction

from . import bounds, erasure, montecarlo, search
from .boolfn import (
    SpecError,
    TieError,
    canonical_form,
    from_ltf,
    majority,
    parse_function,
    render_function,
)
from .exact import (
    RationalPoly,
    fixed_decimal,
    parse_rational,
    rational_to_json,
    render_decimal,
)

EXIT_OK, EXIT_FALSIFIED, EXIT_USAGE = 0, 1, 2

COUNTEREXAMPLE_WEIGHTS = (1, -3, 1, -1, 3)
CLAIMED_P = Fraction(2, 5)
CLAIMED_PHI_F = Fraction(2689, 6250)
CLAIMED_PHI_MAJ = Fraction(5363, 12500)
CLAIMED_POLY_F = RationalPoly([0, Fraction(7, 4), Fraction(-11, 4), Fraction(7, 2), Fraction(-5, 2), 1])
CLAIMED_POLY_MAJ = RationalPoly(
    [0, Fraction(15, 8), Fraction(-15, 4), Fraction(25, 4), Fraction(-45, 8), Fraction(9, 4)]
)


class UsageError(Exception):
    pass


def _emit(obj, fmt: str, text: str) -> None:
    if fmt == "json":
        sys.stdout.write(json.dumps(obj, indent=2, ensure_ascii=False) + "\n")
    else:
        sys.stdout.write(text.rstrip("\n") + "\n")


def _fn(text: str):
    try:
        return parse_function(text)
    except (SpecError, TieError) as exc:
        raise UsageError(str(exc)) from exc
    except ValueError as exc:
        raise UsageError(f"{text!r}: {exc}") from exc


def _p(text: str) -> Fraction:
    try:
        return parse_rational(text)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def _workers(args) -> int:
    if getattr(args, "workers", None):
        return args.workers
    try:
        return max(1, int(os.environ.get("NICD_WORKERS", "1")))
    except ValueError:
        return 1


def _rj(r: Fraction) -> dict:
    return rational_to_json(r)


# ---------------------------------------------------------------------------
# subcommands

def cmd_verify_counterexample(args) -> int:
    f = from_ltf(COUNTEREXAMPLE_WEIGHTS)
    maj = majority(5)
    spec_f = "ltf:" + ",".join(str(w) for w in COUNTEREXAMPLE_WEIGHTS)
    poly_f, poly_maj = erasure.phi_poly(f), erasure.phi_poly(maj)
    phi_f, phi_maj = erasure.phi_at(f, CLAIMED_P), erasure.phi_at(maj, CLAIMED_P)

    checks = [
        ("f is odd", bool((f.table == -f.table[::-1]).all())),
        ("phi_poly(f) matches 7/4 p - 11/4 p^2 + 7/2 p^3 - 5/2 p^4 + p^5", poly_f == CLAIMED_POLY_F),
        ("phi_poly(Maj5) matches 15/8 p - 15/4 p^2 + 25/4 p^3 - 45/8 p^4 + 9/4 p^5", poly_maj == CLAIMED_POLY_MAJ),
        ("Phi_{2/5}(f) = 2689/6250", phi_f == CLAIMED_PHI_F),
        ("Phi_{2/5}(Maj5) = 5363/12500", phi_maj == CLAIMED_PHI_MAJ),
        ("polynomial and direct evaluation agree", poly_f(CLAIMED_P) == phi_f and poly_maj(CLAIMED_P) == phi_maj),
        ("Phi_{2/5}(f) > Phi_{2/5}(Maj5)", phi_f > phi_maj),
    ]
    p = _p(args.p) if args.p else CLAIMED_P
    at_p = None
    if p != CLAIMED_P:
        if not 0 <= p <= 1:
            raise UsageError(f"p = {p} outside [0, 1]")
        vf, vm = erasure.phi_at(f, p), erasure.phi_at(maj, p)
        at_p = {"p": p, "f": vf, "maj": vm, "margin": vf - vm}
    failed = next((name for name, ok in checks if not ok), None)

    obj = {
        "function": spec_f,
        "table": render_function(f),
        "p": _rj(CLAIMED_P),
        "phi_f": _rj(phi_f),
        "phi_maj5": _rj(phi_maj),
        "margin": _rj(phi_f - phi_maj),
        "phi_poly_f": poly_f.to_json(),
        "phi_poly_maj5": poly_maj.to_json(),
        "checks": [{"name": name, "passed": ok} for name, ok in checks],
        "verified": failed is None,
    }
    lines = [
        f"f = sgn(x1 - 3x2 + x3 - x4 + 3x5)   [{render_function(f)}]",
        f"Phi_p(f)    = {poly_f}",
        f"Phi_p(Maj5) = {poly_maj}",
        f"Phi_2/5(f)    = {phi_f} = {render_decimal(phi_f)}",
        f"Phi_2/5(Maj5) = {phi_maj} = {render_decimal(phi_maj)}",
        f"margin        = {phi_f - phi_maj} = {render_decimal(phi_f - phi_maj)}",
    ]
    lines += [f"[{'PASS' if ok else 'FAIL'}] {name}" for name, ok in checks]
    if at_p is not None:
        leader = "f" if at_p["margin"] > 0 else "Maj5" if at_p["margin"] < 0 else "tie"
        obj["at_p"] = {
            "p": _rj(at_p["p"]),
            "phi_f": _rj(at_p["f"]),
            "phi_maj5": _rj(at_p["maj"]),
            "margin": _rj(at_p["margin"]),
            "leader": leader,
        }
        lines.append(
            f"at p = {at_p['p']}: Phi(f) = {render_decimal(at_p['f'])}, "
            f"Phi(Maj5) = {render_decimal(at_p['maj'])}, ahead: {leader}"
        )
    if failed:
        lines.append(f"FALSIFIED: {failed}")
    else:
        lines.append("VERIFIED: majority is not optimal at p = 2/5 for n = 5")
    _emit(obj, "json" if args.json else args.format, "\n".join(lines))
    return EXIT_OK if failed is None else EXIT_FALSIFIED


def cmd_phi(args) -> int:
    f, p = _fn(args.fn), _p(args.p)
    if not 0 <= p <= 1:
        raise UsageError(f"p = {p} outside [0, 1]")
    report = erasure.phi_report(f, args.fn, p)
    text = f"Phi_{p}({args.fn}) = {report.value_at_p} = {render_decimal(report.value_at_p)}"
    _emit(report.to_json(), args.format, text)
    return EXIT_OK


def cmd_phi_poly(args) -> int:
    f = _fn(args.fn)
    report = erasure.phi_report(f, args.fn)
    _emit(report.to_json(), args.format, f"Phi_p({args.fn}) = {report.phi_poly}")
    return EXIT_OK


def cmd_stab(args) -> int:
    f, p = _fn(args.fn), _p(args.p)
    if not 0 <= p <= 1:
        raise UsageError(f"p = {p} outside [0, 1]")
    poly = erasure.stab_poly(f)
    value = erasure.stab_via_erasure(f, p)
    if value != poly(p):
        return EXIT_FALSIFIED
    obj = {"spec": args.fn, "stab_poly": poly.to_json(), "p": _rj(p), "stab_at_p": _rj(value)}
    _emit(obj, args.format, f"Stab_{p}({args.fn}) = {value} = {render_decimal(value)}")
    return EXIT_OK


def cmd_stab_poly(args) -> int:
    f = _fn(args.fn)
    poly = erasure.stab_poly(f)
    _emit({"spec": args.fn, "stab_poly": poly.to_json()}, args.format, f"Stab_p({args.fn}) = {poly}")
    return EXIT_OK


def cmd_fourier(args) -> int:
    f = _fn(args.fn)
    e = erasure.fourier(f)
    levels = {}
    for k in range(f.n + 1):
        level = e.level(k)
        nonzero = {s: c for s, c in level.items() if c != 0}
        if nonzero:
            levels[k] = nonzero
    obj = {
        "spec": args.fn,
        "table": render_function(f),
        "n": f.n,
        "levels": {
            str(k): [{"set": list(s), "coeff": _rj(c)} for s, c in v.items()] for k, v in levels.items()
        },
        "parseval": _rj(e.parseval()),
    }
    lines = [f"{args.fn}  ({render_function(f)})"]
    for k, v in levels.items():
        counts: dict = {}
        for c in v.values():
            counts[c] = counts.get(c, 0) + 1
        summary = ", ".join(f"{c} x{m}" for c, m in sorted(counts.items(), reverse=True))
        lines.append(f"level {k}: {summary}")
        if args.verbose:
            for s, c in v.items():
                lines.append(f"  fhat({{{','.join(map(str, s))}}}) = {c}")
    lines.append(f"Parseval sum = {e.parseval()}")
    _emit(obj, args.format, "\n".join(lines))
    return EXIT_OK


def cmd_search(args) -> int:
    p = _p(args.p)
    if args.family == "odd":
        family = search.CandidateFamily.odd(args.n)
    else:
        family = search.CandidateFamily.ltf(args.n, args.max_weight, dedupe=not args.no_dedupe)
    progress = open(args.progress, "a", encoding="utf-8") if args.progress else None
    try:
        report = search.argmax_phi(
            family,
            p,
            prefilter=args.prefilter,
            workers=_workers(args),
            progress=progress,
            checkpoint=args.checkpoint,
        )
    finally:
        if progress:
            progress.close()
    obj = report.to_json(timing=not args.no_timing)
    lines = [
        f"family {family.descriptor()}, p = {p}: scanned {report.candidates_scanned} "
        f"({report.exactly_scored} scored exactly) in {report.wall_time:.2f}s",
        f"best Phi = {report.best_value} = {render_decimal(report.best_value)}",
        f"maximisers: {report.argmax_raw_count} tables in {len(report.argmax)} class(es)",
    ]
    lines += [f"  {render_function(f)}" + (f"  weights {report.witnesses[f]}" if f in report.witnesses else "") for f in report.argmax]
    if report.majority_value is not None:
        lines.append(
            f"Phi(Maj{family.n}) = {render_decimal(report.majority_value)}; "
            f"margin = {report.margin_over_majority}; majority in argmax: {report.majority_in_argmax}"
        )
    _emit(obj, args.format, "\n".join(lines))
    return EXIT_OK


def cmd_bounds(args) -> int:
    which = args.which
    if which == "lemma1":
        if not args.fn or not args.p:
            raise UsageError("bounds lemma1 needs --fn and --p")
        f = _fn(args.fn)
        certs = [bounds.lemma1_check(f, _p(p), args.fn) for p in args.p]
        ok = all(c.bound_holds for c in certs)
        lines = [
            f"p = {c.p}: residual = {render_decimal(c.residual)} <= ~{float(c.bound_upper):.6g}: "
            f"{'holds' if c.bound_holds else 'FAILS'}"
            for c in certs
        ]
        _emit({"certificates": [c.to_json() for c in certs], "verified": ok}, args.format, "\n".join(lines))
        return EXIT_OK if ok else EXIT_FALSIFIED
    n = args.n
    if n is None:
        raise UsageError(f"bounds {which} needs --n")
    if which == "lemma2":
        report = bounds.level1_argmax_scan(n, args.strategy)
        ok = report.argmax_is_majority and report.delta_n > 0
        text = (
            f"n = {n} ({report.method}): max level-1 sum {report.max_level1}, unique Maj: "
            f"{report.argmax_is_majority}, delta_n = {report.delta_n}"
        )
        _emit(report.to_json(), args.format, text)
        return EXIT_OK if ok else EXIT_FALSIFIED
    if which == "p0":
        p0 = bounds.p0_bound(n)
        obj = {
            "n": n,
            "delta_n": _rj(bounds.gap_delta(n)),
            "error_constant_upper": _rj(bounds.error_constant_upper(n)),
            "p0_bound": _rj(p0),
        }
        _emit(obj, args.format, f"p0({n}) >= {p0} ~ {float(p0):.6g}")
        return EXIT_OK
    if which == "smallp":
        samples = [_p(p) for p in args.p] if args.p else None
        if samples is None:
            p0 = bounds.p0_bound(n)
            samples = [p0 / 2, p0 / 4]
        try:
            report = bounds.verify_small_p_optimality(n, samples, strict=not args.no_strict)
        except ValueError as exc:
            raise UsageError(str(exc)) from exc
        lines = [
            f"p = {p}: {report.compared} rivals, min margin of Maj{n} {render_decimal(report.min_margin[p])}"
            for p in report.samples
        ]
        lines.append("verified" if report.verified else f"violations: {len(report.violations)}")
        _emit(report.to_json(), args.format, "\n".join(lines))
        return EXIT_OK if report.verified else EXIT_FALSIFIED
    if which == "dictator":
        if not args.p:
            raise UsageError("bounds dictator needs --p")
        try:
            reports = [bounds.dictator_regime_check(n, _p(p)) for p in args.p]
        except ValueError as exc:
            raise UsageError(str(exc)) from exc
        ok = all(r.verified for r in reports)
        lines = [f"p = {r.p}: max Phi = {r.max_phi}, classes {r.argmax_classes}" for r in reports]
        _emit({"reports": [r.to_json() for r in reports], "verified": ok}, args.format, "\n".join(lines))
        return EXIT_OK if ok else EXIT_FALSIFIED
    raise UsageError(f"unknown bounds check {which!r}")


def cmd_mc(args) -> int:
    f = _fn(args.fn)
    try:
        p = float(_p(args.p))
        config = montecarlo.McConfig(p, args.samples, args.seed, _workers(args))
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    estimate = montecarlo.estimate_sq(f, config) if args.sq else montecarlo.estimate_phi(f, config)
    exact = erasure.stab_poly(f)(_p(args.p)) if args.sq else erasure.phi_poly(f)(_p(args.p))
    obj = estimate.to_json()
    obj["quantity"] = "E[f(z)^2]" if args.sq else "E|f(z)|"
    obj["exact"] = _rj(exact)
    obj["z_score"] = (estimate.mean - float(exact)) / estimate.std_error if estimate.std_error else None
    text = (
        f"{obj['quantity']} ~ {estimate.mean:.6f} +- {estimate.std_error:.2g} "
        f"({estimate.samples} samples, seed {estimate.seed}); exact {render_decimal(exact)}"
    )
    _emit(obj, args.format, text)
    return EXIT_OK


def cmd_curve(args) -> int:
    fns = [_fn(s) for s in args.fn]
    if len({f.n for f in fns}) > 1:
        raise UsageError("all --fn arguments must have the same dimension")
    try:
        grid = erasure.parse_grid(args.grid)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    rows = erasure.curve(fns, grid)
    fmt = args.out or args.format
    prec = args.precision
    if fmt == "csv":
        if len(fns) == 1:
            header = ["p", "phi", "stab"]
        else:
            header = ["p"] + [f"{c}_{i + 1}" for i in range(len(fns)) for c in ("phi", "stab")] + ["diff"]
        out = [",".join(header)]
        for p, phis, stabs in rows:
            cells = [fixed_decimal(p, prec)]
            for a, b in zip(phis, stabs):
                cells += [fixed_decimal(a, prec), fixed_decimal(b, prec)]
            if len(fns) > 1:
                cells.append(fixed_decimal(phis[-1] - phis[0], prec))
            out.append(",".join(cells))
        sys.stdout.write("\n".join(out) + "\n")
        return EXIT_OK
    obj = {
        "specs": args.fn,
        "rows": [
            {"p": _rj(p), "phi": [_rj(v) for v in phis], "stab": [_rj(v) for v in stabs]}
            for p, phis, stabs in rows
        ],
    }
    if len(fns) > 1:
        obj["crossover"] = search.crossover_scan(fns[-1], fns[0], grid).to_json()["brackets"]
    text = "\n".join(
        f"{p}: " + "  ".join(f"phi={fixed_decimal(a, prec)} stab={fixed_decimal(b, prec)}" for a, b in zip(phis, stabs))
        for p, phis, stabs in rows
    )
    _emit(obj, "json" if fmt == "json" else "text", text)
    return EXIT_OK


def cmd_crossover(args) -> int:
    f, g = _fn(args.fn[0]), _fn(args.fn[1])
    if f.n != g.n:
        raise UsageError(f"dimension mismatch: {f.n} vs {g.n}")
    grid = erasure.parse_grid(args.grid) if ":" in args.grid else _p(args.grid)
    scan = search.crossover_scan(f, g, grid)
    lines = [f"[{a}, {b}]: {o.name}" for (a, b), o in scan.segments]
    lines += [f"sign change in ({a}, {b})" for a, b in scan.brackets]
    _emit(scan.to_json(), args.format, "\n".join(lines))
    return EXIT_OK


def cmd_canon(args) -> int:
    f = _fn(args.fn)
    try:
        c = canonical_form(f, include_negation=args.negation)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    obj = {"spec": args.fn, "table": render_function(f), "canonical": render_function(c), "negation": args.negation}
    _emit(obj, args.format, render_function(c))
    return EXIT_OK


# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="nicd", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, fn, help_):
        sp = sub.add_parser(name, help=help_)
        sp.add_argument("--format", choices=("text", "json", "csv"), default="text")
        sp.set_defaults(func=fn)
        return sp

    sp = add("verify-counterexample", cmd_verify_counterexample, "reproduce the n=5, p=2/5 counterexample")
    sp.add_argument("--p", help="additionally compare f and Maj5 at this p")
    sp.add_argument("--json", action="store_true", help="machine-readable certificate")

    for name, fn, needs_p in (
        ("phi", cmd_phi, True),
        ("phi-poly", cmd_phi_poly, False),
        ("stab", cmd_stab, True),
        ("stab-poly", cmd_stab_poly, False),
    ):
        sp = add(name, fn, f"{name.replace('-', ' ')} of one function")
        sp.add_argument("--fn", required=True)
        if needs_p:
            sp.add_argument("--p", required=True)

    sp = add("fourier", cmd_fourier, "Fourier coefficients by level")
    sp.add_argument("--fn", required=True)
    sp.add_argument("-v", "--verbose", action="store_true")

    sp = add("search", cmd_search, "exact argmax of Phi_p over a family")
    sp.add_argument("family", choices=("odd", "ltf"))
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--p", required=True)
    sp.add_argument("--max-weight", type=int, default=3)
    sp.add_argument("--no-dedupe", action="store_true")
    sp.add_argument("--prefilter", action="store_true")
    sp.add_argument("--workers", type=int)
    sp.add_argument("--progress", help="append JSON-lines progress to this file")
    sp.add_argument("--checkpoint", help="resumable checkpoint file")
    sp.add_argument("--no-timing", action="store_true", help="omit wall time for byte-stable output")

    sp = add("bounds", cmd_bounds, "small-p theory checks")
    sp.add_argument("which", choices=("lemma1", "lemma2", "p0", "smallp", "dictator"))
    sp.add_argument("--fn")
    sp.add_argument("--n", type=int)
    sp.add_argument("--p", action="append", help="repeatable")
    sp.add_argument("--strategy", default="auto", choices=("auto", "full", "pointwise", "gray"))
    sp.add_argument("--no-strict", action="store_true", help="allow smallp samples above p0")

    sp = add("mc", cmd_mc, "Monte Carlo estimate")
    sp.add_argument("--fn", required=True)
    sp.add_argument("--p", required=True)
    sp.add_argument("--samples", type=int, default=10**6)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--workers", type=int)
    sp.add_argument("--sq", action="store_true", help="estimate E[f(z)^2] instead of E|f(z)|")

    sp = add("curve", cmd_curve, "Phi and Stab on a rational grid")
    sp.add_argument("--fn", action="append", required=True)
    sp.add_argument("--grid", default="0:1:1/100", help="start:stop:step")
    sp.add_argument("--out", choices=("csv", "json", "text"))
    sp.add_argument("--precision", type=int, default=12)

    sp = add("crossover", cmd_crossover, "sign of Phi(f) - Phi(g) along a grid")
    sp.add_argument("--fn", action="append", required=True)
    sp.add_argument("--grid", default="1/100", help="step, or start:stop:step")

    sp = add("canon", cmd_canon, "canonical form under permutations and flips")
    sp.add_argument("--fn", required=True)
    sp.add_argument("--negation", action="store_true", help="include output negation")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "crossover" and len(args.fn) != 2:
        parser.error("crossover needs exactly two --fn")
    try:
        return args.func(args)
    except UsageError as exc:
        sys.stderr.write(f"nicd {args.command}: error: {exc}\n")
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
