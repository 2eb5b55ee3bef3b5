"""Command-line driver: build, calibrate, verify and report."""
from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from typing import Sequence

import numpy as np

from .tables import contraction_pairs
from .currents import (
    GRID_VALUES,
    ConventionSet,
    NoConsistentConvention,
    build_currents,
    calibrate,
    total_q_charge,
)
from .gamma import gamma_reduce
from .relations import FAMILIES, RelationSpec, default_jobs, relation_catalog, summarize, verify_all
from .rootdata import build_root_data
from .vertex import MU, NU, exchange_relation

COMMANDS = ("verify-all", "verify", "contractions", "calibrate", "show-currents")
EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_CALIBRATION = 0, 1, 2, 3
ORACLE_POINTS = 20


class UsageError(Exception):
    pass


def _fraction(text: str) -> Fraction:
    try:
        value = Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a rational number: {text!r}") from None
    if value not in GRID_VALUES:
        raise argparse.ArgumentTypeError(f"{text} is not on the calibration grid {[str(v) for v in GRID_VALUES]}")
    return value


def _nonneg(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if value < 0:
        raise argparse.ArgumentTypeError("must be non-negative")
    return value


def _common(defaults: bool) -> argparse.ArgumentParser:
    # shared options are accepted before or after the command; only the top level sets defaults
    d = (lambda v: v) if defaults else (lambda v: argparse.SUPPRESS)
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--M", type=_nonneg, default=d(None), help="bosonic rank parameter M")
    p.add_argument("--N", type=_nonneg, default=d(None), help="second rank parameter N")
    p.add_argument("--format", choices=("text", "json"), default=d("text"))
    p.add_argument("--sigma-D", dest="sigma_D", type=_fraction, default=d(None),
                   help="difference-operator shift (grid value)")
    p.add_argument("--sigma-pm", dest="sigma_pm", type=_fraction, default=d(None),
                   help="mu_pm shift in units of hbar (grid value)")
    p.add_argument("--delta-scale", dest="delta_scale", type=int, choices=(1, -1), default=d(None))
    p.add_argument("--calibrated", action="store_true", default=d(False),
                   help="run calibration first and use its conventions")
    p.add_argument("--oracle", action="store_true", default=d(False), help="add floating-point oracle checks")
    p.add_argument("--seed", type=int, default=d(0), help="seed for oracle sample points")
    p.add_argument("--jobs", type=int, default=d(None), help="worker processes (default: $DYBOSON_JOBS or 1)")
    return p


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dyboson", parents=[_common(True)],
                                     description="Verify the level-one free-boson realization of the super-Yangian double.")
    sub = parser.add_subparsers(dest="command", required=True)
    shared = _common(False)
    sub.add_parser("verify-all", parents=[shared], help="verify every relation in the catalog")
    v = sub.add_parser("verify", parents=[shared], help="verify selected relations")
    v.add_argument("--family", choices=FAMILIES, required=True)
    v.add_argument("--i", type=int, required=True)
    v.add_argument("--j", type=int, default=None)
    v.add_argument("--variant", default=None, help="e.g. 'Psi+/X-'")
    sub.add_parser("contractions", parents=[shared], help="pairwise normal-ordering table of the basic fields")
    sub.add_parser("calibrate", parents=[shared], help="search the convention grid")
    sub.add_parser("show-currents", parents=[shared], help="print the bosonized currents")
    return parser


def _conventions(args, data) -> ConventionSet:
    if args.calibrated:
        base = calibrate(data)
    else:
        base = ConventionSet()
    return ConventionSet(args.sigma_D if args.sigma_D is not None else base.sigma_D,
                         args.sigma_pm if args.sigma_pm is not None else base.sigma_pm,
                         args.delta_scale if args.delta_scale is not None else base.delta_scale)


def _conv_json(conv: ConventionSet) -> dict:
    return {"sigma_D": str(conv.sigma_D), "sigma_pm": str(conv.sigma_pm)}


def dumps(payload: dict) -> str:
    return json.dumps(payload, sort_keys=True, indent=2, ensure_ascii=False)


def _select(data, conv, args) -> list[RelationSpec]:
    if not 1 <= args.i <= data.rank or (args.j is not None and not 1 <= args.j <= data.rank):
        raise UsageError(f"node index out of range 1..{data.rank}")
    specs = [s for s in relation_catalog(data, conv)
             if s.family == args.family and s.i == args.i
             and (args.j is None or s.j == args.j)
             and (args.variant is None or s.variant == args.variant)]
    if not specs:
        raise UsageError(f"no {args.family} relation for i={args.i}, j={args.j} in this algebra")
    return specs


def _oracle_errors(reg, specs, reports, seed: int) -> dict:
    from .oracle import exchange_numeric_error, random_points

    rng = np.random.default_rng(seed)
    out = {}
    for spec, rep in zip(specs, reports):
        if spec.bracket != "exchange" or rep.verdict != "pass":
            continue
        a = reg.current(*spec.a, anchor=MU)
        b = reg.current(*spec.b, anchor=NU)
        res = exchange_relation(a, b)
        out[rep.relation] = exchange_numeric_error(a, b, res.R, res.sign, random_points(rng, ORACLE_POINTS))
    return out


def _run_verify(args, data, conv, out) -> int:
    reg = build_currents(data, conv)
    specs = _select(data, conv, args) if args.command == "verify" else relation_catalog(data, conv)
    specs = sorted(specs, key=RelationSpec.sort_key)
    jobs = args.jobs if args.jobs is not None else default_jobs()
    reports = verify_all(reg, specs, jobs=jobs)
    summary = summarize(reports)
    oracle = _oracle_errors(reg, specs, reports, args.seed) if args.oracle else {}
    if args.format == "json":
        items = []
        for r in reports:
            item = {k: r.as_json()[k] for k in ("relation", "family", "i", "j", "verdict", "computed", "expected",
                                                 "detail")}
            if r.relation in oracle:
                item["oracle_max_rel_error"] = f"{oracle[r.relation]:.3e}"
            items.append(item)
        payload = {"m": data.M, "n": data.N, "conventions": _conv_json(conv), "reports": items, "summary": summary}
        if args.oracle:
            payload["oracle"] = {"seed": args.seed, "points": ORACLE_POINTS}
        out.write(dumps(payload) + "\n")
    else:
        out.write(f"sl({data.M + 1}|{data.N + 1})  {conv}\n")
        for r in reports:
            line = f"{r.verdict.upper():4}  {r.relation}: {r.computed}"
            if r.verdict != "pass":
                line += f"  [expected {r.expected}; {r.detail}]"
            if r.relation in oracle:
                line += f"  (oracle {oracle[r.relation]:.1e})"
            out.write(line + "\n")
        out.write(f"summary: {summary['pass']} pass, {summary['fail']} fail\n")
    return EXIT_OK if summary["fail"] == 0 else EXIT_FAIL


def _reduced_text(g) -> str:
    r, c = gamma_reduce(g)
    extra, rest = c.split()
    total = r * extra
    return str(total) if rest.is_one() else f"{total} * {rest}"


def _run_contractions(args, data, out) -> int:
    from .oracle import contraction_vs_quadrature

    rng = np.random.default_rng(args.seed)
    rows = []
    ok = True
    for entry in contraction_pairs(data):
        g = entry.computed()
        row = {"pair": entry.label, "gamma": str(g), "reduced": _reduced_text(g),
               "matches_table": g == entry.expected}
        ok &= row["matches_table"]
        if args.oracle:
            pts = [(complex(rng.uniform(4, 6), rng.uniform(-2, 2)), float(rng.uniform(0.3, 1.0))) for _ in range(3)]
            row["quadrature_max_rel_error"] = f"{contraction_vs_quadrature(entry.left.kernel, entry.right.kernel, pts):.3e}"
        rows.append(row)
    if args.format == "json":
        out.write(dumps({"m": data.M, "n": data.N, "contractions": rows}) + "\n")
    else:
        for row in rows:
            mark = "" if row["matches_table"] else "  [MISMATCH]"
            q = f"  (quadrature {row['quadrature_max_rel_error']})" if args.oracle else ""
            out.write(f"{row['pair']}: {row['gamma']} = {row['reduced']}{mark}{q}\n")
    return EXIT_OK if ok else EXIT_FAIL


def _run_show(args, data, conv, out) -> int:
    reg = build_currents(data, conv)
    rows = []
    for kind, i in reg.keys():
        e = reg.current(kind, i, anchor=MU)
        q = {str(x): n for x, n in sorted(total_q_charge(e).items())}
        rows.append({"name": f"{kind}_{i}", "expression": str(e), "parity": e.parity(), "q_charge": q})
    if args.format == "json":
        out.write(dumps({"m": data.M, "n": data.N, "conventions": _conv_json(conv), "currents": rows}) + "\n")
    else:
        for row in rows:
            out.write(f"{row['name']}(mu) [grade {row['parity']}] = {row['expression']}\n")
    return EXIT_OK


def run(argv: Sequence[str] | None = None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if args.M is None or args.N is None:
        err.write("error: --M and --N are required\n")
        parser.print_usage(err)
        return EXIT_USAGE
    data = build_root_data(args.M, args.N)
    try:
        if args.command == "calibrate":
            conv = calibrate(data)
            if args.format == "json":
                payload = {"m": data.M, "n": data.N, "conventions": dict(_conv_json(conv),
                                                                         delta_scale=conv.delta_scale)}
                out.write(dumps(payload) + "\n")
            else:
                out.write(f"{conv}\n")
            return EXIT_OK
        conv = _conventions(args, data)
        if args.command in ("verify-all", "verify"):
            return _run_verify(args, data, conv, out)
        if args.command == "contractions":
            return _run_contractions(args, data, out)
        return _run_show(args, data, conv, out)
    except NoConsistentConvention as exc:
        err.write(f"calibration failed: {exc}\n")
        for cand, why in sorted(exc.diagnostics.items()):
            err.write(f"  {cand}: {why}\n")
        return EXIT_CALIBRATION
    except UsageError as exc:
        parser.print_usage(err)
        err.write(f"error: {exc}\n")
        return EXIT_USAGE


def main(argv: Sequence[str] | None = None) -> None:
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
