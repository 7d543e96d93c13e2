"""Command-line front end.

Commands: ``analyze`` a family file, search the robust ``margin``, print
``kharitonov`` vertex and edge sets, materialize a built-in ``example``, and
``compare`` testing-set strategies. Reports go to stdout (JSON is the
machine contract, the table form is for humans); diagnostics go to stderr.

Exit codes: 0 robustly stable, 1 not stable (witness printed), 2 marginal or
undecided, 3 input error.
"""

from __future__ import annotations

import argparse
import json
import sys

from .datasets import EXAMPLE_BUILDERS
from .family import AssumptionAViolation, counts_report
from .familyfile import FamilyFile, FamilyFileError, dump_family, load_family, parse_family
from .interval_poly import IntervalPolynomial, kharitonov_edges, kharitonov_vertices
from .verify import (
    CheckConfig,
    Verdict,
    check_family,
    compare_sets,
    margin_bisect,
    oracle_family,
    value_set_profile,
)

EXIT_STABLE = 0
EXIT_UNSTABLE = 1
EXIT_MARGINAL = 2
EXIT_INPUT = 3


def _config_from_args(args) -> CheckConfig:
    return CheckConfig(
        grid_points_per_axis=args.grid,
        freq_points=args.freq_points,
        margin_tol=args.margin_tol,
        method=args.method.replace("-", "_") if hasattr(args, "method") else "grid",
    )


def _add_common_check_args(parser):
    parser.add_argument("--grid", type=int, default=33, help="grid points per lambda axis")
    parser.add_argument("--freq-points", type=int, default=512, help="frequency samples")
    parser.add_argument("--margin-tol", type=float, default=1e-9, help="Routh pivot tolerance")
    parser.add_argument("--jobs", type=int, default=None,
                        help="worker threads (default: EDGEGUARD_JOBS or 1)")


def _verdict_exit(verdict: Verdict) -> int:
    if verdict.marginal:
        return EXIT_MARGINAL
    return EXIT_STABLE if verdict.stable else EXIT_UNSTABLE


def _print_verdict(verdict: Verdict, output: str) -> None:
    if output == "json":
        print(json.dumps(verdict.to_json(), sort_keys=True))
        return
    rows = [
        ("stable", verdict.stable),
        ("patterns", verdict.patterns),
        ("problems_checked", verdict.problems_checked),
        ("routh_evaluations", verdict.routh_evaluations),
        ("wall_time_ms", f"{verdict.wall_time * 1000.0:.1f}"),
        ("marginal", len(verdict.marginal)),
    ]
    for key, value in rows:
        print(f"{key:<20}{value}")
    if verdict.witness is not None:
        print("witness:")
        for key, value in sorted(verdict.witness.to_json().items()):
            print(f"  {key:<18}{value}")


def cmd_analyze(args) -> int:
    try:
        ff = load_family(args.path)
    except FamilyFileError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    cfg = _config_from_args(args)
    try:
        if args.set == "oracle":
            verdict = oracle_family(ff.family, cfg, points_per_coeff=args.oracle_points)
        else:
            verdict = check_family(ff.family, cfg, args.set, jobs=args.jobs)
    except AssumptionAViolation as exc:
        print(f"undecided: {exc}", file=sys.stderr)
        return EXIT_MARGINAL
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT

    if args.emit_valueset:
        _dump_valueset(ff, cfg, args.emit_valueset)
    _print_verdict(verdict, args.output)
    return _verdict_exit(verdict)


def _dump_valueset(ff: FamilyFile, cfg: CheckConfig, path: str) -> None:
    from .family import enumerate_minimal

    problems = enumerate_minimal(ff.family)
    worst = None
    profile = None
    for tp in problems[: min(len(problems), 32)]:
        rows = value_set_profile(tp, ff.family, cfg)
        low = min(r[1] for r in rows)
        if worst is None or low < worst[0]:
            worst = (low, tp.provenance)
            profile = rows
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("omega,min_modulus_ratio,re,im\n")
        for omega, ratio, re, im in profile or ():
            fh.write(f"{omega!r},{ratio!r},{re!r},{im!r}\n")
    print(f"value-set profile ({worst[1]}) written to {path}", file=sys.stderr)


def cmd_margin(args) -> int:
    try:
        ff = load_family(args.path)
    except FamilyFileError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    if not ff.has_scale:
        print("error: margin search needs a scale record in the family file",
              file=sys.stderr)
        return EXIT_INPUT
    cfg = _config_from_args(args)
    try:
        result = margin_bisect(
            ff.at_epsilon,
            cfg,
            tol=args.tol,
            set_choice=args.set,
            jobs=args.jobs,
        )
    except ValueError as exc:
        print(f"unstable at the nominal family: {exc}", file=sys.stderr)
        return EXIT_UNSTABLE
    print(json.dumps(
        {
            "eps_star": result.eps_star,
            "last_stable": result.last_stable,
            "first_unstable": result.first_unstable,
            "checks": result.evaluations,
            "tol": args.tol,
        },
        sort_keys=True,
    ))
    return EXIT_STABLE


def cmd_kharitonov(args) -> int:
    try:
        with open(args.path, "r", encoding="utf-8") as fh:
            payload = json.load(fh)
        ip = IntervalPolynomial(payload)
    except (OSError, json.JSONDecodeError, ValueError, TypeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT

    distinct: list = []
    for idx in (1, 2, 3, 4):
        v = ip.vertex(idx)
        dup = next((f"r{k}" for k in range(1, idx) if ip.vertex(k) == v), None)
        if dup:
            print(f"r{idx}: duplicate of {dup}")
        else:
            distinct.append(v)
            print(f"r{idx}: {v}")
    print(f"vertices: {len(distinct)}")
    edges = kharitonov_edges(ip)
    for e in edges:
        i, j = e.pair_tag
        print(f"edge ({i},{j}): lam*[{e.endpoint_a}] + (1-lam)*[{e.endpoint_b}]")
    print(f"edges: {len(edges)}")
    return EXIT_STABLE


def cmd_example(args) -> int:
    builder = EXAMPLE_BUILDERS.get(args.name)
    if builder is None:
        known = ", ".join(sorted(EXAMPLE_BUILDERS))
        print(f"error: unknown example {args.name!r} (known: {known})", file=sys.stderr)
        return EXIT_INPUT
    try:
        payload = builder(args.epsilon)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    ff = parse_family(payload)
    if args.emit:
        with open(args.emit, "w", encoding="utf-8") as fh:
            fh.write(dump_family(ff))
        print(f"family file written to {args.emit}", file=sys.stderr)

    report = counts_report(ff.family)
    print(json.dumps(
        {
            "example": args.name,
            "epsilon": args.epsilon,
            "minimal": report.minimal.__dict__,
            "kamal_dahleh": report.kamal_dahleh.__dict__,
        },
        sort_keys=True,
    ))
    if args.set:
        cfg = _config_from_args(args)
        try:
            verdict = check_family(ff.family, cfg, args.set, jobs=args.jobs)
        except AssumptionAViolation as exc:
            print(f"undecided: {exc}", file=sys.stderr)
            return EXIT_MARGINAL
        _print_verdict(verdict, "json")
        return _verdict_exit(verdict)
    return EXIT_STABLE


def cmd_compare(args) -> int:
    try:
        ff = load_family(args.path)
    except FamilyFileError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    cfg = _config_from_args(args)
    try:
        report = compare_sets(
            ff.family,
            cfg,
            include_oracle=not args.no_oracle,
            oracle_points=args.oracle_points,
            jobs=args.jobs,
        )
    except AssumptionAViolation as exc:
        print(f"undecided: {exc}", file=sys.stderr)
        return EXIT_MARGINAL

    header = f"{'set':<10}{'stable':<8}{'patterns':<10}{'problems':<10}" \
             f"{'max_dim':<9}{'routh_evals':<14}{'wall_ms':<12}{'marginal':<9}"
    print(header)
    any_marginal = False
    stable_values = []
    for row in report.rows:
        if "skipped" in row:
            print(f"{row['set']:<10}skipped: {row['skipped']}")
            continue
        any_marginal |= bool(row["marginal"])
        stable_values.append(row["stable"])
        print(
            f"{row['set']:<10}{str(row['stable']):<8}"
            f"{str(row['patterns']):<10}{row['problems']:<10}"
            f"{str(row['max_dimension']):<9}{row['routh_evaluations']:<14}"
            f"{row['wall_time'] * 1000.0:<12.1f}{row['marginal']:<9}"
        )
    if not report.verdicts_agree:
        print("verdict disagreement: flagged for investigation", file=sys.stderr)
        return EXIT_MARGINAL
    if any_marginal:
        return EXIT_MARGINAL
    return EXIT_STABLE if all(stable_values) else EXIT_UNSTABLE


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="edgeguard",
        description="Robust Hurwitz stability of MIMO interval control families",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", help="decide robust stability of a family file")
    p.add_argument("path")
    p.add_argument("--set", choices=("minimal", "kd", "oracle"), default="minimal")
    p.add_argument("--method", choices=("grid", "zero-exclusion", "both"), default="grid")
    p.add_argument("--output", choices=("json", "table"), default="json")
    p.add_argument("--oracle-points", type=int, default=3)
    p.add_argument("--emit-valueset", metavar="PATH", default=None,
                   help="write a CSV value-set profile (no plotting)")
    _add_common_check_args(p)
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("margin", help="bisect the robust stability margin")
    p.add_argument("path")
    p.add_argument("--tol", type=float, default=1e-3)
    p.add_argument("--set", choices=("minimal", "kd"), default="minimal")
    p.add_argument("--method", choices=("grid", "zero-exclusion", "both"), default="grid")
    _add_common_check_args(p)
    p.set_defaults(func=cmd_margin)

    p = sub.add_parser("kharitonov", help="print vertex and edge sets of an "
                                          "interval polynomial file")
    p.add_argument("path")
    p.set_defaults(func=cmd_kharitonov)

    p = sub.add_parser("example", help="materialize a built-in example family")
    p.add_argument("name")
    p.add_argument("--epsilon", type=float, default=0.0)
    p.add_argument("--emit", metavar="PATH", default=None)
    p.add_argument("--set", choices=("minimal", "kd"), default=None,
                   help="also run a stability analysis with this testing set")
    p.add_argument("--method", choices=("grid", "zero-exclusion", "both"), default="grid")
    _add_common_check_args(p)
    p.set_defaults(func=cmd_example)

    p = sub.add_parser("compare", help="compare testing-set strategies on one family")
    p.add_argument("path")
    p.add_argument("--oracle-points", type=int, default=3)
    p.add_argument("--no-oracle", action="store_true")
    p.add_argument("--method", choices=("grid", "zero-exclusion", "both"), default="grid")
    _add_common_check_args(p)
    p.set_defaults(func=cmd_compare)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
