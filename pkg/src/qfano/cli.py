"""Command-line front end.

Exit codes: 0 success, 1 a checked assertion failed, 2 bad input.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from pathlib import Path
from typing import Callable, Optional, Sequence

from .basket import BasketError
from .catalog import (
    CatalogError,
    diff_catalogs,
    entries_from_report,
    import_catalog,
    parse_basket_text,
    render_basket,
    report_from_json,
    report_to_dict,
    report_to_json,
    write_catalog,
)
from .riemann_roch import (
    FanoCandidate,
    bogomolov_valid,
    euler_char,
    hilbert_profile,
    integrality_valid,
    vanishing_valid,
)
from .search import (
    COUNT_TARGETS,
    ConfigError,
    SearchConfig,
    SearchReport,
    applicability_count,
    check_pencil_pattern,
    check_prop_search1,
    constraint_diff,
    enumerate_candidates,
    reproduce_counts,
)
from .wps import CALIBRATION_WEIGHTS, EXTRA_CALIBRATION_WEIGHTS, monomial_count, wps_candidate

OK, FAILED, BAD_INPUT = 0, 1, 2


class InputError(Exception):
    pass


def _frac(x) -> str:
    x = Fraction(x)
    return f"{x.numerator}/{x.denominator}"


def _emit(args, data: dict, table: Callable[[dict], str]) -> None:
    if args.format == "json":
        sys.stdout.write(json.dumps(data, sort_keys=True, indent=1) + "\n")
    else:
        sys.stdout.write(table(data).rstrip("\n") + "\n")


def _fraction_arg(s: str) -> Fraction:
    try:
        return Fraction(s)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a fraction: {s!r}") from None


def _rows(pairs) -> str:
    width = max((len(k) for k, _ in pairs), default=0)
    return "\n".join(f"{k.ljust(width)}  {v}" for k, v in pairs)


# ------------------------------------------------------------ hilbert


def cmd_hilbert(args) -> int:
    try:
        cand = FanoCandidate(args.q, parse_basket_text(args.basket), args.a3, provenance="command line")
    except (ValueError, BasketError) as exc:
        raise InputError(str(exc)) from None
    valid = integrality_valid(cand, args.horizon)
    data = {
        "q": cand.q, "a3": _frac(cand.a3), "basket": render_basket(cand.basket),
        "sigma": _frac(cand.sigma), "valid": valid,
        "vanishing": vanishing_valid(cand), "bogomolov": bogomolov_valid(cand),
    }
    if valid:
        prof = hilbert_profile(cand, args.horizon)
        data["h0"] = list(prof.h0)
        data["df"] = prof.df
    else:
        data["chi"] = [_frac(euler_char(cand, n)) for n in range(args.horizon + 1)]

    def table(d):
        out = [("q", d["q"]), ("A^3", d["a3"]), ("basket", d["basket"]), ("sigma", d["sigma"]),
               ("valid", d["valid"]), ("vanishing", d["vanishing"]), ("bogomolov", d["bogomolov"])]
        if "h0" in d:
            out.append(("df", d["df"]))
            out += [(f"h0({n}A)", v) for n, v in enumerate(d["h0"])]
        else:
            out += [(f"chi({n}A)", v) for n, v in enumerate(d["chi"])]
        return _rows(out)

    _emit(args, data, table)
    return OK if valid else FAILED


# ------------------------------------------------------------ search


def _config_from(args, **over) -> SearchConfig:
    try:
        return SearchConfig(
            q_min=over.get("q_min", args.q_min), q_max=over.get("q_max", args.q_max),
            degree_cap=args.degree_cap, bogomolov=not args.no_bogomolov,
            vanishing=not args.no_vanishing, grid_policy=args.grid_policy,
            grid_denominator=args.grid_denominator, horizon=args.horizon,
            df_filter=over.get("df_filter", args.df), workers=args.workers,
        )
    except ConfigError as exc:
        raise InputError(str(exc)) from None


def _summary(report: SearchReport) -> dict:
    return {
        "count": len(report),
        "by_q": {str(k): v for k, v in report.by_q().items()},
        "distinct_hilbert_series": report.distinct_hilbert_series_count,
        "df>=2": applicability_count(report),
        "2<=df<=3": applicability_count(report, 2, 3),
    }


def cmd_search(args) -> int:
    report = enumerate_candidates(_config_from(args))
    if args.out:
        Path(args.out).write_text(report_to_json(report))
    data = report_to_dict(report) if (args.format == "json" and not args.out) else _summary(report)

    def table(d):
        out = [("candidates", d["count"]), ("distinct Hilbert series", d["distinct_hilbert_series"]),
               ("df >= 2", d["df>=2"]), ("2 <= df <= 3", d["2<=df<=3"])]
        out += [(f"q = {k}", v) for k, v in d["by_q"].items()]
        return _rows(out)

    _emit(args, data, table)
    return OK


# ------------------------------------------------------------ check-props


def _load_report(path: str) -> SearchReport:
    try:
        return report_from_json(Path(path).read_text())
    except OSError as exc:
        raise InputError(str(exc)) from None


def cmd_check_props(args) -> int:
    if args.report:
        high = _load_report(args.report)
        high = SearchReport(high.config, tuple(p for p in high.candidates if p.candidate.q >= 3))
    else:
        high = enumerate_candidates(SearchConfig(q_min=3, q_max=19, workers=args.workers))
    df3 = SearchReport(high.config, tuple(p for p in high.candidates if p.df == 3))
    records = check_prop_search1(df3)
    hits = check_pencil_pattern(high)
    rows = [{"name": r.name, "passed": r.passed, "detail": r.detail} for r in records]
    rows.append({"name": "no pencil pattern h0(kA)=2, h0(2kA)=3 with 2k<q", "passed": not hits,
                 "detail": "; ".join(f"{p.candidate.q} {p.candidate.basket} k={k}" for p, k in hits)})
    data = {"assertions": rows, "df3_series": df3.distinct_hilbert_series_count,
            "q_values": sorted({p.candidate.q for p in df3.candidates})}
    if args.counts:
        got, recs = reproduce_counts(SearchConfig(workers=args.workers))
        data["counts"] = {k: {"got": got[k], "target": COUNT_TARGETS[k]} for k in got}
        rows += [{"name": f"count {r.name}", "passed": r.passed, "detail": r.detail} for r in recs]
        if not all(r.passed for r in recs):
            base = SearchConfig(q_min=3, q_max=19)
            data["constraint_diff"] = constraint_diff(base, degree_cap=Fraction(72), vanishing=False)

    def table(d):
        lines = [f"{'PASS' if r['passed'] else 'FAIL'}  {r['name']}" + (f"  [{r['detail']}]" if r["detail"] else "")
                 for r in d["assertions"]]
        lines.append(f"df = 3 series: {d['df3_series']}, q values {d['q_values']}")
        if "constraint_diff" in d:
            lines.append("constraint diff: " + json.dumps(d["constraint_diff"], sort_keys=True))
        return "\n".join(lines)

    _emit(args, data, table)
    return OK if all(r["passed"] for r in rows) else FAILED


# ------------------------------------------------------------ link


def cmd_link(args) -> int:
    from .link.cases import case_41478, expected_outcome, qds_scenarios, torsion_scenarios
    from .link.engine import apply_rules, replay_trace
    from .link.io import ScenarioError, load_scenario, trace_to_dict

    expect: list[Optional[str]] = []
    if args.case == "file" or args.file:
        if not args.file:
            raise InputError("--case file needs --file PATH")
        try:
            scn, doc = load_scenario(Path(args.file).read_text())
        except (OSError, ScenarioError) as exc:
            raise InputError(str(exc)) from None
        scenarios = [scn]
        expect = [doc.get("expect")]
    else:
        scenarios = {
            "qds": qds_scenarios,
            "torsion": torsion_scenarios,
            "41478": lambda: [case_41478()],
            "all": lambda: qds_scenarios() + [case_41478()],
        }[args.case]()
        expect = [expected_outcome(s).value for s in scenarios]
    results = []
    ok = True
    for scn, want in zip(scenarios, expect):
        trace = apply_rules(scn)
        replays = replay_trace(trace)
        d = trace_to_dict(trace)
        d["replays"] = replays
        d["expected"] = want
        good = replays and (want is None or want == trace.outcome.value)
        d["matches"] = good
        ok = ok and good
        if not args.trace:
            d.pop("steps")
        results.append(d)

    def table(d):
        lines = []
        for r in d["scenarios"]:
            flag = "ok" if r["matches"] else "MISMATCH"
            lines.append(f"{flag:8}  {r['summary']}")
            for s in r.get("steps", []):
                mark = "x" if s["kill"] else " "
                lines.append(f"      {s['rule']:8} {mark} {s['fact']}")
        return "\n".join(lines)

    _emit(args, {"scenarios": results}, table)
    return OK if ok else FAILED


# ------------------------------------------------------------ calibrate


def cmd_calibrate(args) -> int:
    spaces = CALIBRATION_WEIGHTS + (EXTRA_CALIBRATION_WEIGHTS if not args.basic else ())
    rows = []
    for w in spaces:
        cand = wps_candidate(w)
        prof = hilbert_profile(cand, args.horizon)
        bad = [n for n in range(args.horizon + 1) if prof.h0[n] != monomial_count(w, n)]
        rows.append({"weights": list(w), "q": cand.q, "a3": _frac(cand.a3),
                     "basket": render_basket(cand.basket), "passed": not bad, "mismatches": bad})

    def table(d):
        return "\n".join(
            f"{'PASS' if r['passed'] else 'FAIL'}  P{tuple(r['weights'])}  q={r['q']}  A^3={r['a3']}  {r['basket']}"
            + (f"  mismatches at n={r['mismatches']}" if r["mismatches"] else "")
            for r in d["spaces"])

    _emit(args, {"spaces": rows, "horizon": args.horizon}, table)
    return OK if all(r["passed"] for r in rows) else FAILED


# ------------------------------------------------------------ catalog


def _catalog(path: str):
    try:
        return import_catalog(path)
    except OSError as exc:
        raise InputError(str(exc)) from None


def cmd_catalog_import(args) -> int:
    entries = _catalog(args.file)
    data = {"entries": [{"id": e.id, "q": e.q, "a3": _frac(e.a3), "basket": render_basket(e.basket),
                         "pins": {str(n): v for n, v in e.pins}} for e in entries]}

    def table(d):
        return "\n".join(f"{e['id']}  q={e['q']}  A^3={e['a3']}  {e['basket']}" for e in d["entries"]) \
            or "no entries"

    _emit(args, data, table)
    return OK


def cmd_catalog_diff(args) -> int:
    theirs = _catalog(args.file)
    if args.report:
        ours = _load_report(args.report)
    else:
        ours = enumerate_candidates(_config_from(args))
    diff = diff_catalogs(ours, theirs)
    data = diff.as_dict()

    def table(d):
        lines = [f"matched {d['matched']}, ours only {len(d['ours_only'])}, "
                 f"theirs only {len(d['theirs_only'])}, pin mismatches {len(d['pin_mismatches'])}"]
        lines += [f"theirs only: {e['id']} q={e['q']} A^3={e['a3']} {e['basket']} (line {e['line']})"
                  for e in d["theirs_only"]]
        lines += [f"ours only: {c['id']}" for c in d["ours_only"][:50]]
        lines += [f"pin mismatch: {m['id']} h0({m['n']}A) pinned {m['pinned']}, computed {m['computed']}"
                  for m in d["pin_mismatches"]]
        return "\n".join(lines)

    _emit(args, data, table)
    return OK if diff.empty else FAILED


def cmd_catalog_export(args) -> int:
    report = _load_report(args.report)
    pins = [int(x) for x in args.pins.split(",") if x.strip()] if args.pins else []
    text = write_catalog(entries_from_report(report, pins))
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return OK


# ------------------------------------------------------------ parser


def _search_flags(p: argparse.ArgumentParser, q_min: int = 2, q_max: int = 19) -> None:
    p.add_argument("--q-min", type=int, default=q_min)
    p.add_argument("--q-max", type=int, default=q_max)
    p.add_argument("--df", type=int, default=None, help="keep only candidates with this df")
    p.add_argument("--degree-cap", type=_fraction_arg, default=None,
                   help="bound on q^3 A^3 (default: none, the Bogomolov-type bound applies)")
    p.add_argument("--no-bogomolov", action="store_true", help="drop the Bogomolov-type degree bound")
    p.add_argument("--no-vanishing", action="store_true", help="drop the chi(-tA) = 0 filter")
    p.add_argument("--grid-policy", choices=("lattice", "product", "denominator"), default="lattice")
    p.add_argument("--grid-denominator", type=int, default=None)
    p.add_argument("--horizon", type=int, default=24)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("table", "json"), default="table")
    common.add_argument("--workers", type=int, default=1, help="processes for searches")

    parser = argparse.ArgumentParser(prog="qfano", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("hilbert", parents=[common], help="h0 table, df and validity of one candidate")
    p.add_argument("--q", type=int, required=True)
    p.add_argument("--basket", default="()", help='"(2,3,13:6)" or "1/2(1,1,1);1/13(1,12,6)"')
    p.add_argument("--a3", type=_fraction_arg, required=True)
    p.add_argument("--horizon", type=int, default=24)
    p.set_defaults(func=cmd_hilbert)

    p = sub.add_parser("search", parents=[common], help="enumerate numerical candidates")
    _search_flags(p)
    p.add_argument("--out", help="write the full JSON report here")
    p.set_defaults(func=cmd_search)

    p = sub.add_parser("check-props", parents=[common], help="structural claims about the df = 3 list")
    p.add_argument("--report", help="JSON report from `search` (default: run the q >= 3 search)")
    p.add_argument("--counts", action="store_true", help="also reproduce the published counts")
    p.set_defaults(func=cmd_check_props)

    p = sub.add_parser("link", parents=[common], help="run link scenarios")
    p.add_argument("--case", choices=("qds", "torsion", "41478", "all", "file"), default="qds")
    p.add_argument("--file", help="scenario JSON (implies --case file)")
    p.add_argument("--trace", action="store_true", help="include every rule step")
    p.set_defaults(func=cmd_link)

    p = sub.add_parser("calibrate", parents=[common], help="weighted projective space checks")
    p.add_argument("--horizon", type=int, default=24)
    p.add_argument("--basic", action="store_true", help="only the five basic spaces")
    p.set_defaults(func=cmd_calibrate)

    p = sub.add_parser("catalog", help="external catalog import and diff")
    csub = p.add_subparsers(dest="catalog_command", required=True)
    c = csub.add_parser("import", parents=[common], help="parse and validate a catalog CSV")
    c.add_argument("file")
    c.set_defaults(func=cmd_catalog_import)
    c = csub.add_parser("diff", parents=[common], help="compare a catalog CSV with a search")
    c.add_argument("file")
    c.add_argument("--report", help="JSON report (default: run a search with the flags below)")
    _search_flags(c)
    c.set_defaults(func=cmd_catalog_diff)
    c = csub.add_parser("export", parents=[common], help="write a report as catalog CSV")
    c.add_argument("--report", required=True)
    c.add_argument("--pins", help="comma-separated n values to pin, e.g. 1,2,6")
    c.add_argument("--out")
    c.set_defaults(func=cmd_catalog_export)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return BAD_INPUT if exc.code else OK
    try:
        return args.func(args)
    except (InputError, CatalogError, BasketError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return BAD_INPUT


if __name__ == "__main__":
    sys.exit(main())
