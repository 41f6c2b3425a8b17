"""opnlab command line: verify, classify, scan, sigma, nearest-square."""

from __future__ import annotations

import argparse
import json
import sys

from . import serialize
from .arith import primality_certainty, profile
from .errors import CandidateRejected, InvalidScanConfig, NonPositiveGap, OpnError, SquareGap
from .eulerian import index_report, perfection_oracle, validate_candidate
from .gap import analyze, nearest_square_argument
from .scan import CSV_COLUMNS, ScanConfig, _csv_line, csv_header, run_scan, scan_to_csv

EXIT_OK = 0
EXIT_INTERNAL = 1
EXIT_REJECTED = 2
EXIT_VIOLATION = 3
EXIT_USAGE = 64
EXIT_IO = 74


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        sys.exit(EXIT_USAGE)


def _case_name(case) -> str:
    return f"Case{int(case)}"


def _emit(text: str) -> None:
    sys.stdout.write(text if text.endswith("\n") else text + "\n")


def _rejection_doc(exc: CandidateRejected) -> dict:
    return {
        "valid": False,
        "candidate": {"p": exc.p, "k": exc.k, "m": exc.m},
        "rejections": [{"code": c, "detail": d} for c, d in exc.reasons],
    }


def _report_rejection(exc: CandidateRejected, fmt: str) -> int:
    if fmt == "json":
        _emit(serialize.dumps(_rejection_doc(exc)))
    elif fmt == "csv":
        _emit("code,detail")
        for code, detail in exc.reasons:
            _emit(f"{code},{detail.replace(',', ';')}")
    else:
        _emit(f"rejected ({exc.p}, {exc.k}, {exc.m})")
        for code, detail in exc.reasons:
            _emit(f"  {code}: {detail}")
    return EXIT_REJECTED


def _verify_doc(c) -> dict:
    idx = index_report(c)
    doc = {
        "valid": True,
        "candidate": {
            "p": c.p,
            "k": c.k,
            "m": c.m,
            "pk": c.pk,
            "N": c.N,
            "pretend_primes": c.pretend_primes,
            "p_primality": "pretend" if c.p in c.pretend_primes else primality_certainty(c.p),
        },
        "perfection": perfection_oracle(c),
        "index": {
            "e1": idx.e1,
            "e2": idx.e2,
            "e3": idx.e3,
            "e4": idx.e4,
            "e5": idx.e5,
            "all_agree": idx.all_agree,
            "perfection_equivalent": idx.perfection_equivalent,
            "degenerate": idx.degenerate,
        },
    }
    gap = c.m * c.m - c.pk
    doc["gap"] = gap
    if gap <= 0:
        doc.update(regime="inverted", analysis_error="NonPositiveGap")
        return doc
    a = analyze(c, sigma_m2=idx.sigma_m2)
    b = a.battery
    v = a.verdict
    doc.update(
        regime="standard",
        decomposition={"gap": gap, "r": a.decomposition.r, "t": a.decomposition.t, "two_r": a.decomposition.two_r},
        case=_case_name(a.case),
        ordering=a.case.ordering,
        verdict={
            "conclusion": v.conclusion,
            "abs_diff_one": v.abs_diff_one,
            "proof_variant_agreement": v.proof_variant_agreement,
            "sandwich": v.sandwich,
            "sandwich_holds": v.sandwich_holds,
            "contrary": v.contrary and {
                "inequality": "2m < 2^r + t + 1",
                "lhs": v.contrary.lhs,
                "rhs": v.contrary.rhs,
                "holds": v.contrary.holds,
                "refutes_pk_lt_m": v.contrary.refutes_pk_lt_m,
            },
            "subtraction_route": v.subtraction_route,
            "sign_route": v.sign_route,
        },
        battery={
            "predicates": [
                {"name": e.name, "holds": e.holds, "kind": e.kind, "witness": e.witness} for e in b.entries
            ],
            "bounds": b.bounds,
            "failed": b.failed,
            "certifies_non_perfection": b.certifies_non_perfection,
        },
    )
    try:
        doc["nearest_square"] = nearest_square_argument(gap, m=c.m, pk=c.pk)
    except SquareGap:
        doc["nearest_square"] = None
    return doc


def cmd_verify(args) -> int:
    try:
        c = validate_candidate(args.p, args.k, args.m, args.pretend_prime)
    except CandidateRejected as exc:
        return _report_rejection(exc, args.format)
    doc = _verify_doc(c)
    if args.format == "json":
        _emit(serialize.dumps(doc))
    elif args.format == "csv":
        _emit(csv_header())
        if doc["regime"] == "standard":
            _emit(_verify_csv_row(doc))
    else:
        _emit(_verify_text(doc))
    return EXIT_OK


def _verify_csv_row(doc) -> str:
    d, v = doc["decomposition"], doc["verdict"]
    preds = {e["name"]: e["holds"] for e in doc["battery"]["predicates"]}
    c = doc["candidate"]
    sandwich = v["sandwich"] or (None, None)
    return _csv_line((
        c["p"], c["k"], c["m"], c["pk"], d["gap"], d["r"], d["t"],
        doc["case"][4:], v["conclusion"].value, v["abs_diff_one"],
        d["t"] == d["two_r"] - 1, primality_certainty(d["t"]) != "composite",
        sandwich[0], sandwich[1],
        preds["gap_not_square"], preds["gap_gt_2m"], preds["gap_gt_m2_over_3"],
        preds["sigma_ratio_ge_7"], preds["pk_ne_2m_minus_1"],
    ))  # fmt: skip


def _verify_text(doc) -> str:
    c, idx = doc["candidate"], doc["index"]
    lines = [
        f"candidate p={c['p']} k={c['k']} m={c['m']}  p^k={c['pk']}  N={c['N']}",
        f"perfect (sigma(N) == 2N): {doc['perfection']}",
        "index: " + "  ".join(f"{n}={idx[n]}" for n in ("e1", "e2", "e3", "e4", "e5"))
        + f"  all_agree={idx['all_agree']}",
        f"gap m^2 - p^k = {doc['gap']}",
    ]
    if doc["regime"] != "standard":
        lines.append("regime: inverted (m^2 <= p^k); gap analysis skipped")
        return "\n".join(lines)
    d, v = doc["decomposition"], doc["verdict"]
    lines.append(f"gap = 2^{d['r']} * {d['t']}   {doc['case']}: {doc['ordering']}")
    line = f"verdict: {v['conclusion'].value}  proof routes agree: {v['proof_variant_agreement']}"
    if v["sandwich"]:
        line += f"  sandwich {v['sandwich'][0]} < m < {v['sandwich'][1]}: {v['sandwich_holds']}"
    lines.append(line)
    for e in doc["battery"]["predicates"]:
        mark = "ok  " if e["holds"] else "FAIL"
        lines.append(f"  [{mark}] {e['name']}" + (" (conjectural)" if e["kind"] != "necessary" else ""))
    if doc["battery"]["certifies_non_perfection"]:
        lines.append("non-perfection certified by: " + ", ".join(doc["battery"]["failed"]))
    return "\n".join(lines)


def _classify_text(a) -> str:
    v = a.verdict
    line = f"r={a.decomposition.r} t={a.decomposition.t} case={int(a.case)} verdict={v.conclusion.value}"
    if v.sandwich:
        line += f" sandwich=({v.sandwich[0]},{v.sandwich[1]})"
    return line


def cmd_classify(args) -> int:
    try:
        c = validate_candidate(args.p, args.k, args.m, args.pretend_prime)
    except CandidateRejected as exc:
        return _report_rejection(exc, args.format)
    try:
        a = analyze(c)
    except NonPositiveGap as exc:
        print(f"opnlab: {exc.code}: {exc}", file=sys.stderr)
        return EXIT_REJECTED
    v = a.verdict
    if args.format == "json":
        _emit(serialize.dumps({
            "r": a.decomposition.r,
            "t": a.decomposition.t,
            "case": _case_name(a.case),
            "verdict": v.conclusion,
            "sandwich": v.sandwich,
        }))  # fmt: skip
    elif args.format == "csv":
        lo, hi = v.sandwich or (None, None)
        _emit("r,t,case,verdict,sandwich_lo,sandwich_hi")
        _emit(_csv_line((a.decomposition.r, a.decomposition.t, int(a.case), v.conclusion.value, lo, hi)))
    else:
        _emit(_classify_text(a))
    return EXIT_OK


def _summary_text(summary, cfg) -> str:
    lines = [
        f"scan m <= {cfg.m_max} (odd), p^k <= {cfg.pk_max}",
        f"candidates: {summary.total_candidates}",
        "per case: " + " ".join(f"{c}:{n}" for c, n in summary.per_case.items()),
        f"m<p^k proven: {summary.proven_m_lt_pk}  open: {summary.open}  "
        f"p^k<m via |2^r-t|=1: {summary.proven_pk_lt_m}  impossible: {summary.impossible}",
        f"|2^r-t|=1: {summary.abs_diff_one}  t=2^r-1: {summary.t_mersenne}  t prime: {summary.t_prime}  "
        f"t=2^r-1 prime: {summary.conjecture_holds}",
        f"gap in {{8,40}}: {summary.gap_8_or_40} (m<p^k: {summary.gap_8_or_40_m_lt_pk})",
    ]
    if summary.inverted:
        lines.append(f"inverted regime (m^2 < p^k): {summary.inverted}")
    lines.append(f"violations: {len(summary.violations)}")
    for v in summary.violations[:20]:
        lines.append(f"  ({v['p']}, {v['k']}, {v['m']}): {v['reason']}")
    return "\n".join(lines)


def _record_doc(rec) -> dict:
    doc = {c: getattr(rec, c) for c in CSV_COLUMNS}
    doc["sandwich_holds"] = rec.sandwich_holds
    doc["regime"] = rec.regime
    return doc


def cmd_scan(args) -> int:
    try:
        cfg = ScanConfig(
            m_max=args.m_max,
            pk_max=args.pk_max,
            require_positive_gap=not args.include_inverted,
            workers=args.workers,
            audit=args.audit,
        )
    except InvalidScanConfig as exc:
        raise UsageError(str(exc)) from exc

    if args.out:
        try:
            out = open(args.out, "w", encoding="utf-8", newline="")
            summary_out = open(args.out + ".summary.json", "w", encoding="utf-8")
        except OSError as exc:
            print(f"cannot write output: {exc}", file=sys.stderr)
            return EXIT_IO
        with out, summary_out:
            if args.format == "json":
                records, summary = run_scan(cfg)
                json.dump(serialize.to_jsonable([_record_doc(r) for r in records]), out, indent=1)
                out.write("\n")
            else:
                summary = scan_to_csv(cfg, out)
            summary_out.write(serialize.dumps({"config": cfg, "summary": summary}) + "\n")
        if args.format == "json":
            _emit(serialize.dumps({"config": cfg, "summary": summary}))
        else:
            _emit(_summary_text(summary, cfg))
    elif args.format == "json":
        records, summary = run_scan(cfg)
        _emit(serialize.dumps({
            "config": cfg,
            "summary": summary,
            "records": [_record_doc(r) for r in records],
        }))  # fmt: skip
    elif args.format == "csv":
        summary = scan_to_csv(cfg, sys.stdout)
        print(_summary_text(summary, cfg), file=sys.stderr)
    else:
        _, summary = run_scan(cfg)
        _emit(_summary_text(summary, cfg))
    return EXIT_OK if summary.ok else EXIT_VIOLATION


def cmd_sigma(args) -> int:
    if args.n < 1:
        raise UsageError(f"--n must be >= 1, got {args.n}")
    prof = profile(args.n, args.pretend_prime)
    if args.format == "json":
        _emit(serialize.dumps({
            "n": prof.n,
            "sigma": prof.sigma,
            "deficiency": prof.deficiency,
            "aliquot": prof.aliquot,
            "abundancy": prof.abundancy,
            "perfect": prof.is_perfect,
            "factorization": [{"prime": p, "exponent": e} for p, e in prof.factorization],
            "pretend_primes": prof.factorization.pretend_primes,
        }))  # fmt: skip
    elif args.format == "csv":
        _emit("n,sigma,deficiency,aliquot,abundancy,perfect,factorization")
        _emit(_csv_line((prof.n, prof.sigma, prof.deficiency, prof.aliquot, prof.abundancy,
                         prof.is_perfect, str(prof.factorization))))  # fmt: skip
    else:
        _emit(
            f"n = {prof.n} = {prof.factorization}\n"
            f"sigma = {prof.sigma}\ndeficiency D = {prof.deficiency}\naliquot s = {prof.aliquot}\n"
            f"abundancy = {prof.abundancy}\nperfect: {prof.is_perfect}"
        )
    return EXIT_OK


def cmd_nearest_square(args) -> int:
    try:
        arg = nearest_square_argument(args.gap, m=args.m, allow_square=args.allow_square)
    except (SquareGap, NonPositiveGap) as exc:
        print(f"opnlab: {exc.code}: {exc}", file=sys.stderr)
        return EXIT_REJECTED
    if args.format == "json":
        _emit(serialize.dumps(arg))
    elif args.format == "csv":
        _emit("gap,q,surplus,side_condition")
        _emit(_csv_line((arg.gap, arg.q, arg.surplus, arg.side_condition)))
    else:
        lines = [
            f"gap = {arg.gap}; nearest larger square q^2 = {arg.q}^2 = {arg.q * arg.q}; surplus = {arg.surplus}",
            f"(m + {arg.q})(m - {arg.q}) = m^2 - {arg.q * arg.q} = p^k - {arg.surplus}",
            f"valid only when {arg.side_condition}; then {arg.conclusion}",
        ]
        if arg.instance:
            i = arg.instance
            lines.append(
                f"instance m={i.m}, p^k={i.pk}: identity {i.identity_holds}, "
                f"side condition {i.side_condition_holds}, divides {i.divides}, m<p^k by argument {i.concludes_m_lt_pk}"
            )
        _emit("\n".join(lines))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="opnlab", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def fmt(p, default="text"):
        p.add_argument("--format", choices=("json", "csv", "text"), default=default)

    def pretend(p):
        p.add_argument("--pretend-prime", type=int, action="append", default=[], metavar="Q",
                       help="treat Q as prime without testing (repeatable)")  # fmt: skip

    for name, func in (("verify", cmd_verify), ("classify", cmd_classify)):
        p = sub.add_parser(name)
        p.add_argument("--p", type=int, required=True)
        p.add_argument("--k", type=int, required=True)
        p.add_argument("--m", type=int, required=True)
        fmt(p)
        pretend(p)
        p.set_defaults(func=func)

    p = sub.add_parser("scan")
    p.add_argument("--m-max", type=int, required=True)
    p.add_argument("--pk-max", type=int, required=True)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out", help="records file; the summary goes to OUT.summary.json")
    p.add_argument("--include-inverted", action="store_true", help="also emit candidates with m^2 < p^k")
    p.add_argument("--audit", action="store_true", help="re-derive every record via the reference path")
    fmt(p)
    p.set_defaults(func=cmd_scan)

    p = sub.add_parser("sigma")
    p.add_argument("--n", type=int, required=True)
    fmt(p)
    pretend(p)
    p.set_defaults(func=cmd_sigma)

    p = sub.add_parser("nearest-square")
    p.add_argument("--gap", type=int, required=True)
    p.add_argument("--m", type=int, help="check the argument on this m (p^k = m^2 - gap)")
    p.add_argument("--allow-square", action="store_true")
    fmt(p)
    p.set_defaults(func=cmd_nearest_square)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"opnlab: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OpnError as exc:
        print(f"opnlab: {exc.code}: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    except BrokenPipeError:
        return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
