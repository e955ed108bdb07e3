"""Command-line front end: construction, verification, and campaigns.

Exit codes: 0 all checks pass, 1 a mathematical counterexample was found,
2 usage or input error.  Results go to stdout (text by default, stable JSON
with ``--format json``); range campaigns print progress to stderr so
reports stay pipeable.  Timings are only emitted with ``--timing`` so
identical invocations produce byte-identical reports.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from . import algebra, factorizations as fz, starters as st, theorems as th


class UsageError(Exception):
    pass


def _dumps(obj) -> str:
    return json.dumps(obj, indent=2) + "\n"


def _load_json(path: str) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as handle:
            return json.load(handle)
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise UsageError(f"{path} is not valid JSON: {exc}") from exc


def _emit(text: str, out: str | None) -> None:
    if out:
        with open(out, "w", encoding="utf-8") as handle:
            handle.write(text)
    else:
        sys.stdout.write(text)


def _render_witness_text(w, n_vertices: int) -> str:
    obj = fz.witness_to_jsonable(w, n_vertices)
    if "cycle" in obj:
        edges = " ".join(f"({e['u']},{e['v']})@{e['owner']}" for e in obj["edges"])
        return f"4-cycle {obj['cycle']}: {edges}"
    if "factors" in obj:
        return (
            f"{obj['factors'][0]} and {obj['factors'][1]} share "
            f"{obj['count']} edges: {obj['shared_edges']}"
        )
    return obj["finding"]


# ---------------------------------------------------------------------------
# field


def cmd_field(args) -> int:
    field = algebra.make_field(args.q)
    qr = algebra.qr_set(field)
    nqr = algebra.nqr_set(field)
    cls_m1 = algebra.residue_class(field, algebra.minus_one(field))
    cls_2 = algebra.residue_class(field, algebra.two(field))
    if args.format == "json":
        obj = {
            "field": algebra.field_to_jsonable(field),
            "qr_size": len(qr),
            "nqr_size": len(nqr),
            "class_of_minus_one": cls_m1.value,
            "class_of_two": cls_2.value,
        }
        sys.stdout.write(_dumps(obj))
    else:
        lines = [f"q = {field.q} = {field.p}^{field.k}"]
        if field.k > 1:
            lines.append(
                f"reduction polynomial (little-endian) = {list(field.reduction_poly)}"
            )
        lines.append(f"|QR| = {len(qr)}  |NQR| = {len(nqr)}")
        lines.append(f"-1 is {cls_m1.value}")
        lines.append(f"2 is {cls_2.value}")
        sys.stdout.write("\n".join(lines) + "\n")
    return 0


# ---------------------------------------------------------------------------
# starter / factorize input plumbing


def _build_starter(args) -> st.Starter:
    if getattr(args, "starter", None):
        obj = _load_json(args.starter)
        return st.starter_from_jsonable(obj)
    if getattr(args, "zn", None):
        group = st.zn_group(args.zn)
        return st.patterned_starter(group)
    if args.q is None:
        raise UsageError("need --q (with --beta or --kind patterned), --zn, or --starter")
    field = algebra.make_field(args.q)
    kind = getattr(args, "kind", None)
    if kind == "patterned" and getattr(args, "beta", None) is None:
        return st.patterned_starter(st.field_group(field))
    if getattr(args, "beta", None) is None:
        raise UsageError("Horton starter needs --beta")
    return st.horton_starter(field, args.beta)


def cmd_starter(args) -> int:
    starter = _build_starter(args)
    text = _dumps(st.starter_to_jsonable(starter))
    _emit(text, args.out)
    if args.validate:
        report = st.validate_starter(starter.group, starter)
        lines = [
            f"is_starter: {report.is_starter}",
            f"is_strong: {report.is_strong}",
            f"sum_set: {list(report.sum_set)}",
        ]
        lines.extend(f"violation: {v}" for v in report.violations)
        sys.stderr.write("\n".join(lines) + "\n")
        if not report.is_starter:
            return 1
    return 0


def cmd_factorize(args) -> int:
    starter = _build_starter(args)
    report = st.validate_starter(starter.group, starter)
    if not report.is_starter:
        sys.stdout.write("input is not a starter:\n")
        for v in report.violations:
            sys.stdout.write(f"  {v}\n")
        return 1
    fact = fz.factorization_from_starter(starter.group, starter)
    self_check = fz.is_one_factorization(fact)
    if not self_check.passed:
        sys.stdout.write("construction self-check failed:\n")
        for v in self_check.witnesses:
            sys.stdout.write(f"  {v}\n")
        return 1
    _emit(_dumps(fz.factorization_to_jsonable(fact)), args.out)
    return 0


# ---------------------------------------------------------------------------
# verify


def _first_factorization(args) -> fz.OneFactorization:
    if args.factorization:
        return fz.factorization_from_jsonable(_load_json(args.factorization), family="F")
    starter = _build_starter(args)
    report = st.validate_starter(starter.group, starter)
    if not report.is_starter:
        raise fz.InvalidStarter("; ".join(report.violations))
    return fz.factorization_from_starter(starter.group, starter, family="F")


def _second_factorization(args, first: fz.OneFactorization) -> fz.OneFactorization | None:
    if args.factorization2:
        return fz.factorization_from_jsonable(_load_json(args.factorization2), family="G")
    if args.starter2:
        starter = st.starter_from_jsonable(_load_json(args.starter2))
        report = st.validate_starter(starter.group, starter)
        if not report.is_starter:
            raise fz.InvalidStarter("; ".join(report.violations))
        return fz.factorization_from_starter(starter.group, starter, family="G")
    if args.negated:
        if first.starter is None:
            raise UsageError("--negated needs a starter-generated first input")
        neg = st.negate_starter(first.group, first.starter)
        return fz.factorization_from_starter(first.group, neg, family="G")
    if args.beta2 is not None:
        if first.group.field is None:
            raise UsageError("--beta2 needs a field group on the first input")
        starter = st.horton_starter(first.group.field, args.beta2)
        return fz.factorization_from_starter(first.group, starter, family="G")
    return None


def cmd_verify(args) -> int:
    props = [p for p, on in (("c4free", args.c4free), ("totally", args.totally), ("orthogonal", args.orthogonal)) if on]
    if not props:
        raise UsageError("pick at least one of --c4free, --totally, --orthogonal")
    first = _first_factorization(args)
    second = _second_factorization(args, first)
    if (args.totally or args.orthogonal) and second is None:
        raise UsageError("--totally/--orthogonal need a second input "
                         "(--beta2, --negated, --starter2 or --factorization2)")

    base = fz.is_one_factorization(first)
    reports = []
    if not base.passed:
        reports.append(base)
    if second is not None:
        base2 = fz.is_one_factorization(second)
        if not base2.passed:
            reports.append(base2)

    if not reports:  # inputs structurally sound: run the requested properties
        def pick_single_mode(f):
            if args.exhaustive or f.starter is None:
                return "exhaustive"
            return "fast"

        if args.c4free:
            reports.append(fz.factorization_c4_free(first, pick_single_mode(first)))
        if args.totally:
            fast_ok = (
                first.starter is not None
                and second.starter is not None
                and first.group == second.group
            )
            mode = "fast" if fast_ok and not args.exhaustive else "exhaustive"
            reports.append(fz.pair_totally_c4_free(first, second, mode))
        if args.orthogonal:
            reports.append(
                fz.factorizations_orthogonal(
                    first, second, "exhaustive" if args.exhaustive else None
                )
            )

    n_vertices = first.group.order + 1
    all_pass = all(r.passed for r in reports)
    if args.format == "json":
        obj = {
            "schema_version": th.SCHEMA_VERSION,
            "pass": all_pass,
            "checks": [fz.report_to_jsonable(r, n_vertices) for r in reports],
        }
        sys.stdout.write(_dumps(obj))
    else:
        for r in reports:
            status = "PASS" if r.passed else "FAIL"
            sys.stdout.write(f"{r.prop}: {status} (mode={r.mode})\n")
            for w in r.witnesses[: args.max_witnesses]:
                sys.stdout.write(f"  {_render_witness_text(w, n_vertices)}\n")
            extra = len(r.witnesses) - args.max_witnesses
            if extra > 0:
                sys.stdout.write(f"  ... {extra} more witnesses\n")
        sys.stdout.write("result: " + ("PASS" if all_pass else "FAIL") + "\n")
    return 0 if all_pass else 1


# ---------------------------------------------------------------------------
# campaign


def _campaign_fields(args, mod8: bool):
    if args.q is not None:
        lo = hi = args.q
    else:
        lo, hi = args.range_from, args.range_to
        if lo is None or hi is None:
            raise UsageError("campaign needs --q or both --from and --to")
    fields, skipped = (
        th.prime_powers_3mod8(lo, hi) if mod8 else th.prime_powers_3mod4(lo, hi)
    )
    if not fields:
        raise UsageError(f"no admissible prime powers in [{lo}, {hi}]")
    return fields, skipped


def _progress(msg: str) -> None:
    sys.stderr.write(msg + "\n")
    sys.stderr.flush()


def _run_campaign(args) -> list[th.CampaignReport]:
    threads = args.threads
    if args.name == "dinitz":
        if args.q is not None:
            ns = [args.q]
        else:
            lo = args.range_from if args.range_from is not None else 5
            hi = args.range_to if args.range_to is not None else 99
            ns = [n for n in range(lo, hi + 1) if n % 2 == 1]
        report = th.verify_dinitz(ns, threads=threads)
        return [report]

    mode = "exhaustive" if args.exhaustive else "fast"
    if args.name == "horton":
        fields, skipped = _campaign_fields(args, mod8=False)
        reports = []
        for field in fields:
            _progress(f"[horton] q={field.q} ...")
            reports.append(th.verify_horton(field, threads=threads))
        merged = th.merge_reports(
            "horton", {"q_from": fields[0].q, "q_to": fields[-1].q}, reports
        )
        merged.skipped = skipped
        return [merged]
    if args.name == "main":
        fields, skipped = _campaign_fields(args, mod8=False)
        fields = [f for f in fields if f.q >= 11]
        if not fields:
            raise UsageError("main campaign needs q >= 11")
        reports = []
        for field in fields:
            _progress(f"[main] q={field.q} ...")
            reports.append(th.verify_theorem_main(field, mode=mode, threads=threads))
        merged = th.merge_reports(
            "main",
            {"q_from": fields[0].q, "q_to": fields[-1].q, "mode": mode},
            reports,
        )
        merged.skipped = skipped
        return [merged]
    if args.name == "corollary":
        fields, skipped = _campaign_fields(args, mod8=True)
        fields = [f for f in fields if f.q >= 11]
        if not fields:
            raise UsageError("corollary campaign needs q >= 11, q = 3 (mod 8)")
        variants = {
            "paper": ["corollary10_paper"],
            "lemma": ["corollary10_lemma_consistent"],
            "both": ["corollary10_paper", "corollary10_lemma_consistent"],
        }[args.variant]
        out = []
        for variant in variants:
            reports = []
            for field in fields:
                _progress(f"[corollary/{variant}] q={field.q} ...")
                reports.append(
                    th.verify_corollary_mod8(field, variant, mode=mode, threads=threads)
                )
            merged = th.merge_reports(
                "corollary",
                {
                    "q_from": fields[0].q,
                    "q_to": fields[-1].q,
                    "variant": variant,
                    "mode": mode,
                },
                reports,
            )
            merged.skipped = skipped
            out.append(merged)
        return out
    raise UsageError(f"unknown campaign {args.name!r}")


def _render_report_text(report: th.CampaignReport, max_witnesses: int) -> str:
    lines = [f"campaign: {report.campaign}"]
    params = " ".join(f"{k}={v}" for k, v in report.params.items())
    lines.append(f"params: {params}")
    failing = report.failing_rows()
    lines.append(f"rows: {len(report.rows)}  failed: {len(failing)}")
    if report.skipped:
        lines.append(f"skipped non-prime-powers: {report.skipped}")
    for row in failing:
        key = f"q={row.q}"
        if row.beta is not None:
            key += f" beta={row.beta}"
        if row.beta2 is not None:
            key += f" beta2={row.beta2}"
        checks = " ".join(f"{k}={v}" for k, v in row.checks.items())
        lines.append(f"FAIL {key}  {checks}")
        for w in row.witnesses[:max_witnesses]:
            lines.append(f"  {_render_witness_text(w, row.q + 1)}")
        extra = len(row.witnesses) - max_witnesses
        if extra > 0:
            lines.append(f"  ... {extra} more witnesses")
    lines.append("result: " + ("PASS" if report.passed else "FAIL"))
    return "\n".join(lines) + "\n"


def cmd_campaign(args) -> int:
    reports = _run_campaign(args)
    if args.format == "json":
        if len(reports) == 1:
            obj = th.report_to_jsonable(reports[0], include_timing=args.timing)
        else:
            obj = {
                "schema_version": th.SCHEMA_VERSION,
                "campaign": reports[0].campaign,
                "reports": [
                    th.report_to_jsonable(r, include_timing=args.timing)
                    for r in reports
                ],
            }
        sys.stdout.write(_dumps(obj))
    else:
        for report in reports:
            sys.stdout.write(_render_report_text(report, args.max_witnesses))
            if args.timing:
                sys.stdout.write(f"timing_ms: {report.timing_ms:.1f}\n")
    return 0 if all(r.passed for r in reports) else 1


# ---------------------------------------------------------------------------
# parser


def _add_common_inputs(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--q", type=int, help="field order (odd prime power)")
    sub.add_argument("--beta", type=int, help="Horton starter parameter")
    sub.add_argument("--zn", type=int, help="use Z_n with the patterned starter")
    sub.add_argument("--kind", choices=["horton", "patterned"], default=None)
    sub.add_argument("--starter", help="starter JSON file")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="c4free",
        description="Starters, one-factorizations, and exhaustive C4-freeness verification",
    )
    subs = parser.add_subparsers(dest="command", required=True)

    p_field = subs.add_parser("field", help="describe GF(q)")
    p_field.add_argument("--q", type=int, required=True)
    p_field.add_argument("--format", choices=["text", "json"], default="text")
    p_field.set_defaults(func=cmd_field)

    p_starter = subs.add_parser("starter", help="construct a starter and write its file")
    _add_common_inputs(p_starter)
    p_starter.add_argument("--out", help="output path (default stdout)")
    p_starter.add_argument("--validate", action="store_true", help="print the starter report")
    p_starter.set_defaults(func=cmd_starter)

    p_fact = subs.add_parser("factorize", help="expand a starter into a one-factorization")
    _add_common_inputs(p_fact)
    p_fact.add_argument("--out", help="output path (default stdout)")
    p_fact.set_defaults(func=cmd_factorize)

    p_verify = subs.add_parser("verify", help="check C4-freeness / orthogonality properties")
    _add_common_inputs(p_verify)
    p_verify.add_argument("--factorization", help="factorization JSON file (exhaustive only)")
    p_verify.add_argument("--starter2", help="second starter JSON file")
    p_verify.add_argument("--factorization2", help="second factorization JSON file")
    p_verify.add_argument("--beta2", type=int, help="second Horton parameter over the same field")
    p_verify.add_argument("--negated", action="store_true", help="second input = negated first starter")
    p_verify.add_argument("--c4free", action="store_true")
    p_verify.add_argument("--totally", action="store_true")
    p_verify.add_argument("--orthogonal", action="store_true")
    p_verify.add_argument("--exhaustive", action="store_true", help="force exhaustive mode")
    p_verify.add_argument("--format", choices=["text", "json"], default="text")
    p_verify.add_argument("--max-witnesses", type=int, default=5)
    p_verify.set_defaults(func=cmd_verify)

    p_camp = subs.add_parser("campaign", help="run a verification campaign")
    p_camp.add_argument("name", choices=["horton", "dinitz", "main", "corollary"])
    p_camp.add_argument("--q", type=int, help="single order")
    p_camp.add_argument("--from", dest="range_from", type=int, help="range start")
    p_camp.add_argument("--to", dest="range_to", type=int, help="range end")
    p_camp.add_argument(
        "--variant", choices=["paper", "lemma", "both"], default="both",
        help="corollary M2 reading",
    )
    p_camp.add_argument("--threads", type=int, default=os.cpu_count() or 1)
    p_camp.add_argument("--exhaustive", action="store_true")
    p_camp.add_argument("--format", choices=["text", "json"], default="text")
    p_camp.add_argument("--timing", action="store_true", help="include timings in output")
    p_camp.add_argument("--max-witnesses", type=int, default=3)
    p_camp.set_defaults(func=cmd_campaign)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        code = exc.code
        return int(code) if code else 0
    try:
        return args.func(args)
    except fz.InvalidStarter as exc:
        print(f"mathematical failure: {exc}", file=sys.stderr)
        return 1
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (
        algebra.NotPrimePower,
        algebra.EvenOrder,
        st.BadBeta,
        st.BadField,
        fz.FastModeUnavailable,
        fz.TooLarge,
        ValueError,
    ) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
