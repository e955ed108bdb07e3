"""Residue conditions, M-sets, witness searches, and verification campaigns.

Campaigns re-check the structural claims about Horton starters computationally
and report per-(q, beta) outcomes with explicit witnesses for any violation.
Known looseness is treated as data, not a crash: within-family C4-freeness is
recorded per beta independently of the sufficient residue condition, and both
readings of the mod-8 corollary's second M-set are computed and reported.

Note on the negated family: the companion factorization of S_beta is built
from the negated starter -S_beta (whose translates are exactly the G_i
factors in the cross-freeness argument); a Horton starter with parameter
-beta would be ill-formed because -beta is a quadratic residue.
"""

from __future__ import annotations

import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field as dc_field

from . import algebra, factorizations as fz, starters as st
from .algebra import FieldSpec, ResidueClass
from .starters import BadBeta, BadField

SCHEMA_VERSION = 1


# ---------------------------------------------------------------------------
# Residue condition profiles.


@dataclass(frozen=True, slots=True)
class ConditionProfile:
    """Residue classes of the expressions the C4-freeness lemmas test."""

    beta: int
    plus_one: ResidueClass            # beta + 1
    minus_one: ResidueClass           # beta - 1
    square_plus_one: ResidueClass     # beta^2 + 1
    lemma6_ratio: ResidueClass        # (beta^2 + 1) / (beta - 1)
    half_square_plus_one: ResidueClass  # (beta^2 + 1) / 2
    half_minus_one: ResidueClass      # (beta - 1) / 2
    beta_cubed_is_minus_one: bool
    beta_excluded: bool               # beta in {2, 1/2, -1}


def _require_3mod4(field: FieldSpec) -> None:
    if field.q % 4 != 3:
        raise BadField(f"q = {field.q} is not 3 (mod 4)")


def condition_profile(field: FieldSpec, beta: int) -> ConditionProfile:
    _require_3mod4(field)
    if algebra.residue_class(field, beta) is not ResidueClass.NQR:
        raise BadBeta(f"beta = {beta} must be a non-residue")
    m1 = algebra.minus_one(field)
    if beta == m1:
        raise BadBeta("beta = -1 is excluded")
    two = algebra.two(field)
    sq_plus_1 = algebra.add(field, algebra.mul(field, beta, beta), 1)
    if sq_plus_1 == 0:
        raise AssertionError("beta^2 + 1 = 0 impossible for q = 3 (mod 4)")
    b_minus_1 = algebra.sub(field, beta, 1)
    return ConditionProfile(
        beta=beta,
        plus_one=algebra.residue_class(field, algebra.add(field, beta, 1)),
        minus_one=algebra.residue_class(field, b_minus_1),
        square_plus_one=algebra.residue_class(field, sq_plus_1),
        lemma6_ratio=algebra.residue_class(field, algebra.div(field, sq_plus_1, b_minus_1)),
        half_square_plus_one=algebra.residue_class(field, algebra.div(field, sq_plus_1, two)),
        half_minus_one=algebra.residue_class(field, algebra.div(field, b_minus_1, two)),
        beta_cubed_is_minus_one=algebra.power(field, beta, 3) == m1,
        beta_excluded=beta in (two, algebra.inv(field, two), m1),
    )


def lemma6_condition(field: FieldSpec, beta: int) -> bool:
    """(beta^2+1)/(beta-1) is a quadratic residue (within-family C4-freeness)."""
    return condition_profile(field, beta).lemma6_ratio is ResidueClass.QR


def lemma7_condition(field: FieldSpec, beta: int) -> bool:
    """(beta^2+1)/2 or (beta-1)/2 a residue, beta not in {2, 1/2} (cross C4-freeness)."""
    p = condition_profile(field, beta)
    two = algebra.two(field)
    if beta in (two, algebra.inv(field, two)):
        return False
    return (
        p.half_square_plus_one is ResidueClass.QR
        or p.half_minus_one is ResidueClass.QR
    )


# ---------------------------------------------------------------------------
# M-sets.

M_SET_VARIANTS = ("theorem9", "corollary10_paper", "corollary10_lemma_consistent")


@dataclass(frozen=True, slots=True)
class MSets:
    variant: str
    m1: tuple[int, ...]
    m2: tuple[int, ...]

    @property
    def m(self) -> tuple[int, ...]:
        return tuple(sorted(set(self.m1) | set(self.m2)))


def m_sets(field: FieldSpec, variant: str = "theorem9") -> MSets:
    """Scan NQR(q) for the M-set of the main theorem or the mod-8 corollary.

    The corollary's second set is computed in two readings: 'paper' takes
    beta - 1 in QR verbatim; 'lemma_consistent' takes beta - 1 in NQR, which
    is what (beta-1)/2 in QR becomes when 2 is a non-residue.
    """
    if variant not in M_SET_VARIANTS:
        raise ValueError(f"unknown M-set variant {variant!r}")
    _require_3mod4(field)
    if field.q < 11:
        raise BadField(f"M-sets are defined for q >= 11, got {field.q}")
    if variant != "theorem9" and field.q % 8 != 3:
        raise BadField(f"corollary variants need q = 3 (mod 8), got q = {field.q}")
    two = algebra.two(field)
    inv_two = algebra.inv(field, two)
    m1e = algebra.minus_one(field)
    excluded = {two, inv_two, m1e}
    m1: list[int] = []
    m2: list[int] = []
    for beta in algebra.nqr_set(field):
        if beta in excluded or algebra.power(field, beta, 3) == m1e:
            continue
        sq_plus_1 = algebra.add(field, algebra.mul(field, beta, beta), 1)
        b_minus_1 = algebra.sub(field, beta, 1)
        if variant == "theorem9":
            in_m1 = algebra.residue_class(field, algebra.div(field, sq_plus_1, two)) is ResidueClass.QR
            in_m2 = algebra.residue_class(field, algebra.div(field, b_minus_1, two)) is ResidueClass.QR
        elif variant == "corollary10_paper":
            in_m1 = algebra.residue_class(field, sq_plus_1) is ResidueClass.NQR
            in_m2 = algebra.residue_class(field, b_minus_1) is ResidueClass.QR
        else:  # corollary10_lemma_consistent
            in_m1 = algebra.residue_class(field, sq_plus_1) is ResidueClass.NQR
            in_m2 = algebra.residue_class(field, b_minus_1) is ResidueClass.NQR
        if in_m1:
            m1.append(beta)
        if in_m2:
            m2.append(beta)
    return MSets(variant=variant, m1=tuple(m1), m2=tuple(m2))


# ---------------------------------------------------------------------------
# Witness searches for the existence lemmas.


@dataclass(slots=True)
class WitnessSearch:
    claim: str
    witnesses: list[dict]
    exists: bool


@dataclass(slots=True)
class WitnessReport:
    lemma: str
    q: int
    searches: list[WitnessSearch]

    @property
    def all_exist(self) -> bool:
        return all(s.exists for s in self.searches)


def _require_witness_field(field: FieldSpec) -> None:
    # Searches run from q = 7 so the known small-field failures are
    # reproducible as documented negative cases.
    _require_3mod4(field)
    if field.q < 7:
        raise BadField(f"witness searches need q >= 7, got {field.q}")


def _scan(field: FieldSpec, domain, exprs) -> list[dict]:
    """All x in domain whose named expressions hit the wanted classes."""
    hits = []
    for x in domain:
        classes = {}
        ok = True
        for label, fn, wanted in exprs:
            cls = algebra.residue_class(field, fn(x))
            classes[label] = cls.value
            if cls is not wanted:
                ok = False
        if ok:
            hits.append({"element": x, "classes": classes})
    return hits


def witness_lemma_1beta(field: FieldSpec) -> WitnessReport:
    """Non-residues with both neighbors non-residues / both residues."""
    _require_witness_field(field)
    nqr = algebra.nqr_set(field)
    plus = lambda x: algebra.add(field, x, 1)
    minus = lambda x: algebra.sub(field, x, 1)
    item1 = _scan(field, nqr, [("x+1", plus, ResidueClass.NQR), ("x-1", minus, ResidueClass.NQR)])
    item2 = _scan(field, nqr, [("x+1", plus, ResidueClass.QR), ("x-1", minus, ResidueClass.QR)])
    return WitnessReport(
        lemma="lemma_1beta",
        q=field.q,
        searches=[
            WitnessSearch("beta in NQR with beta+1, beta-1 in NQR", item1, bool(item1)),
            WitnessSearch("beta in NQR with beta+1, beta-1 in QR", item2, bool(item2)),
        ],
    )


def witness_lemma_1alpha(field: FieldSpec) -> WitnessReport:
    """Residues with both neighbors non-residues / both residues."""
    _require_witness_field(field)
    qr = algebra.qr_set(field)
    plus = lambda x: algebra.add(field, x, 1)
    minus = lambda x: algebra.sub(field, x, 1)
    item1 = _scan(field, qr, [("x+1", plus, ResidueClass.NQR), ("x-1", minus, ResidueClass.NQR)])
    item2 = _scan(field, qr, [("x+1", plus, ResidueClass.QR), ("x-1", minus, ResidueClass.QR)])
    return WitnessReport(
        lemma="lemma_1alpha",
        q=field.q,
        searches=[
            WitnessSearch("alpha in QR with alpha+1, alpha-1 in NQR", item1, bool(item1)),
            WitnessSearch("alpha in QR with alpha+1, alpha-1 in QR", item2, bool(item2)),
        ],
    )


def _product_of_neighbors(field: FieldSpec, x: int) -> int:
    return algebra.mul(
        field, algebra.add(field, x, 1), algebra.sub(field, x, 1)
    )


def witness_nqr(field: FieldSpec) -> WitnessReport:
    """Non-residue beta with (beta+1)(beta-1) a non-residue."""
    _require_witness_field(field)
    hits = _scan(
        field,
        algebra.nqr_set(field),
        [("(x+1)(x-1)", lambda x: _product_of_neighbors(field, x), ResidueClass.NQR)],
    )
    return WitnessReport(
        lemma="lemma_nqr",
        q=field.q,
        searches=[WitnessSearch("beta in NQR with (beta+1)(beta-1) in NQR", hits, bool(hits))],
    )


def witness_qr(field: FieldSpec) -> WitnessReport:
    """Residue alpha with (alpha+1)(alpha-1) a non-residue."""
    _require_witness_field(field)
    hits = _scan(
        field,
        algebra.qr_set(field),
        [("(x+1)(x-1)", lambda x: _product_of_neighbors(field, x), ResidueClass.NQR)],
    )
    return WitnessReport(
        lemma="lemma_qr",
        q=field.q,
        searches=[WitnessSearch("alpha in QR with (alpha+1)(alpha-1) in NQR", hits, bool(hits))],
    )


# ---------------------------------------------------------------------------
# Campaign reports.


@dataclass(slots=True)
class CampaignRow:
    q: int
    beta: int | None
    checks: dict
    beta2: int | None = None
    notes: dict = dc_field(default_factory=dict)
    profile: ConditionProfile | None = None
    witnesses: list = dc_field(default_factory=list)
    timing_ms: float = 0.0

    @property
    def passed(self) -> bool:
        return all(self.checks.values())

    def sort_key(self):
        return (
            self.q,
            self.beta is not None,
            self.beta if self.beta is not None else -1,
            self.beta2 if self.beta2 is not None else -1,
        )


@dataclass(slots=True)
class CampaignReport:
    campaign: str
    params: dict
    rows: list[CampaignRow]
    skipped: list[int] = dc_field(default_factory=list)
    timing_ms: float = 0.0

    @property
    def passed(self) -> bool:
        return all(row.passed for row in self.rows)

    def failing_rows(self) -> list[CampaignRow]:
        return [row for row in self.rows if not row.passed]


def merge_reports(campaign: str, params: dict, reports: list[CampaignReport]) -> CampaignReport:
    rows: list[CampaignRow] = []
    skipped: list[int] = []
    timing = 0.0
    for rep in reports:
        rows.extend(rep.rows)
        skipped.extend(rep.skipped)
        timing += rep.timing_ms
    rows.sort(key=CampaignRow.sort_key)
    return CampaignReport(
        campaign=campaign,
        params=params,
        rows=rows,
        skipped=sorted(set(skipped)),
        timing_ms=timing,
    )


def _run_tasks(tasks, threads: int):
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(lambda fn: fn(), tasks))
    return [fn() for fn in tasks]


def prime_powers_3mod4(lo: int, hi: int) -> tuple[list[FieldSpec], list[int]]:
    """Fields for every prime power q = 3 (mod 4) in [lo, hi]; skipped q listed."""
    fields: list[FieldSpec] = []
    skipped: list[int] = []
    for q in range(max(lo, 3), hi + 1):
        if q % 4 != 3:
            continue
        try:
            fields.append(algebra.make_field(q))
        except algebra.NotPrimePower:
            skipped.append(q)
    return fields, skipped


def prime_powers_3mod8(lo: int, hi: int) -> tuple[list[FieldSpec], list[int]]:
    fields, skipped = prime_powers_3mod4(lo, hi)
    return [f for f in fields if f.q % 8 == 3], [q for q in skipped if q % 8 == 3]


# ---------------------------------------------------------------------------
# Campaigns.


def _witness_family(witness) -> set[str]:
    if isinstance(witness, fz.CycleWitness):
        return {edge[2].split("[")[0] for edge in witness.edges}
    if isinstance(witness, fz.EdgeOverlapWitness):
        return {witness.factor_f.split("[")[0], witness.factor_g.split("[")[0]}
    return set()


def verify_horton(field: FieldSpec, threads: int = 1) -> CampaignReport:
    """Proposition 3 + Theorems 2 and 4 for one field.

    Per beta: S_beta is a strong starter, orthogonal to S_beta' for every
    larger beta', and {S_beta, -S_beta, P} are pairwise orthogonal.
    """
    t0 = time.perf_counter()
    if field.q % 4 != 3 or field.q <= 3:
        raise BadField(f"Horton campaign needs q = 3 (mod 4), q > 3; got {field.q}")
    group = st.field_group(field)
    betas = [b for b in algebra.nqr_set(field) if b != algebra.minus_one(field)]
    s_by_beta = {b: st.horton_starter(field, b) for b in betas}
    patterned = st.patterned_starter(group)

    def row_for(beta: int) -> CampaignRow:
        start = time.perf_counter()
        witnesses: list = []
        s = s_by_beta[beta]
        report = st.validate_starter(group, s)
        if not report.is_strong:
            witnesses.extend(f"S_{beta}: {v}" for v in report.violations)
        pair_ok = True
        for other in betas:
            if other <= beta:
                continue
            orth = st.starters_orthogonal(group, s, s_by_beta[other])
            if not orth.orthogonal:
                pair_ok = False
                witnesses.extend(
                    f"S_{beta} vs S_{other}: {v}" for v in orth.violations
                )
        triple_ok = True
        neg_s = st.negate_starter(group, s)
        for name, (a, b) in (
            ("S vs -S", (s, neg_s)),
            ("S vs P", (s, patterned)),
            ("-S vs P", (neg_s, patterned)),
        ):
            orth = st.starters_orthogonal(group, a, b)
            if not orth.orthogonal:
                triple_ok = False
                witnesses.extend(f"beta={beta} {name}: {v}" for v in orth.violations)
        return CampaignRow(
            q=field.q,
            beta=beta,
            checks={
                "strong_starter": report.is_strong,
                "orthogonal_to_larger_betas": pair_ok,
                "triple_orthogonal": triple_ok,
            },
            notes={"sum_set_size": len(report.sum_set)},
            witnesses=witnesses,
            timing_ms=(time.perf_counter() - start) * 1000.0,
        )

    rows = _run_tasks([lambda b=b: row_for(b) for b in betas], threads)
    return CampaignReport(
        campaign="horton",
        params={"q": field.q},
        rows=rows,
        timing_ms=(time.perf_counter() - t0) * 1000.0,
    )


def verify_dinitz(n_values, threads: int = 1) -> CampaignReport:
    """Patterned-starter factorization over Z_n is C4-free iff n != 0 (mod 3)."""
    t0 = time.perf_counter()
    ns = sorted(set(int(n) for n in n_values))
    for n in ns:
        if n < 5 or n % 2 == 0:
            raise ValueError(f"Dinitz campaign needs odd n >= 5, got {n}")

    def row_for(n: int) -> CampaignRow:
        start = time.perf_counter()
        group = st.zn_group(n)
        fact = fz.factorization_from_starter(group, st.patterned_starter(group))
        check = fz.factorization_c4_free(fact, mode="fast")
        expected = n % 3 != 0
        matches = check.passed == expected
        witnesses: list = []
        if not matches:
            if check.witnesses:
                witnesses.extend(check.witnesses)
            else:
                witnesses.append(
                    f"n={n}: expected a 4-cycle (n = 0 mod 3) but none found"
                )
        return CampaignRow(
            q=n,
            beta=None,
            checks={"matches_dinitz": matches},
            notes={
                "group": f"Z_{n}",
                "n_mod_3": n % 3,
                "c4_free": check.passed,
                "expected_c4_free": expected,
            },
            witnesses=witnesses,
            timing_ms=(time.perf_counter() - start) * 1000.0,
        )

    rows = _run_tasks([lambda n=n: row_for(n) for n in ns], threads)
    return CampaignReport(
        campaign="dinitz",
        params={"n_from": ns[0] if ns else None, "n_to": ns[-1] if ns else None},
        rows=rows,
        timing_ms=(time.perf_counter() - t0) * 1000.0,
    )


def verify_theorem_main(field: FieldSpec, mode: str = "fast", threads: int = 1) -> CampaignReport:
    """Main theorem: M nonempty and, for beta in M, (S_beta, -S_beta) gives an
    orthogonal totally C4-free pair.

    Within-family C4-freeness and the sufficient lemma conditions are
    recorded per beta so any gap between the two is visible in the report.
    """
    t0 = time.perf_counter()
    if field.q % 4 != 3 or field.q < 11:
        raise BadField(f"main campaign needs q = 3 (mod 4), q >= 11; got {field.q}")
    group = st.field_group(field)
    sets = m_sets(field, "theorem9")
    m = sets.m

    def row_for(beta: int) -> CampaignRow:
        start = time.perf_counter()
        s = st.horton_starter(field, beta)
        srep = st.validate_starter(group, s)
        fact_f = fz.factorization_from_starter(group, s, family="F")
        fact_g = fz.factorization_from_starter(group, st.negate_starter(group, s), family="G")
        orth = fz.factorizations_orthogonal(fact_f, fact_g, mode)
        totally = fz.pair_totally_c4_free(fact_f, fact_g, mode)
        within_ok = not any(
            len(_witness_family(w)) == 1 for w in totally.witnesses
        )
        witnesses: list = list(srep.violations)
        witnesses.extend(orth.witnesses)
        witnesses.extend(totally.witnesses)
        return CampaignRow(
            q=field.q,
            beta=beta,
            checks={
                "strong_starter": srep.is_strong,
                "pair_orthogonal": orth.passed,
                "totally_c4_free": totally.passed,
            },
            notes={
                "lemma6_condition": lemma6_condition(field, beta),
                "lemma7_condition": lemma7_condition(field, beta),
                "within_family_c4_free": within_ok,
            },
            profile=condition_profile(field, beta),
            witnesses=witnesses,
            timing_ms=(time.perf_counter() - start) * 1000.0,
        )

    beta_rows = _run_tasks([lambda b=b: row_for(b) for b in m], threads)
    passing = [row.beta for row in beta_rows if row.passed]
    head = CampaignRow(
        q=field.q,
        beta=None,
        checks={"m_nonempty": bool(m)},
        notes={
            "m": list(m),
            "m1": list(sets.m1),
            "m2": list(sets.m2),
            "g_construction": "-S_beta (negated Horton starter)",
            "passing_betas": passing,
            "exists_valid_pair": bool(passing),
        },
    )
    return CampaignReport(
        campaign="main",
        params={"q": field.q, "mode": mode},
        rows=[head] + beta_rows,
        timing_ms=(time.perf_counter() - t0) * 1000.0,
    )


def verify_corollary_mod8(
    field: FieldSpec, variant: str, mode: str = "fast", threads: int = 1
) -> CampaignReport:
    """Mod-8 corollary for one M-set variant: every pair beta1 != beta2 in M
    should give orthogonal, totally C4-free factorizations (S_beta1, S_beta2)."""
    t0 = time.perf_counter()
    sets = m_sets(field, variant)
    m = sets.m
    group = st.field_group(field)
    facts_f: dict[int, fz.OneFactorization] = {}
    facts_g: dict[int, fz.OneFactorization] = {}
    lemma6_flags: dict[int, bool] = {}
    for beta in m:
        s = st.horton_starter(field, beta)
        facts_f[beta] = fz.factorization_from_starter(group, s, family="F")
        facts_g[beta] = fz.factorization_from_starter(group, s, family="G")
        lemma6_flags[beta] = lemma6_condition(field, beta)

    def row_for(beta1: int, beta2: int) -> CampaignRow:
        start = time.perf_counter()
        fact_f = facts_f[beta1]
        fact_g = facts_g[beta2]
        orth = fz.factorizations_orthogonal(fact_f, fact_g, mode)
        totally = fz.pair_totally_c4_free(fact_f, fact_g, mode)
        witnesses: list = list(orth.witnesses) + list(totally.witnesses)
        return CampaignRow(
            q=field.q,
            beta=beta1,
            beta2=beta2,
            checks={
                "pair_orthogonal": orth.passed,
                "totally_c4_free": totally.passed,
            },
            notes={
                "lemma6_beta1": lemma6_flags[beta1],
                "lemma6_beta2": lemma6_flags[beta2],
            },
            witnesses=witnesses,
            timing_ms=(time.perf_counter() - start) * 1000.0,
        )

    pairs = [(b1, b2) for i, b1 in enumerate(m) for b2 in m[i + 1 :]]
    pair_rows = _run_tasks([lambda a=a, b=b: row_for(a, b) for a, b in pairs], threads)
    head = CampaignRow(
        q=field.q,
        beta=None,
        checks={"m_nonempty": bool(m)},
        notes={"variant": variant, "m": list(m), "m1": list(sets.m1), "m2": list(sets.m2)},
    )
    return CampaignReport(
        campaign="corollary",
        params={"q": field.q, "variant": variant, "mode": mode},
        rows=[head] + pair_rows,
        timing_ms=(time.perf_counter() - t0) * 1000.0,
    )


# ---------------------------------------------------------------------------
# Serialization.


def profile_to_jsonable(p: ConditionProfile) -> dict:
    return {
        "beta": p.beta,
        "classes": {
            "beta+1": p.plus_one.value,
            "beta-1": p.minus_one.value,
            "beta^2+1": p.square_plus_one.value,
            "(beta^2+1)/(beta-1)": p.lemma6_ratio.value,
            "(beta^2+1)/2": p.half_square_plus_one.value,
            "(beta-1)/2": p.half_minus_one.value,
        },
        "beta_cubed_is_minus_one": p.beta_cubed_is_minus_one,
        "beta_excluded": p.beta_excluded,
    }


def witness_report_to_jsonable(rep: WitnessReport) -> dict:
    return {
        "lemma": rep.lemma,
        "q": rep.q,
        "searches": [
            {"claim": s.claim, "exists": s.exists, "witnesses": s.witnesses}
            for s in rep.searches
        ],
    }


def row_to_jsonable(row: CampaignRow, include_timing: bool = False) -> dict:
    n_vertices = row.q + 1
    obj = {
        "q": row.q,
        "beta": row.beta,
        "beta2": row.beta2,
        "pass": row.passed,
        "checks": dict(row.checks),
        "notes": dict(row.notes),
        "profile": profile_to_jsonable(row.profile) if row.profile else None,
        "witnesses": [fz.witness_to_jsonable(w, n_vertices) for w in row.witnesses],
    }
    if include_timing:
        obj["timing_ms"] = round(row.timing_ms, 3)
    return obj


def report_to_jsonable(report: CampaignReport, include_timing: bool = False) -> dict:
    failing = report.failing_rows()
    obj = {
        "schema_version": SCHEMA_VERSION,
        "campaign": report.campaign,
        "params": dict(report.params),
        "summary": {
            "rows": len(report.rows),
            "failed_rows": len(failing),
            "pass": report.passed,
            "skipped_q": list(report.skipped),
        },
        "results": [row_to_jsonable(r, include_timing) for r in report.rows],
    }
    if include_timing:
        obj["summary"]["timing_ms"] = round(report.timing_ms, 3)
    return obj
