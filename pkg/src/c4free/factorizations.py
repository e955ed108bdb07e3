"""One-factorizations of K_{n+1} from starters, and 4-cycle detection.

Vertices are the group elements 0..n-1 plus one infinity vertex with
internal id n.  A one-factor is stored both as a canonical edge list and as
a partner map (involution without fixed points); the partner map is what
the detection loops index.

Two detection routes are kept deliberately independent: ``factors_c4``
chases partners along the union of two factors (O(n) per pair), while
``brute_force_c4`` enumerates every vertex quadruple with its 3 cyclic
pairings (O(n^4), vectorized with numpy).  Campaigns use the first; the
second is the oracle the first is checked against.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .starters import Group, Pair, Provenance, Starter, validate_starter


class InvalidStarter(ValueError):
    """Starter fails the cover conditions, cannot generate a factorization."""


class FastModeUnavailable(ValueError):
    """Translation fast path requested without trusted starter provenance."""


class TooLarge(ValueError):
    """Brute-force enumeration guarded to at most 64 vertices."""


_BRUTE_FORCE_MAX_VERTICES = 64


def infinity_vertex(n_vertices: int) -> int:
    return n_vertices - 1


def _vertex_key(v: int, n_vertices: int) -> int:
    # Canonical order puts the infinity vertex first, then finite ascending.
    return -1 if v == n_vertices - 1 else v


def normalize_edge(u: int, v: int, n_vertices: int) -> Pair:
    if _vertex_key(u, n_vertices) <= _vertex_key(v, n_vertices):
        return (u, v)
    return (v, u)


def edge_sort_key(edge: Pair, n_vertices: int) -> tuple[int, int]:
    return (_vertex_key(edge[0], n_vertices), _vertex_key(edge[1], n_vertices))


@dataclass(frozen=True, slots=True)
class OneFactor:
    """Perfect matching candidate on n_vertices vertices.

    ``partner`` is the involution as a tuple, or None when the edges do not
    form a perfect matching (custom input under audit).
    """

    gamma: int
    name: str
    n_vertices: int
    edges: tuple[Pair, ...]
    partner: tuple[int, ...] | None


def make_one_factor(gamma: int, name: str, n_vertices: int, edges) -> OneFactor:
    norm = tuple(
        sorted(
            (normalize_edge(u, v, n_vertices) for u, v in edges),
            key=lambda e: edge_sort_key(e, n_vertices),
        )
    )
    partner: list[int] | None = [-1] * n_vertices
    for u, v in norm:
        if u == v or not (0 <= u < n_vertices and 0 <= v < n_vertices):
            partner = None
            break
        if partner[u] != -1 or partner[v] != -1:
            partner = None
            break
        partner[u] = v
        partner[v] = u
    if partner is not None and any(p == -1 for p in partner):
        partner = None
    return OneFactor(
        gamma=gamma,
        name=name,
        n_vertices=n_vertices,
        edges=norm,
        partner=tuple(partner) if partner is not None else None,
    )


@dataclass(frozen=True, slots=True)
class OneFactorization:
    """n one-factors of K_{n+1}, indexed by the translate gamma.

    ``starter`` is the trusted, in-process construction witness; it is None
    for factorizations loaded from files, which disables translation fast
    paths regardless of the claimed provenance.
    """

    group: Group
    factors: tuple[OneFactor, ...]
    provenance: Provenance
    starter: Starter | None
    family: str = "F"


@dataclass(frozen=True, slots=True)
class CycleWitness:
    """A 4-cycle in the union of two one-factors, in canonical orientation.

    ``cycle`` lists the vertices in traversal order; ``edges`` the four
    edges (u, v, owning factor name) in the same order, ownership
    alternating between the two factors.
    """

    cycle: tuple[int, int, int, int]
    edges: tuple[tuple[int, int, str], ...]


@dataclass(frozen=True, slots=True)
class EdgeOverlapWitness:
    """Two factors sharing more than one edge (orthogonality violation)."""

    factor_f: str
    factor_g: str
    shared_edges: tuple[Pair, ...]


@dataclass(slots=True)
class PairCheckReport:
    prop: str
    passed: bool
    mode: str
    witnesses: list

    def __post_init__(self) -> None:
        if self.passed != (not self.witnesses):
            raise ValueError("pass flag inconsistent with witness list")


def _cycle_symmetries(vs: list[int], owners: list[str]):
    for r in range(4):
        yield tuple(vs[r:] + vs[:r]), tuple(owners[r:] + owners[:r])
    rvs = [vs[0]] + vs[:0:-1]
    ros = [owners[3], owners[2], owners[1], owners[0]]
    for r in range(4):
        yield tuple(rvs[r:] + rvs[:r]), tuple(ros[r:] + ros[:r])


def make_cycle_witness(cycle, owners) -> CycleWitness:
    """Canonicalize over the 8 traversals so equal cycles compare equal."""
    best_vs, best_os = min(_cycle_symmetries(list(cycle), list(owners)))
    edges = tuple(
        (best_vs[i], best_vs[(i + 1) % 4], best_os[i]) for i in range(4)
    )
    return CycleWitness(cycle=best_vs, edges=edges)


def witness_revalidates(witness: CycleWitness, factors_by_name: dict[str, OneFactor]) -> bool:
    """Re-check a cycle witness from scratch against the owning factors."""
    vs = witness.cycle
    if len(set(vs)) != 4:
        return False
    owners = [e[2] for e in witness.edges]
    if owners[0] != owners[2] or owners[1] != owners[3] or owners[0] == owners[1]:
        return False
    for i, (u, v, owner) in enumerate(witness.edges):
        if {u, v} != {vs[i], vs[(i + 1) % 4]}:
            return False
        factor = factors_by_name.get(owner)
        if factor is None or factor.partner is None:
            return False
        if factor.partner[u] != v:
            return False
    return True


# ---------------------------------------------------------------------------
# Construction and validation.


def factorization_from_starter(group: Group, s: Starter, family: str = "F") -> OneFactorization:
    """F_gamma = {{inf, gamma}} u {{x+gamma, y+gamma}} for every gamma."""
    report = validate_starter(group, s)
    if not report.is_starter:
        raise InvalidStarter("; ".join(report.violations) or "not a starter")
    n = group.order
    n_vertices = n + 1
    inf = infinity_vertex(n_vertices)
    add = group.add
    factors = []
    for gamma in range(n):
        edges = [(gamma, inf)]
        edges.extend((add(x, gamma), add(y, gamma)) for x, y in s.pairs)
        factors.append(make_one_factor(gamma, f"{family}[{gamma}]", n_vertices, edges))
    return OneFactorization(
        group=group,
        factors=tuple(factors),
        provenance=s.provenance,
        starter=s,
        family=family,
    )


def is_one_factorization(f: OneFactorization) -> PairCheckReport:
    """Verify the perfect-matching and exact-edge-cover conditions, reporting findings."""
    n = f.group.order
    n_vertices = n + 1
    findings: list[str] = []
    if len(f.factors) != n:
        findings.append(f"expected {n} factors, got {len(f.factors)}")
    coverage: dict[Pair, list[str]] = {}
    for factor in f.factors:
        if factor.partner is None:
            seen: dict[int, int] = {}
            for u, v in factor.edges:
                if u == v:
                    findings.append(f"{factor.name}: fixed point at vertex {u}")
                for w in (u, v):
                    seen[w] = seen.get(w, 0) + 1
            for w, c in sorted(seen.items()):
                if c > 1:
                    findings.append(f"{factor.name}: vertex {w} matched {c} times")
            for w in range(n_vertices):
                if w not in seen:
                    findings.append(f"{factor.name}: vertex {w} unmatched")
        for edge in factor.edges:
            coverage.setdefault(edge, []).append(factor.name)
    for edge, names in sorted(coverage.items()):
        if len(names) > 1:
            findings.append(f"edge {edge} duplicated in {', '.join(names)}")
    if len(f.factors) == n and all(fc.partner is not None for fc in f.factors):
        for u in range(n_vertices):
            for v in range(u + 1, n_vertices):
                if normalize_edge(u, v, n_vertices) not in coverage:
                    findings.append(f"edge ({u},{v}) missing")
    return PairCheckReport(
        prop="one_factorization",
        passed=not findings,
        mode="exhaustive",
        witnesses=findings,
    )


# ---------------------------------------------------------------------------
# 4-cycle detection: partner chasing (fast) and quadruple enumeration (oracle).


def _require_matchings(f: OneFactor, g: OneFactor) -> None:
    if f.n_vertices != g.n_vertices:
        raise ValueError("factors live on different vertex sets")
    if f.partner is None or g.partner is None:
        raise ValueError("4-cycle detection requires perfect matchings")


def factors_c4(f: OneFactor, g: OneFactor) -> CycleWitness | None:
    """First 4-cycle of f u g in canonical edge order, or None.

    For each edge {u,v} of f let c = g(u), d = g(v); the quadruple closes a
    4-cycle u-v-d-c-u exactly when c != v (shared edge) and f(c) = d.
    """
    _require_matchings(f, g)
    fp = f.partner
    gp = g.partner
    for u, v in f.edges:
        c = gp[u]
        d = gp[v]
        if c != v and fp[c] == d:
            return make_cycle_witness(
                (u, v, d, c), (f.name, g.name, f.name, g.name)
            )
    return None


_PAIRINGS: tuple[tuple[int, int, int, int], ...] = ((0, 1, 2, 3), (0, 1, 3, 2), (0, 2, 1, 3))


@lru_cache(maxsize=None)
def _quad_tables(n_vertices: int):
    quads = np.array(
        list(itertools.combinations(range(n_vertices), 4)), dtype=np.int16
    )
    return tuple(np.ascontiguousarray(quads[:, i]) for i in range(4))


def brute_force_c4(f: OneFactor, g: OneFactor) -> list[CycleWitness]:
    """Every 4-cycle of f u g by enumerating all vertex quadruples.

    Each quadruple is tested under its 3 cyclic pairings and both ownership
    orientations; results are ordered by (quadruple, pairing).
    """
    _require_matchings(f, g)
    n_vertices = f.n_vertices
    if n_vertices > _BRUTE_FORCE_MAX_VERTICES:
        raise TooLarge(
            f"{n_vertices} vertices exceeds brute-force guard {_BRUTE_FORCE_MAX_VERTICES}"
        )
    cols = _quad_tables(n_vertices)
    fp = np.asarray(f.partner, dtype=np.int16)
    gp = np.asarray(g.partner, dtype=np.int16)
    found = []
    for pairing_index, perm in enumerate(_PAIRINGS):
        vs = [cols[i] for i in perm]
        for first_owner, (m1, m2) in (("f", (fp, gp)), ("g", (gp, fp))):
            mask = (
                (m1[vs[0]] == vs[1])
                & (m2[vs[1]] == vs[2])
                & (m1[vs[2]] == vs[3])
                & (m2[vs[3]] == vs[0])
            )
            for qi in np.nonzero(mask)[0]:
                cycle = tuple(int(col[qi]) for col in vs)
                if first_owner == "f":
                    owners = (f.name, g.name, f.name, g.name)
                else:
                    owners = (g.name, f.name, g.name, f.name)
                found.append((int(qi), pairing_index, cycle, owners))
    found.sort(key=lambda item: (item[0], item[1]))
    return [make_cycle_witness(cycle, owners) for _, _, cycle, owners in found]


class BruteForceC4Sweeper:
    """Emptiness-only brute force over many factor pairs.

    Runs the same quadruple enumeration as ``brute_force_c4`` but caches,
    per factor, the boolean quadruple masks the pairings combine, so that
    sweeping every factor pair of a factorization costs a handful of
    vectorized boolean passes per pair.
    """

    _MASK_SPECS = {
        "aB": (0, 1), "aC": (0, 2),
        "bC": (1, 2), "bD": (1, 3),
        "cA": (2, 0), "cB": (2, 1), "cD": (2, 3),
        "dA": (3, 0), "dC": (3, 2),
    }
    # (f-mask, f-mask, g-mask, g-mask) conjunctions covering the 3 pairings.
    _COMBOS = (
        ("aB", "cD", "bC", "dA"),
        ("aB", "dC", "bD", "cA"),
        ("aC", "bD", "cB", "dA"),
    )

    def __init__(self, n_vertices: int):
        if n_vertices > _BRUTE_FORCE_MAX_VERTICES:
            raise TooLarge(
                f"{n_vertices} vertices exceeds brute-force guard {_BRUTE_FORCE_MAX_VERTICES}"
            )
        self.n_vertices = n_vertices
        self._cols = _quad_tables(n_vertices)
        self._masks: dict[int, dict[str, np.ndarray]] = {}
        self._keepalive: list[OneFactor] = []

    def _factor_masks(self, factor: OneFactor) -> dict[str, np.ndarray]:
        key = id(factor)
        masks = self._masks.get(key)
        if masks is None:
            if factor.partner is None:
                raise ValueError("sweeper requires perfect matchings")
            if factor.n_vertices != self.n_vertices:
                raise ValueError("factor lives on a different vertex set")
            partner = np.asarray(factor.partner, dtype=np.int16)
            gathered = [partner[col] for col in self._cols]
            masks = {
                name: gathered[i] == self._cols[j]
                for name, (i, j) in self._MASK_SPECS.items()
            }
            self._masks[key] = masks
            self._keepalive.append(factor)
        return masks

    def has_c4(self, f: OneFactor, g: OneFactor) -> bool:
        mf = self._factor_masks(f)
        mg = self._factor_masks(g)
        for k1, k2, k3, k4 in self._COMBOS:
            if (mf[k1] & mf[k2] & mg[k3] & mg[k4]).any():
                return True
            if (mg[k1] & mg[k2] & mf[k3] & mf[k4]).any():
                return True
        return False


# ---------------------------------------------------------------------------
# Property checks on factorizations.


def _fast_path_single(f: OneFactorization) -> None:
    if f.starter is None:
        raise FastModeUnavailable(
            "fast mode needs starter provenance (custom factorizations are exhaustive-only)"
        )


def _fast_path_pair(f: OneFactorization, g: OneFactorization) -> None:
    if f.starter is None or g.starter is None:
        raise FastModeUnavailable(
            "fast mode needs starter provenance on both factorizations"
        )
    if f.group != g.group:
        raise FastModeUnavailable("fast mode needs both factorizations over the same group")


def factorization_c4_free(f: OneFactorization, mode: str = "exhaustive") -> PairCheckReport:
    """Is the union of every two factors C4-free?

    Exhaustive mode checks all n(n-1)/2 unordered factor pairs; fast mode
    uses translation invariance and checks F_0 u F_delta only.
    """
    witnesses: list[CycleWitness] = []
    if mode == "fast":
        _fast_path_single(f)
        f0 = f.factors[0]
        for delta in range(1, f.group.order):
            w = factors_c4(f0, f.factors[delta])
            if w is not None:
                witnesses.append(w)
    elif mode == "exhaustive":
        factors = f.factors
        for i in range(len(factors)):
            for j in range(i + 1, len(factors)):
                w = factors_c4(factors[i], factors[j])
                if w is not None:
                    witnesses.append(w)
    else:
        raise ValueError(f"unknown mode {mode!r}")
    return PairCheckReport(
        prop="c4_free", passed=not witnesses, mode=mode, witnesses=witnesses
    )


def pair_totally_c4_free(
    f: OneFactorization, g: OneFactorization, mode: str = "exhaustive"
) -> PairCheckReport:
    """Is every union of two factors drawn from both families C4-free?

    Covers within-f, within-g and cross pairs.  Fast mode checks
    F_0 u F_delta, G_0 u G_delta (delta != 0) and F_0 u G_delta (all
    delta, the cross family includes delta = 0).
    """
    if f.group.order != g.group.order:
        raise ValueError("factorizations live on different vertex sets")
    witnesses: list[CycleWitness] = []
    if mode == "fast":
        _fast_path_pair(f, g)
        n = f.group.order
        f0 = f.factors[0]
        g0 = g.factors[0]
        for delta in range(1, n):
            w = factors_c4(f0, f.factors[delta])
            if w is not None:
                witnesses.append(w)
            w = factors_c4(g0, g.factors[delta])
            if w is not None:
                witnesses.append(w)
        for delta in range(n):
            w = factors_c4(f0, g.factors[delta])
            if w is not None:
                witnesses.append(w)
    elif mode == "exhaustive":
        combined = list(f.factors) + list(g.factors)
        for i in range(len(combined)):
            for j in range(i + 1, len(combined)):
                a, b = combined[i], combined[j]
                if a is b:
                    continue
                w = factors_c4(a, b)
                if w is not None:
                    witnesses.append(w)
    else:
        raise ValueError(f"unknown mode {mode!r}")
    return PairCheckReport(
        prop="totally_c4_free", passed=not witnesses, mode=mode, witnesses=witnesses
    )


def factorizations_orthogonal(
    f: OneFactorization, g: OneFactorization, mode: str | None = None
) -> PairCheckReport:
    """|F n H| <= 1 for every factor F of f and H of g.

    The shared count of (F_i, G_j) for starter-generated inputs depends
    only on j - i, which the fast path exploits; mode None picks fast when
    provenance allows and exhaustive otherwise.
    """
    if f.group.order != g.group.order:
        raise ValueError("factorizations live on different vertex sets")
    if mode is None:
        fast_ok = f.starter is not None and g.starter is not None and f.group == g.group
        mode = "fast" if fast_ok else "exhaustive"
    witnesses: list[EdgeOverlapWitness] = []
    if mode == "fast":
        _fast_path_pair(f, g)
        edges0 = frozenset(f.factors[0].edges)
        for delta in range(f.group.order):
            shared = edges0.intersection(g.factors[delta].edges)
            if len(shared) > 1:
                witnesses.append(
                    EdgeOverlapWitness(
                        factor_f=f.factors[0].name,
                        factor_g=g.factors[delta].name,
                        shared_edges=tuple(sorted(shared)),
                    )
                )
    elif mode == "exhaustive":
        g_sets = [frozenset(h.edges) for h in g.factors]
        for fi in f.factors:
            fi_set = frozenset(fi.edges)
            for gj, gj_set in zip(g.factors, g_sets):
                shared = fi_set & gj_set
                if len(shared) > 1:
                    witnesses.append(
                        EdgeOverlapWitness(
                            factor_f=fi.name,
                            factor_g=gj.name,
                            shared_edges=tuple(sorted(shared)),
                        )
                    )
    else:
        raise ValueError(f"unknown mode {mode!r}")
    return PairCheckReport(
        prop="orthogonal", passed=not witnesses, mode=mode, witnesses=witnesses
    )


# ---------------------------------------------------------------------------
# Serialization.


def vertex_to_jsonable(v: int, n_vertices: int):
    return "inf" if v == n_vertices - 1 else v


def vertex_from_jsonable(v, n_vertices: int) -> int:
    if v == "inf":
        return n_vertices - 1
    value = int(v)
    if not 0 <= value < n_vertices - 1:
        raise ValueError(f"vertex {v!r} out of range")
    return value


def witness_to_jsonable(w, n_vertices: int) -> dict:
    if isinstance(w, CycleWitness):
        return {
            "cycle": [vertex_to_jsonable(v, n_vertices) for v in w.cycle],
            "edges": [
                {
                    "u": vertex_to_jsonable(u, n_vertices),
                    "v": vertex_to_jsonable(v, n_vertices),
                    "owner": owner,
                }
                for u, v, owner in w.edges
            ],
        }
    if isinstance(w, EdgeOverlapWitness):
        return {
            "factors": [w.factor_f, w.factor_g],
            "shared_edges": [
                [vertex_to_jsonable(u, n_vertices), vertex_to_jsonable(v, n_vertices)]
                for u, v in w.shared_edges
            ],
            "count": len(w.shared_edges),
        }
    return {"finding": str(w)}


def report_to_jsonable(report: PairCheckReport, n_vertices: int) -> dict:
    return {
        "property": report.prop,
        "pass": report.passed,
        "mode": report.mode,
        "witnesses": [witness_to_jsonable(w, n_vertices) for w in report.witnesses],
    }


def factorization_to_jsonable(f: OneFactorization) -> dict:
    from .starters import group_to_jsonable, provenance_to_jsonable

    n_vertices = f.group.order + 1
    return {
        "group": group_to_jsonable(f.group),
        "provenance": provenance_to_jsonable(f.provenance),
        "factors": [
            {
                "gamma": factor.gamma,
                "edges": [
                    [vertex_to_jsonable(u, n_vertices), vertex_to_jsonable(v, n_vertices)]
                    for u, v in factor.edges
                ],
            }
            for factor in f.factors
        ],
    }


def factorization_from_jsonable(obj: dict, family: str = "F") -> OneFactorization:
    from .starters import group_from_jsonable, provenance_from_jsonable

    try:
        group = group_from_jsonable(obj["group"])
        provenance = provenance_from_jsonable(obj["provenance"])
        raw_factors = obj["factors"]
    except KeyError as exc:
        raise ValueError(f"factorization object missing key {exc}") from exc
    n_vertices = group.order + 1
    factors = []
    for entry in raw_factors:
        gamma = int(entry["gamma"])
        edges = [
            (
                vertex_from_jsonable(e[0], n_vertices),
                vertex_from_jsonable(e[1], n_vertices),
            )
            for e in entry["edges"]
        ]
        factors.append(make_one_factor(gamma, f"{family}[{gamma}]", n_vertices, edges))
    factors.sort(key=lambda fc: fc.gamma)
    # Loaded factor lists are audit input: no starter witness, exhaustive only.
    return OneFactorization(
        group=group,
        factors=tuple(factors),
        provenance=provenance,
        starter=None,
        family=family,
    )
