"""Starters over odd-order abelian groups: construction and verification.

A starter pairs up the nonzero elements of a group of odd order n = 2k+1 so
that the pair differences (taken with both signs) also cover the nonzero
elements exactly.  Provided constructions: the Horton starter over GF(q)
with q = 3 (mod 4), the patterned starter {x, -x} over any odd group, and
negation of an existing starter.  Pairs are normalized (smaller encoding
first, sorted by first endpoint) so equality and serialization are
canonical.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field

from . import algebra
from .algebra import CyclicRing, FieldSpec, ResidueClass


class BadBeta(ValueError):
    """Starter parameter is not an admissible non-residue."""


class BadField(ValueError):
    """Field does not meet the construction's congruence/size conditions."""


class MalformedStarter(ValueError):
    """Pair structure violates starter preconditions (difference matching failed)."""


Pair = tuple[int, int]


@dataclass(frozen=True, slots=True)
class Group:
    """Additive group of odd order: GF(p^k) under + (field set) or Z_n (field None)."""

    order: int
    field: FieldSpec | None = None

    def __post_init__(self) -> None:
        if self.order < 3 or self.order % 2 == 0:
            raise ValueError(f"group order must be odd and >= 3, got {self.order}")
        if self.field is not None and self.field.q != self.order:
            raise ValueError("field order disagrees with group order")

    @property
    def kind(self) -> str:
        return "cyclic" if self.field is None else "field"

    def add(self, a: int, b: int) -> int:
        if self.field is None or self.field.k == 1:
            return (a + b) % self.order
        return algebra.add(self.field, a, b)

    def neg(self, a: int) -> int:
        if self.field is None or self.field.k == 1:
            return (-a) % self.order
        return algebra.neg(self.field, a)

    def sub(self, a: int, b: int) -> int:
        return self.add(a, self.neg(b))

    def nonzero(self) -> range:
        return range(1, self.order)


def field_group(field: FieldSpec) -> Group:
    return Group(order=field.q, field=field)


def zn_group(n: int) -> Group:
    CyclicRing(n)  # validates oddness and size
    return Group(order=n)


@dataclass(frozen=True, slots=True)
class Provenance:
    kind: str  # "horton" | "patterned" | "negated" | "custom"
    beta: int | None = None
    inner: "Provenance | None" = None

    @staticmethod
    def horton(beta: int) -> "Provenance":
        return Provenance(kind="horton", beta=beta)

    @staticmethod
    def patterned() -> "Provenance":
        return Provenance(kind="patterned")

    @staticmethod
    def negated(inner: "Provenance") -> "Provenance":
        return Provenance(kind="negated", inner=inner)

    @staticmethod
    def custom() -> "Provenance":
        return Provenance(kind="custom")


@dataclass(frozen=True, slots=True)
class Starter:
    group: Group
    pairs: tuple[Pair, ...]
    provenance: Provenance


@dataclass(slots=True)
class StarterReport:
    is_starter: bool
    is_strong: bool
    sum_set: tuple[int, ...]
    violations: list[str] = dc_field(default_factory=list)


@dataclass(slots=True)
class OrthogonalityReport:
    orthogonal: bool
    displacements: tuple[int, ...]
    violations: list[str] = dc_field(default_factory=list)


def normalize_pairs(pairs) -> tuple[Pair, ...]:
    """Smaller encoding first within a pair; pairs sorted by first endpoint."""
    return tuple(sorted((min(x, y), max(x, y)) for x, y in pairs))


def horton_starter(field: FieldSpec, beta: int) -> Starter:
    """S_beta = {{x, x*beta} : x in QR(q)} for beta a non-residue, beta != -1.

    Requires q = 3 (mod 4) and q > 3; each pair joins a residue to a
    non-residue, and the pair sums form the coset (1+beta)*QR(q).
    """
    if field.q % 4 != 3 or field.q == 3:
        raise BadField(f"Horton starter needs q = 3 (mod 4), q > 3; got q = {field.q}")
    cls = algebra.residue_class(field, beta)
    if cls is not ResidueClass.NQR:
        raise BadBeta(f"beta = {beta} is {cls.value}, need a non-residue")
    if beta == algebra.minus_one(field):
        raise BadBeta("beta = -1 is excluded")
    pairs = [(x, algebra.mul(field, x, beta)) for x in algebra.qr_set(field)]
    return Starter(
        group=field_group(field),
        pairs=normalize_pairs(pairs),
        provenance=Provenance.horton(beta),
    )


def patterned_starter(group: Group) -> Starter:
    """P = {{x, -x}}, one pair per negation orbit of the nonzero elements."""
    pairs = [(x, group.neg(x)) for x in group.nonzero() if x < group.neg(x)]
    return Starter(group=group, pairs=normalize_pairs(pairs), provenance=Provenance.patterned())


def negate_starter(group: Group, s: Starter) -> Starter:
    """-S = {{-x, -y}}; a starter whenever s is one."""
    pairs = [(group.neg(x), group.neg(y)) for x, y in s.pairs]
    return Starter(
        group=group,
        pairs=normalize_pairs(pairs),
        provenance=Provenance.negated(s.provenance),
    )


def custom_starter(group: Group, pairs) -> Starter:
    return Starter(group=group, pairs=normalize_pairs(pairs), provenance=Provenance.custom())


def validate_starter(group: Group, s: Starter) -> StarterReport:
    """Check the two cover conditions and, on top, the strong-starter conditions.

    Reports violations instead of raising: mathematical failure is data here.
    """
    n = group.order
    k = (n - 1) // 2
    violations: list[str] = []

    if len(s.pairs) != k:
        violations.append(f"expected {k} pairs for order {n}, got {len(s.pairs)}")

    endpoint_counts: dict[int, int] = {}
    for x, y in s.pairs:
        for v in (x, y):
            if not 0 < v < n:
                violations.append(f"endpoint {v} is not a nonzero group element")
            endpoint_counts[v] = endpoint_counts.get(v, 0) + 1
    for v in group.nonzero():
        c = endpoint_counts.get(v, 0)
        if c == 0:
            violations.append(f"endpoint {v} missing")
        elif c > 1:
            violations.append(f"endpoint {v} appears {c} times")

    diff_counts: dict[int, int] = {}
    for x, y in s.pairs:
        d = group.sub(x, y)
        diff_counts[d] = diff_counts.get(d, 0) + 1
        diff_counts[group.neg(d)] = diff_counts.get(group.neg(d), 0) + 1
    for v in group.nonzero():
        c = diff_counts.get(v, 0)
        if c == 0:
            violations.append(f"difference {v} missing")
        elif c > 1:
            violations.append(f"difference {v} covered {c} times")
    if diff_counts.get(0):
        violations.append("zero difference present (degenerate pair)")

    is_starter = not violations

    sums = [group.add(x, y) for x, y in s.pairs]
    strong_violations: list[str] = []
    for (x, y), total in zip(s.pairs, sums):
        if total == 0:
            strong_violations.append(f"pair ({x},{y}) has zero sum")
    seen: dict[int, Pair] = {}
    for (x, y), total in zip(s.pairs, sums):
        if total in seen and total != 0:
            a, b = seen[total]
            strong_violations.append(
                f"pairs ({a},{b}) and ({x},{y}) share the sum {total}"
            )
        seen.setdefault(total, (x, y))

    is_strong = is_starter and not strong_violations
    violations.extend(strong_violations)
    return StarterReport(
        is_starter=is_starter,
        is_strong=is_strong,
        sum_set=tuple(sorted(set(sums))),
        violations=violations,
    )


def starters_orthogonal(group: Group, s: Starter, t: Starter) -> OrthogonalityReport:
    """Decide starter orthogonality by matching pairs through their differences.

    Each pair of s with difference +-d is matched to the unique pair of t
    covering the same +-d, oriented so the signed differences agree; the
    starters are orthogonal iff the displacements u - x are nonzero and
    pairwise distinct.
    """
    diff_to_oriented: dict[int, Pair] = {}
    for u, v in t.pairs:
        d = group.sub(u, v)
        if d in diff_to_oriented or group.neg(d) in diff_to_oriented:
            raise MalformedStarter(f"difference {d} covered twice in second starter")
        diff_to_oriented[d] = (u, v)
        diff_to_oriented[group.neg(d)] = (v, u)

    displacements: list[int] = []
    violations: list[str] = []
    seen: dict[int, Pair] = {}
    for x, y in s.pairs:
        d = group.sub(x, y)
        if d not in diff_to_oriented:
            raise MalformedStarter(f"no pair with difference +-{d} in second starter")
        u, v = diff_to_oriented[d]
        disp = group.sub(u, x)
        displacements.append(disp)
        if disp == 0:
            violations.append(f"pair ({x},{y}) maps to itself (zero displacement)")
        elif disp in seen:
            a, b = seen[disp]
            violations.append(
                f"pairs ({a},{b}) and ({x},{y}) share the displacement {disp}"
            )
        seen.setdefault(disp, (x, y))

    return OrthogonalityReport(
        orthogonal=not violations,
        displacements=tuple(displacements),
        violations=violations,
    )


# ---------------------------------------------------------------------------
# Serialization.


def group_to_jsonable(group: Group) -> dict:
    if group.field is not None:
        return algebra.field_to_jsonable(group.field)
    return {"n": group.order}


def group_from_jsonable(obj: dict) -> Group:
    if "q" in obj:
        return field_group(algebra.field_from_jsonable(obj))
    if "n" in obj:
        return zn_group(int(obj["n"]))
    raise ValueError(f"group object needs 'q' or 'n': {obj!r}")


def provenance_to_jsonable(prov: Provenance) -> dict:
    obj: dict = {"kind": prov.kind}
    if prov.beta is not None:
        obj["beta"] = prov.beta
    if prov.inner is not None:
        obj["inner"] = provenance_to_jsonable(prov.inner)
    return obj


def provenance_from_jsonable(obj: dict) -> Provenance:
    kind = obj.get("kind")
    if kind not in ("horton", "patterned", "negated", "custom"):
        raise ValueError(f"unknown provenance kind: {kind!r}")
    beta = obj.get("beta")
    inner = obj.get("inner")
    return Provenance(
        kind=kind,
        beta=int(beta) if beta is not None else None,
        inner=provenance_from_jsonable(inner) if inner is not None else None,
    )


def starter_to_jsonable(s: Starter) -> dict:
    return {
        "group": group_to_jsonable(s.group),
        "provenance": provenance_to_jsonable(s.provenance),
        "pairs": [list(p) for p in s.pairs],
    }


def starter_from_jsonable(obj: dict) -> Starter:
    try:
        group = group_from_jsonable(obj["group"])
        provenance = provenance_from_jsonable(obj["provenance"])
        raw_pairs = obj["pairs"]
    except KeyError as exc:
        raise ValueError(f"starter object missing key {exc}") from exc
    pairs = []
    for entry in raw_pairs:
        if len(entry) != 2:
            raise ValueError(f"pair {entry!r} must have exactly two endpoints")
        pairs.append((int(entry[0]), int(entry[1])))
    return Starter(group=group, pairs=normalize_pairs(pairs), provenance=provenance)
