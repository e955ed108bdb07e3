"""Exact arithmetic for GF(p^k) and Z_n, plus quadratic-residue machinery.

Elements of GF(p^k) are encoded as integers in [0, q): the base-p digits of
the encoding are the little-endian coefficients of the residue polynomial.
For k = 1 this is the usual residue mod p.  All operations are pure
functions taking the FieldSpec first; per-field lookup tables (addition,
negation, residue classes) are built once behind ``functools.lru_cache`` and
never mutated afterwards, so field values are safe to share across threads.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from functools import lru_cache


class NotPrimePower(ValueError):
    """Order is not p^k for a single prime p."""


class EvenOrder(ValueError):
    """Order is even (fields of characteristic 2 and even rings are unsupported)."""


class DivisionByZero(ZeroDivisionError):
    """Multiplicative inverse of zero requested."""


# Desk scale: campaigns never need larger orders, and table caches assume this.
MAX_ORDER = 1 << 20

# Extension-field add/neg tables are only built below this order.
_TABLE_LIMIT = 4096


class ResidueClass(Enum):
    ZERO = "Zero"
    QR = "QR"
    NQR = "NQR"


@dataclass(frozen=True, slots=True)
class FieldSpec:
    """Descriptor of GF(p^k), q = p^k odd.

    ``reduction_poly`` is the monic irreducible polynomial used for k > 1,
    stored little-endian with k+1 coefficients (leading 1 included); None
    for prime fields.
    """

    p: int
    k: int
    q: int
    reduction_poly: tuple[int, ...] | None = None


@dataclass(frozen=True, slots=True)
class CyclicRing:
    """Z_n with addition mod n; n odd, n >= 3.  Additive structure only."""

    n: int

    def __post_init__(self) -> None:
        if self.n < 3:
            raise ValueError(f"cyclic ring needs n >= 3, got {self.n}")
        if self.n % 2 == 0:
            raise EvenOrder(f"cyclic ring order must be odd, got {self.n}")


def _is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n < 4:
        return True
    if n % 2 == 0:
        return False
    d = 3
    while d * d <= n:
        if n % d == 0:
            return False
        d += 2
    return True


def _smallest_prime_factor(n: int) -> int:
    if n % 2 == 0:
        return 2
    d = 3
    while d * d <= n:
        if n % d == 0:
            return d
        d += 2
    return n


# ---------------------------------------------------------------------------
# Polynomial helpers over GF(p); coefficient lists are little-endian.


def _poly_mod(a: list[int], b: list[int], p: int) -> list[int]:
    """Remainder of a mod b over GF(p); b must have nonzero leading coeff."""
    a = list(a)
    db = len(b) - 1
    lead_inv = pow(b[-1], p - 2, p)
    for i in range(len(a) - 1, db - 1, -1):
        c = a[i]
        if c:
            factor = c * lead_inv % p
            for j in range(db + 1):
                a[i - db + j] = (a[i - db + j] - factor * b[j]) % p
    while a and a[-1] == 0:
        a.pop()
    return a


def _monic_polys(degree: int, p: int):
    """All monic polynomials of the given degree, in encoding order."""
    for t in range(p**degree):
        coeffs = [(t // p**i) % p for i in range(degree)]
        coeffs.append(1)
        yield coeffs


def _is_irreducible(coeffs: list[int], p: int, k: int) -> bool:
    # Trial division by every monic polynomial of degree <= k/2 suffices at
    # desk scale (k <= 5): any factorization has a factor of such degree.
    for d in range(1, k // 2 + 1):
        for g in _monic_polys(d, p):
            if not _poly_mod(coeffs, g, p):
                return False
    return True


def _find_reduction_poly(p: int, k: int) -> tuple[int, ...]:
    """Lexicographically least (by base-p encoding) monic irreducible of degree k."""
    for t in range(p**k):
        coeffs = [(t // p**i) % p for i in range(k)]
        coeffs.append(1)
        if _is_irreducible(coeffs, p, k):
            return tuple(coeffs)
    raise AssertionError(f"no irreducible polynomial of degree {k} over GF({p})")


def make_field(q: int) -> FieldSpec:
    """Build the canonical FieldSpec for odd prime power q.

    Raises NotPrimePower if q is not a prime power, EvenOrder if q is even.
    Deterministic: the reduction polynomial is the lex-least monic
    irreducible of degree k.
    """
    if not isinstance(q, int) or q < 2:
        raise NotPrimePower(f"{q} is not a prime power >= 3")
    if q > MAX_ORDER:
        raise ValueError(f"order {q} exceeds supported maximum {MAX_ORDER}")
    p = _smallest_prime_factor(q)
    k = 0
    rest = q
    while rest % p == 0:
        rest //= p
        k += 1
    if rest != 1:
        raise NotPrimePower(f"{q} has at least two distinct prime factors")
    if p == 2:
        raise EvenOrder(f"{q} is even; only odd orders are supported")
    if k == 1:
        return FieldSpec(p=p, k=1, q=q)
    return FieldSpec(p=p, k=k, q=q, reduction_poly=_find_reduction_poly(p, k))


# ---------------------------------------------------------------------------
# Element encoding.


def to_digits(field: FieldSpec, a: int) -> list[int]:
    p = field.p
    return [(a // p**i) % p for i in range(field.k)]


def from_digits(field: FieldSpec, digits: list[int]) -> int:
    p = field.p
    return sum(int(c) % p * p**i for i, c in enumerate(digits))


def _check_elem(field: FieldSpec, a: int) -> None:
    if not 0 <= a < field.q:
        raise ValueError(f"element {a} out of range for field of order {field.q}")


# ---------------------------------------------------------------------------
# Cached per-field tables.


@lru_cache(maxsize=None)
def _add_table(field: FieldSpec) -> tuple[tuple[int, ...], ...]:
    p, k, q = field.p, field.k, field.q
    digits = [to_digits(field, a) for a in range(q)]
    rows = []
    for a in range(q):
        da = digits[a]
        row = [
            sum(((da[i] + db[i]) % p) * p**i for i in range(k))
            for db in digits
        ]
        rows.append(tuple(row))
    return tuple(rows)


@lru_cache(maxsize=None)
def _neg_table(field: FieldSpec) -> tuple[int, ...]:
    p = field.p
    return tuple(
        from_digits(field, [(-d) % p for d in to_digits(field, a)])
        for a in range(field.q)
    )


def add(field: FieldSpec, a: int, b: int) -> int:
    if field.k == 1:
        return (a + b) % field.p
    if field.q <= _TABLE_LIMIT:
        return _add_table(field)[a][b]
    p = field.p
    da, db = to_digits(field, a), to_digits(field, b)
    return sum(((da[i] + db[i]) % p) * p**i for i in range(field.k))


def neg(field: FieldSpec, a: int) -> int:
    if field.k == 1:
        return (-a) % field.p
    if field.q <= _TABLE_LIMIT:
        return _neg_table(field)[a]
    p = field.p
    return from_digits(field, [(-d) % p for d in to_digits(field, a)])


def sub(field: FieldSpec, a: int, b: int) -> int:
    return add(field, a, neg(field, b))


def mul(field: FieldSpec, a: int, b: int) -> int:
    if field.k == 1:
        return a * b % field.p
    p, k = field.p, field.k
    da, db = to_digits(field, a), to_digits(field, b)
    prod = [0] * (2 * k - 1)
    for i, ca in enumerate(da):
        if ca:
            for j, cb in enumerate(db):
                prod[i + j] = (prod[i + j] + ca * cb) % p
    red = field.reduction_poly
    for i in range(2 * k - 2, k - 1, -1):
        c = prod[i]
        if c:
            prod[i] = 0
            for j in range(k):
                if red[j]:
                    prod[i - k + j] = (prod[i - k + j] - c * red[j]) % p
    return sum(prod[i] * p**i for i in range(k))


def power(field: FieldSpec, a: int, e: int) -> int:
    """a^e by square-and-multiply; negative e goes through the inverse."""
    _check_elem(field, a)
    if e < 0:
        return power(field, inv(field, a), -e)
    if field.k == 1:
        return pow(a, e, field.p)
    result = 1
    base = a
    while e:
        if e & 1:
            result = mul(field, result, base)
        base = mul(field, base, base)
        e >>= 1
    return result


def inv(field: FieldSpec, a: int) -> int:
    if a == 0:
        raise DivisionByZero(f"inverse of 0 in field of order {field.q}")
    if field.k == 1:
        return pow(a, field.p - 2, field.p)
    return power(field, a, field.q - 2)


def div(field: FieldSpec, a: int, b: int) -> int:
    """x/y realized as mul(x, inv(y)); never accepts y = 0."""
    return mul(field, a, inv(field, b))


def one(field: FieldSpec) -> int:
    return 1


def minus_one(field: FieldSpec) -> int:
    """Encoding of -1: the constant polynomial p-1."""
    return field.p - 1


def two(field: FieldSpec) -> int:
    """Encoding of 1+1 (equals -1 in characteristic 3)."""
    return add(field, 1, 1)


# ---------------------------------------------------------------------------
# Quadratic residues.


@lru_cache(maxsize=None)
def _residue_table(field: FieldSpec) -> tuple[ResidueClass, ...]:
    """Euler-criterion class of every element, cached per field."""
    q = field.q
    half = (q - 1) // 2
    m1 = minus_one(field)
    classes = [ResidueClass.ZERO]
    for a in range(1, q):
        e = power(field, a, half)
        if e == 1:
            classes.append(ResidueClass.QR)
        elif e == m1:
            classes.append(ResidueClass.NQR)
        else:
            raise AssertionError(f"Euler criterion broke at {a} in GF({q})")
    return tuple(classes)


def residue_class(field: FieldSpec, a: int) -> ResidueClass:
    """Zero / QR / NQR by the Euler criterion a^((q-1)/2)."""
    _check_elem(field, a)
    return _residue_table(field)[a]


def qr_set(field: FieldSpec) -> tuple[int, ...]:
    table = _residue_table(field)
    return tuple(a for a in range(1, field.q) if table[a] is ResidueClass.QR)


def nqr_set(field: FieldSpec) -> tuple[int, ...]:
    table = _residue_table(field)
    return tuple(a for a in range(1, field.q) if table[a] is ResidueClass.NQR)


def cyclotomic_number(field: FieldSpec, i: int, j: int) -> int:
    """|{x in C_i : x+1 in C_j}| for the two cosets C_0 = QR, C_1 = NQR."""
    if i not in (0, 1) or j not in (0, 1):
        raise ValueError("cyclotomic indices must be 0 or 1 (e = 2 cosets)")
    table = _residue_table(field)
    ci = ResidueClass.QR if i == 0 else ResidueClass.NQR
    cj = ResidueClass.QR if j == 0 else ResidueClass.NQR
    count = 0
    for x in range(1, field.q):
        if table[x] is ci and table[add(field, x, 1)] is cj:
            count += 1
    return count


# ---------------------------------------------------------------------------
# Serialization.


def field_to_jsonable(field: FieldSpec) -> dict:
    obj = {"q": field.q, "p": field.p, "k": field.k}
    if field.k > 1:
        obj["poly"] = list(field.reduction_poly)
    return obj


def field_from_jsonable(obj: dict) -> FieldSpec:
    try:
        q = int(obj["q"])
    except (KeyError, TypeError, ValueError) as exc:
        raise ValueError(f"bad field object: {obj!r}") from exc
    field = make_field(q)
    if "p" in obj and int(obj["p"]) != field.p:
        raise ValueError(f"field object claims p={obj['p']}, expected {field.p}")
    if "k" in obj and int(obj["k"]) != field.k:
        raise ValueError(f"field object claims k={obj['k']}, expected {field.k}")
    if field.k > 1:
        poly = obj.get("poly")
        if poly is not None and tuple(int(c) for c in poly) != field.reduction_poly:
            raise ValueError(
                f"unsupported reduction polynomial {poly}; "
                f"canonical is {list(field.reduction_poly)}"
            )
    return field
