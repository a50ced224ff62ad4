"""Exact arithmetic in the ring of integers of a real quadratic field.

Elements of O_K are stored in the integral basis {1, w} where w = sqrt(D) for
D = 2, 3 (mod 4) and w = (1 + sqrt(D))/2 for D = 1 (mod 4).  Every order
comparison between real embeddings is decided by integer sign analysis, never
by floating point.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Iterator, Sequence

from .errors import (
    FirstElementNotOne,
    MixedFields,
    NoGeneratorFound,
    NotSquarefree,
    NotTotallyPositive,
    OutOfRange,
    PreconditionNotMet,
    ZeroElement,
)

_SCALE_BITS = 64
_SCALE = 1 << _SCALE_BITS


def _sign(n) -> int:
    return (n > 0) - (n < 0)


def sign_surd(u, v, D: int) -> int:
    """Sign of u + v*sqrt(D) for rationals u, v and non-square D > 0."""
    if isinstance(u, Fraction) or isinstance(v, Fraction):
        u, v = Fraction(u), Fraction(v)
        # scale both by the positive product of denominators
        u, v = u.numerator * v.denominator, v.numerator * u.denominator
    su, sv = _sign(u), _sign(v)
    if sv == 0:
        return su
    if su == 0 or su == sv:
        return sv
    uu, vv = u * u, v * v * D
    return su if uu > vv else sv


def _is_square_free_int(n: int) -> bool:
    from .factor import squarefree_or_raise

    return squarefree_or_raise(n)


@dataclass(frozen=True)
class FieldContext:
    """K = Q(sqrt(D)) together with its integral basis data."""

    D: int

    @property
    def disc_class(self) -> int:
        return 1 if self.D % 4 == 1 else self.D % 4

    @property
    def delta_sq(self) -> int:
        """delta^2 where delta = sqrt(D) or 2 sqrt(D)."""
        return self.D if self.D % 4 == 1 else 4 * self.D

    @property
    def omega_descr(self) -> str:
        return "(1+sqrt(D))/2" if self.D % 4 == 1 else "sqrt(D)"

    @property
    def den(self) -> int:
        """Elements are (A + B sqrt(D))/den with integers A, B."""
        return 2 if self.D % 4 == 1 else 1

    @property
    def discriminant(self) -> int:
        return self.D if self.D % 4 == 1 else 4 * self.D

    def __call__(self, x: int, y: int = 0) -> "QuadInt":
        return QuadInt(self, x, y)

    @property
    def one(self) -> "QuadInt":
        return QuadInt(self, 1, 0)

    @property
    def zero(self) -> "QuadInt":
        return QuadInt(self, 0, 0)

    @property
    def omega(self) -> "QuadInt":
        return QuadInt(self, 0, 1)

    def from_surd(self, A: int, B: int) -> "QuadInt":
        """The element (A + B sqrt(D))/den; raises ValueError if not integral."""
        if self.den == 1:
            return QuadInt(self, A, B)
        if (A - B) % 2:
            raise ValueError(f"({A} + {B} sqrt D)/2 is not integral")
        return QuadInt(self, (A - B) // 2, B)

    def sqrt_d(self) -> "QuadInt":
        return self.from_surd(0, self.den)


@lru_cache(maxsize=4096)
def make_field(D: int) -> FieldContext:
    if not isinstance(D, int) or D < 2:
        raise OutOfRange(f"D must be an integer >= 2, got {D!r}")
    if not _is_square_free_int(D):
        raise NotSquarefree(f"{D} is not squarefree")
    return FieldContext(D)


class QuadInt:
    """x + y*w in O_K."""

    __slots__ = ("field", "x", "y")

    def __init__(self, field: FieldContext, x: int, y: int = 0):
        self.field = field
        self.x = int(x)
        self.y = int(y)

    # coordinates in the (1, sqrt(D)) basis, scaled by field.den
    @property
    def A(self) -> int:
        return 2 * self.x + self.y if self.field.den == 2 else self.x

    @property
    def B(self) -> int:
        return self.y

    def as_sqrt_coords(self) -> tuple[Fraction, Fraction]:
        """(a, b) with self = a + b sqrt(D)."""
        d = self.field.den
        return Fraction(self.A, d), Fraction(self.B, d)

    def _coerce(self, other) -> "QuadInt":
        if isinstance(other, QuadInt):
            if other.field != self.field:
                raise MixedFields(f"Q(sqrt {self.field.D}) vs Q(sqrt {other.field.D})")
            return other
        if isinstance(other, int):
            return QuadInt(self.field, other, 0)
        return NotImplemented

    def __add__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return QuadInt(self.field, self.x + o.x, self.y + o.y)

    __radd__ = __add__

    def __sub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return QuadInt(self.field, self.x - o.x, self.y - o.y)

    def __rsub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return o - self

    def __neg__(self):
        return QuadInt(self.field, -self.x, -self.y)

    def __mul__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        f = self.field
        xx, xy, yx, yy = self.x * o.x, self.x * o.y, self.y * o.x, self.y * o.y
        if f.den == 2:
            # w^2 = w + (D-1)/4
            return QuadInt(f, xx + yy * ((f.D - 1) // 4), xy + yx + yy)
        return QuadInt(f, xx + yy * f.D, xy + yx)

    __rmul__ = __mul__

    def __pow__(self, n: int):
        if n < 0:
            raise ValueError("negative powers leave O_K")
        result, base = QuadInt(self.field, 1, 0), self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def __eq__(self, other):
        if isinstance(other, int):
            return self.y == 0 and self.x == other
        if not isinstance(other, QuadInt):
            return NotImplemented
        return self.field == other.field and self.x == other.x and self.y == other.y

    def __hash__(self):
        return hash((self.field.D, self.x, self.y))

    def __bool__(self):
        return bool(self.x or self.y)

    def __repr__(self):
        return f"QuadInt(D={self.field.D}, x={self.x}, y={self.y})"

    def __str__(self):
        w = "w"
        if not self.y:
            return str(self.x)
        if not self.x:
            return f"{self.y}{w}"
        return f"{self.x}{'+' if self.y > 0 else '-'}{abs(self.y)}{w}"

    def conjugate(self) -> "QuadInt":
        if self.field.den == 2:
            return QuadInt(self.field, self.x + self.y, -self.y)
        return QuadInt(self.field, self.x, -self.y)

    def norm(self) -> int:
        A, B = self.A, self.B
        return (A * A - self.field.D * B * B) // (self.field.den**2)

    def trace(self) -> int:
        return 2 * self.A // self.field.den

    def embedding_sign(self, k: int) -> int:
        """Sign of the first (k=1: w > 0 branch) or second real embedding."""
        return sign_surd(self.A, self.B if k == 1 else -self.B, self.field.D)

    def key(self) -> tuple[int, int]:
        return (self.y, self.x)

    def to_json(self) -> list[str]:
        return [str(self.x), str(self.y)]


# --- module-level operations --------------------------------------------------


def norm(a: QuadInt) -> int:
    return a.norm()


def conjugate(a: QuadInt) -> QuadInt:
    return a.conjugate()


def trace(a: QuadInt) -> int:
    return a.trace()


def is_totally_positive(a: QuadInt) -> bool:
    A, B = a.A, a.B
    # A > 0 and A^2 > D B^2 is equivalent to both embeddings being positive
    return A > 0 and A * A > a.field.D * B * B


def is_totally_nonnegative(a) -> bool:
    return a.embedding_sign(1) >= 0 and a.embedding_sign(2) >= 0


def content(a: QuadInt) -> int:
    if not a:
        raise ZeroElement("content of 0 is undefined")
    return math.gcd(a.x, a.y)


def succ(a: QuadInt, b: QuadInt) -> bool:
    """a > b in the totally positive order."""
    return is_totally_positive(a - b)


def norm_le_delta(a: QuadInt) -> bool:
    """|N(a)| <= delta, decided as N^2 < delta^2 (equality is impossible)."""
    n = a.norm()
    n2, d2 = n * n, a.field.delta_sq
    if n2 == d2:
        raise AssertionError("N(a)^2 == delta^2 contradicts irrationality of delta")
    return n2 < d2


def norm_le_sqrt_delta(a: QuadInt) -> bool:
    """|N(a)| <= delta^(1/2), decided as N^4 < delta^2."""
    n4 = a.norm() ** 4
    d2 = a.field.delta_sq
    if n4 == d2:
        # delta^(1/2) is irrational for squarefree D
        raise AssertionError("N(a)^4 == delta^2 is impossible")
    return n4 < d2


# --- field elements with rational coordinates -------------------------------------


class FieldElement:
    """a + b sqrt(D) with rational a, b; used for quotients and LDL data."""

    __slots__ = ("field", "a", "b")

    def __init__(self, field: FieldContext, a, b=0):
        self.field = field
        self.a = Fraction(a)
        self.b = Fraction(b)

    @classmethod
    def of(cls, value) -> "FieldElement":
        if isinstance(value, FieldElement):
            return value
        a, b = value.as_sqrt_coords()
        return cls(value.field, a, b)

    def _c(self, other) -> "FieldElement":
        if isinstance(other, FieldElement):
            if other.field != self.field:
                raise MixedFields("field elements from different fields")
            return other
        if isinstance(other, QuadInt):
            return FieldElement.of(other)
        return FieldElement(self.field, other, 0)

    def __add__(self, other):
        o = self._c(other)
        return FieldElement(self.field, self.a + o.a, self.b + o.b)

    __radd__ = __add__

    def __sub__(self, other):
        o = self._c(other)
        return FieldElement(self.field, self.a - o.a, self.b - o.b)

    def __rsub__(self, other):
        return self._c(other) - self

    def __neg__(self):
        return FieldElement(self.field, -self.a, -self.b)

    def __mul__(self, other):
        o = self._c(other)
        D = self.field.D
        return FieldElement(self.field, self.a * o.a + D * self.b * o.b, self.a * o.b + self.b * o.a)

    __rmul__ = __mul__

    def norm(self) -> Fraction:
        return self.a * self.a - self.field.D * self.b * self.b

    def conjugate(self) -> "FieldElement":
        return FieldElement(self.field, self.a, -self.b)

    def inverse(self) -> "FieldElement":
        n = self.norm()
        if n == 0:
            raise ZeroDivisionError("inverse of 0")
        return FieldElement(self.field, self.a / n, -self.b / n)

    def __truediv__(self, other):
        return self * self._c(other).inverse()

    def __eq__(self, other):
        if isinstance(other, (FieldElement, QuadInt, int)):
            o = self._c(other)
            return self.a == o.a and self.b == o.b
        return NotImplemented

    def __hash__(self):
        return hash((self.field.D, self.a, self.b))

    def __bool__(self):
        return bool(self.a or self.b)

    def __repr__(self):
        return f"FieldElement(D={self.field.D}, {self.a} + {self.b}*sqrt(D))"

    def embedding_sign(self, k: int) -> int:
        return sign_surd(self.a, self.b if k == 1 else -self.b, self.field.D)

    def to_quadint(self) -> QuadInt | None:
        """The element as a QuadInt, or None when it is not integral."""
        den = self.field.den
        A, B = self.a * den, self.b * den
        if A.denominator != 1 or B.denominator != 1:
            return None
        try:
            return self.field.from_surd(int(A), int(B))
        except ValueError:
            return None

    def enclosure(self, k: int, bits: int = 64) -> tuple[Fraction, Fraction]:
        """Rational lower and upper bounds of the k-th real embedding."""
        lo_s, hi_s = sqrt_enclosure(self.field.D, bits)
        b = self.b if k == 1 else -self.b
        if b >= 0:
            return self.a + b * lo_s, self.a + b * hi_s
        return self.a + b * hi_s, self.a + b * lo_s


def sqrt_enclosure(x, bits: int = 64) -> tuple[Fraction, Fraction]:
    """Dyadic bounds lo <= sqrt(x) <= hi with hi - lo <= 2^-bits (x >= 0 rational)."""
    x = Fraction(x)
    if x < 0:
        raise ValueError("sqrt of a negative number")
    scaled = x * (1 << (2 * bits))
    lo = math.isqrt(scaled.numerator // scaled.denominator)
    return Fraction(lo, 1 << bits), Fraction(lo + 1, 1 << bits)


def _sqrt_upper(x: Fraction) -> Fraction:
    if x <= 0:
        return Fraction(0)
    return sqrt_enclosure(x, 32)[1]


def _floor_div(a: int, b: int) -> int:
    return a // b


def _ceil_div(a: int, b: int) -> int:
    return -((-a) // b)


def _box_candidates(
    field: FieldContext, lo1: Fraction, hi1: Fraction, lo2: Fraction, hi2: Fraction
) -> Iterator[QuadInt]:
    """Superset of {g in O_K : lo1 <= g <= hi1, lo2 <= g' <= hi2}, in (y, x) order.

    Bounds are widened by at most one lattice step; callers filter exactly.
    """
    if lo1 > hi1 or lo2 > hi2:
        return
    den, D, S = field.den, field.D, _SCALE
    L1 = math.floor(lo1 * den * S)
    H1 = math.ceil(hi1 * den * S)
    L2 = math.floor(lo2 * den * S)
    H2 = math.ceil(hi2 * den * S)
    # den*g - den*g' = 2 B sqrt(D)
    four_s2d = 4 * S * S * D

    def _b_bound(v: int) -> int:
        return math.isqrt(v * v // four_s2d)

    v_lo, v_hi = L1 - H2, H1 - L2
    b_min = -(_b_bound(v_lo) + 1) if v_lo < 0 else _b_bound(v_lo)
    b_max = (_b_bound(v_hi) + 1) if v_hi > 0 else -_b_bound(v_hi)
    s2d = S * S * D
    for B in range(b_min, b_max + 1):
        r = math.isqrt(B * B * s2d)
        if B >= 0:
            bsl, bsh = r, r + 1
        else:
            bsl, bsh = -r - 1, -r
        lo = max(L1 - bsh, L2 + bsl)
        hi = min(H1 - bsl, H2 + bsh)
        if lo > hi:
            continue
        a_lo, a_hi = _ceil_div(lo, S), _floor_div(hi, S)
        if den == 2:
            if (a_lo - B) % 2:
                a_lo += 1
            step = 2
        else:
            step = 1
        for A in range(a_lo, a_hi + 1, step):
            if den == 2:
                yield QuadInt(field, (A - B) // 2, B)
            else:
                yield QuadInt(field, A, B)


@dataclass(frozen=True)
class SqrtBound:
    """The bound sqrt(value) for a nonnegative rational value."""

    value: Fraction

    def __post_init__(self):
        object.__setattr__(self, "value", Fraction(self.value))
        if self.value < 0:
            raise ValueError("SqrtBound needs a nonnegative value")


def _bound_sq(b) -> Fraction:
    if isinstance(b, SqrtBound):
        return b.value
    b = Fraction(b)
    if b < 0:
        raise ValueError("bounds must be nonnegative")
    return b * b


def _bound_upper(b) -> Fraction:
    if isinstance(b, SqrtBound):
        return _sqrt_upper(b.value)
    return Fraction(b)


def _abs_embedding_le(g: QuadInt, k: int, bound_sq: Fraction) -> bool:
    # |g_k|^2 = (A^2 + D B^2 +- 2AB sqrt D)/den^2 <= bound_sq
    A, B, D, den = g.A, g.B, g.field.D, g.field.den
    u = bound_sq * den * den - A * A - D * B * B
    v = -2 * A * B if k == 1 else 2 * A * B
    return sign_surd(u, Fraction(v), D) >= 0


def enumerate_box(field: FieldContext, B1, B2) -> list[QuadInt]:
    """All g in O_K with |g| <= B1 and |g'| <= B2, sorted by (y, x).

    Bounds are nonnegative rationals or ``SqrtBound`` instances.
    """
    s1, s2 = _bound_sq(B1), _bound_sq(B2)
    u1, u2 = _bound_upper(B1), _bound_upper(B2)
    out = [
        g
        for g in _box_candidates(field, -u1, u1, -u2, u2)
        if _abs_embedding_le(g, 1, s1) and _abs_embedding_le(g, 2, s2)
    ]
    out.sort(key=QuadInt.key)
    return out


def embedding_upper(a, k: int) -> Fraction:
    return FieldElement.of(a).enclosure(k)[1]


def enumerate_dominated_squares(g: QuadInt) -> list[QuadInt]:
    """All c in O_K with g - c^2 totally positive (always contains 0)."""
    if not is_totally_positive(g):
        raise NotTotallyPositive(f"{g} is not totally positive")
    r1 = _sqrt_upper(embedding_upper(g, 1))
    r2 = _sqrt_upper(embedding_upper(g, 2))
    out = [c for c in _box_candidates(g.field, -r1, r1, -r2, r2) if is_totally_positive(g - c * c)]
    out.sort(key=QuadInt.key)
    return out


def decompose_oracle(a: QuadInt) -> tuple[QuadInt, QuadInt] | None:
    """Some (b, c) with b, c totally positive and b + c = a, or None."""
    if not is_totally_positive(a):
        raise NotTotallyPositive(f"{a} is not totally positive")
    h1, h2 = embedding_upper(a, 1), embedding_upper(a, 2)
    for b in _box_candidates(a.field, Fraction(0), h1, Fraction(0), h2):
        if is_totally_positive(b) and is_totally_positive(a - b):
            return b, a - b
    return None


def all_decompositions(a: QuadInt) -> list[tuple[QuadInt, QuadInt]]:
    """Every unordered split a = b + c into totally positive parts."""
    if not is_totally_positive(a):
        raise NotTotallyPositive(f"{a} is not totally positive")
    h1, h2 = embedding_upper(a, 1), embedding_upper(a, 2)
    seen, out = set(), []
    for b in _box_candidates(a.field, Fraction(0), h1, Fraction(0), h2):
        c = a - b
        if is_totally_positive(b) and is_totally_positive(c):
            pair = tuple(sorted((b, c), key=QuadInt.key))
            if pair not in seen:
                seen.add(pair)
                out.append(pair)
    return out


def is_indecomposable(a: QuadInt, mode: str = "sufficient") -> bool:
    if not is_totally_positive(a):
        raise NotTotallyPositive(f"{a} is not totally positive")
    if mode == "oracle":
        return decompose_oracle(a) is None
    if mode != "sufficient":
        raise ValueError(f"unknown mode {mode!r}")
    if not norm_le_delta(a):
        raise PreconditionNotMet(f"N({a}) = {a.norm()} exceeds delta")
    if content(a) != 1:
        raise PreconditionNotMet(f"{a} is divisible by {content(a)}")
    return True


def _rational_sqrt(q: Fraction) -> Fraction | None:
    if q < 0:
        return None
    n, d = math.isqrt(q.numerator), math.isqrt(q.denominator)
    if n * n == q.numerator and d * d == q.denominator:
        return Fraction(n, d)
    return None


def sqrt_in_field(q: FieldElement) -> FieldElement | None:
    """A square root of q inside K, or None if q is not a square in K."""
    if not q:
        return FieldElement(q.field, 0)
    r = _rational_sqrt(q.norm())
    if r is None:
        return None
    D = q.field.D
    for rr in (r, -r):
        e2 = (q.a + rr) / 2
        f2 = (q.a - rr) / (2 * D)
        e, f = _rational_sqrt(e2), _rational_sqrt(f2)
        if e is None or f is None:
            continue
        if 2 * e * f != abs(q.b):
            continue
        if q.b < 0:
            f = -f
        root = FieldElement(q.field, e, f)
        if root * root == q:
            return root
    return None


def square_class_witness(a: QuadInt, b: QuadInt) -> QuadInt | None:
    """x in O_K with a = b x^2, or None."""
    if not a or not b:
        raise ZeroElement("square classes of 0 are undefined")
    a._coerce(b)
    root = sqrt_in_field(FieldElement.of(a) / FieldElement.of(b))
    if root is None:
        return None
    x = root.to_quadint()
    if x is None or b * x * x != a:
        return None
    return x


def same_square_class(a: QuadInt, b: QuadInt) -> bool:
    """a/b is a square in K.

    This is the equivalence relation generated by a ~ b x^2 (x in O_K); it is
    coarser than the one-sided test, so a False answer also rules out both
    a = b x^2 and b = a x^2.
    """
    if not a or not b:
        raise ZeroElement("square classes of 0 are undefined")
    a._coerce(b)
    return sqrt_in_field(FieldElement.of(a) / FieldElement.of(b)) is not None


# --- certificates -------------------------------------------------------------------


@dataclass
class Certificate:
    """Outcome of checking the small-norm criterion for a list of elements."""

    field: FieldContext
    elements: list[QuadInt]
    checks: list[dict] = dc_field(default_factory=list)
    conclusion_M: int | None = None
    valid: bool = False
    cond4_mode: str = "brute"

    def failures(self) -> list[dict]:
        return [c for c in self.checks if not c["verdict"]]

    def to_json(self) -> dict:
        return {
            "D": str(self.field.D),
            "basis": ["1", self.field.omega_descr],
            "elements": [e.to_json() for e in self.elements],
            "cond4_mode": self.cond4_mode,
            "conditions": self.checks,
            "M": self.conclusion_M,
            "valid": self.valid,
        }

    @classmethod
    def from_json(cls, doc: dict) -> "Certificate":
        F = make_field(int(doc["D"]))
        elems = [F(int(x), int(y)) for x, y in doc["elements"]]
        return cls(
            field=F,
            elements=elems,
            checks=list(doc.get("conditions", [])),
            conclusion_M=doc.get("M"),
            valid=bool(doc.get("valid")),
            cond4_mode=doc.get("cond4_mode", "brute"),
        )


def _check(kind, where, verdict: bool, evidence: str) -> dict:
    rec = {"kind": kind, "verdict": bool(verdict), "evidence": evidence}
    if isinstance(where, tuple):
        rec["pair"] = list(where)
    else:
        rec["index"] = where
    return rec


def check_prop24(field: FieldContext, elems: Sequence[QuadInt], cond4_mode: str = "brute") -> Certificate:
    """Verify the four small-norm conditions for 1 = a_1, ..., a_M.

    A valid certificate shows that no classical totally positive form in
    M - 1 variables is universal over O_K.
    """
    if cond4_mode not in ("brute", "condition5"):
        raise ValueError(f"unknown cond4_mode {cond4_mode!r}")
    elems = list(elems)
    if not elems:
        raise ValueError("need at least one element")
    for e in elems:
        if e.field != field:
            raise MixedFields("element outside the certificate's field")
    if elems[0] != field.one:
        raise FirstElementNotOne(f"first element is {elems[0]}, expected 1")

    checks: list[dict] = []
    M = len(elems)
    for i, a in enumerate(elems):
        tp = is_totally_positive(a)
        checks.append(_check("totally_positive", i, tp, f"embedding signs ({a.embedding_sign(1)}, {a.embedding_sign(2)})"))
        n = a.norm()
        ok1 = tp and norm_le_delta(a)
        checks.append(_check("1", i, ok1, f"N={n}, N^2={n * n} vs delta^2={field.delta_sq}"))
        c = content(a)
        checks.append(_check("2", i, c == 1, f"content={c}"))
        if cond4_mode == "condition5":
            ok5 = tp and norm_le_sqrt_delta(a)
            checks.append(_check("5a", i, ok5, f"N^4={n ** 4} vs delta^2={field.delta_sq}"))

    for i in range(M):
        for j in range(i + 1, M):
            a, b = elems[i], elems[j]
            if not (is_totally_positive(a) and is_totally_positive(b)):
                checks.append(_check("3", (i, j), False, "not totally positive"))
                checks.append(_check("4", (i, j), False, "not totally positive"))
                continue
            same = same_square_class(a, b)
            if not same:
                ev = "a_i/a_j is not a square in K"
            else:
                x = square_class_witness(a, b) or square_class_witness(b, a)
                ev = "a_i/a_j is a square in K" + (f", integral root {x}" if x is not None else "")
            checks.append(_check("3", (i, j), not same, ev))
            prod = a * b
            if cond4_mode == "brute":
                dom = enumerate_dominated_squares(prod)
                nonzero = [c for c in dom if c]
                ev = f"condition 4 by box enumeration, {len(nonzero)} nonzero squares found"
                if nonzero:
                    ev += ": " + ", ".join(str(c) for c in nonzero[:4])
                checks.append(_check("4", (i, j), not nonzero, ev))
            else:
                cp = content(prod)
                checks.append(_check("5b", (i, j), cp == 1, f"content(a_i a_j)={cp}"))

    if cond4_mode == "condition5":
        # condition 4 follows from 5a on both indices and 5b on the pair
        by_index = {c["index"]: c["verdict"] for c in checks if c["kind"] == "5a"}
        for c in [c for c in checks if c["kind"] == "5b"]:
            i, j = c["pair"]
            ok = c["verdict"] and by_index[i] and by_index[j]
            checks.append(_check("4", (i, j), ok, "implied by condition 5 via indecomposability of a_i a_j"))

    valid = all(c["verdict"] for c in checks)
    return Certificate(field, elems, checks, M if valid else None, valid, cond4_mode)


# --- small-norm generators -------------------------------------------------------


def kronecker(a: int, n: int) -> int:
    """Kronecker symbol (a/n) for n >= 1."""
    if n == 0:
        return 1 if abs(a) == 1 else 0
    result = 1
    while n % 2 == 0:
        n //= 2
        if a % 2 == 0:
            return 0
        if a % 8 in (3, 5):
            result = -result
    # Jacobi symbol (a/n) for odd n
    a %= n
    while a:
        while a % 2 == 0:
            a //= 2
            if n % 8 in (3, 5):
                result = -result
        a, n = n, a
        if a % 4 == 3 and n % 4 == 3:
            result = -result
        a %= n
    return result if n == 1 else 0


def ideal_count(field: FieldContext, n: int) -> int:
    """Number of ideals of norm n: sum of chi_D(d) over d | n."""
    disc = field.discriminant
    return sum(kronecker(disc, d) for d in range(1, n + 1) if n % d == 0)


def totally_positive_unit(field: FieldContext) -> QuadInt:
    from .cfrac import fundamental_unit

    eps, nrm = fundamental_unit(field)
    return eps * eps if nrm == -1 else eps


def _normalize_into_period(g: QuadInt, eta: QuadInt) -> QuadInt:
    # target cone: 1 <= g/g' < eta^2, i.e. B(g) >= 0 and B(g * eta') < 0
    eta_c = eta.conjugate()
    while g.B < 0:
        g = g * eta
    while (g * eta_c).B >= 0:
        g = g * eta_c
    return g


def _first_embedding_less(a: QuadInt, b: QuadInt) -> bool:
    return (b - a).embedding_sign(1) > 0


def small_norm_generators(field: FieldContext, nmax: int) -> list[QuadInt]:
    """One canonical totally positive element of each squarefree norm n <= nmax.

    The caller asserts narrow class number one; NoGeneratorFound signals that
    the assertion failed for some n.
    """
    if nmax < 1:
        raise OutOfRange("nmax must be >= 1")
    eta = totally_positive_unit(field)
    out = [field.one]
    for n in range(2, nmax + 1):
        if not _is_square_free_int(n) or ideal_count(field, n) == 0:
            continue
        # every eta-orbit meets the window eta^-1 <= g/g' < eta, where both
        # embeddings are at most sqrt(n eta); solve A^2 = D B^2 + n den^2 there
        den, D = field.den, field.D
        b_max = math.isqrt(math.ceil(Fraction(n) * embedding_upper(eta, 1) * den * den / D)) + 1
        found: dict[QuadInt, None] = {}
        for B in range(-b_max, b_max + 1):
            A2 = D * B * B + n * den * den
            A = math.isqrt(A2)
            if A * A != A2 or (A - B) % den:
                continue
            g = field.from_surd(A, B)
            if is_totally_positive(g):
                found[_normalize_into_period(g, eta)] = None
        if not found:
            raise NoGeneratorFound(f"no totally positive element of norm {n} in Q(sqrt {field.D})")
        best = None
        for g in found:
            if best is None or _first_embedding_less(g, best):
                best = g
        out.append(best)
    return out


def parse_element(field: FieldContext, text: str) -> QuadInt:
    """Parse 'x,y' (basis coordinates) into a QuadInt."""
    x, _, y = text.partition(",")
    return field(int(x), int(y or 0))


def random_totally_positive(field: FieldContext, rng, size: int = 50) -> QuadInt:
    while True:
        g = field(rng.randint(-size, size), rng.randint(-size, size))
        if is_totally_positive(g):
            return g


def iter_totally_positive(field: FieldContext, trace_max: int) -> Iterable[QuadInt]:
    """Totally positive elements with trace <= trace_max, in (y, x) order."""
    t = Fraction(trace_max)
    for g in _box_candidates(field, Fraction(0), t, Fraction(0), t):
        if is_totally_positive(g) and g.trace() <= trace_max:
            yield g
