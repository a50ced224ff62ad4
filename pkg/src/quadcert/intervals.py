"""Certified interval arithmetic over rationals with dyadic square roots.

Only the handful of operations needed for the continued-fraction estimates are
provided.  Strict comparisons are decided by ``decide``, which re-evaluates
at doubled precision until the enclosures separate.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable

from .errors import Undecided
from .quadfield import sqrt_enclosure

PRECISION_START = 64
PRECISION_CAP = 4096


@dataclass(frozen=True)
class Interval:
    lo: Fraction
    hi: Fraction

    def __post_init__(self):
        if self.lo > self.hi:
            raise ValueError(f"empty interval [{self.lo}, {self.hi}]")

    @classmethod
    def point(cls, x) -> "Interval":
        x = Fraction(x)
        return cls(x, x)

    @classmethod
    def sqrt(cls, x, bits: int) -> "Interval":
        lo, hi = sqrt_enclosure(x, bits)
        return cls(lo, hi)

    @staticmethod
    def _lift(v) -> "Interval":
        return v if isinstance(v, Interval) else Interval.point(v)

    def __add__(self, other):
        o = self._lift(other)
        return Interval(self.lo + o.lo, self.hi + o.hi)

    __radd__ = __add__

    def __neg__(self):
        return Interval(-self.hi, -self.lo)

    def __sub__(self, other):
        return self + (-self._lift(other))

    def __rsub__(self, other):
        return self._lift(other) - self

    def __mul__(self, other):
        o = self._lift(other)
        ps = (self.lo * o.lo, self.lo * o.hi, self.hi * o.lo, self.hi * o.hi)
        return Interval(min(ps), max(ps))

    __rmul__ = __mul__

    def reciprocal(self) -> "Interval":
        if self.lo <= 0 <= self.hi:
            raise ZeroDivisionError("interval contains 0")
        return Interval(1 / self.hi, 1 / self.lo)

    def __truediv__(self, other):
        return self * self._lift(other).reciprocal()

    def __rtruediv__(self, other):
        return self._lift(other) * self.reciprocal()

    def __pow__(self, n: int):
        result = Interval.point(1)
        for _ in range(n):
            result = result * self
        return result

    def __abs__(self):
        if self.lo >= 0:
            return self
        if self.hi <= 0:
            return -self
        return Interval(Fraction(0), max(-self.lo, self.hi))

    @property
    def width(self) -> Fraction:
        return self.hi - self.lo

    def contains(self, x) -> bool:
        x = self._lift(x)
        return self.lo <= x.lo and x.hi <= self.hi

    def __float__(self):
        return float((self.lo + self.hi) / 2)


def less(a: Interval, b: Interval) -> bool | None:
    """True/False when the enclosures separate, None otherwise."""
    if a.hi < b.lo:
        return True
    if a.lo > b.hi:
        return False
    return None


def decide(predicate: Callable[[int], bool | None], cap: int = PRECISION_CAP) -> bool:
    """Evaluate predicate(bits) with doubling precision until it is decided."""
    bits = PRECISION_START
    while bits <= cap:
        verdict = predicate(bits)
        if verdict is not None:
            return verdict
        bits *= 2
    raise Undecided(f"comparison not separated at {cap} bits")
