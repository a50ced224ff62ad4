"""Continued fractions of sqrt(D), convergents, fundamental units, and the
estimates for the symmetric expansions [k; u, ..., u, 2k]."""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import mpmath

from .errors import HypothesisNotMet, PerfectSquare
from .intervals import Interval, decide, less
from .factor import is_squarefree
from .quadfield import FieldContext, QuadInt, make_field


@dataclass(frozen=True)
class CFExpansion:
    D: int
    a0: int
    period: tuple[int, ...]
    squarefree: bool | None = True

    def term(self, i: int) -> int:
        """a_i for any i >= 0."""
        if i == 0:
            return self.a0
        return self.period[(i - 1) % len(self.period)]

    def to_json(self) -> dict:
        return {"D": str(self.D), "a0": self.a0, "period": list(self.period)}


@dataclass(frozen=True)
class Convergent:
    i: int
    p: int
    q: int
    D: int

    @property
    def N(self) -> int:
        return self.p * self.p - self.D * self.q * self.q

    @property
    def alpha(self) -> QuadInt:
        F = make_field(self.D)
        return F.from_surd(F.den * self.p, F.den * self.q)

    def to_json(self) -> dict:
        return {"i": self.i, "p": str(self.p), "q": str(self.q), "N": str(self.N)}


def expand_sqrt(D: int) -> CFExpansion:
    """Periodic expansion of sqrt(D) by the integer (P, Q) surd recurrence."""
    if D < 2:
        raise ValueError("D must be >= 2")
    a0 = math.isqrt(D)
    if a0 * a0 == D:
        raise PerfectSquare(f"{D} is a perfect square")
    m, d, a = 0, 1, a0
    first = None
    period = []
    while True:
        m = d * a - m
        d = (D - m * m) // d
        a = (a0 + m) // d
        if first is None:
            first = (m, d)
        elif (m, d) == first:
            break
        period.append(a)
    return CFExpansion(D, a0, tuple(period), is_squarefree(D))


def convergents(exp: CFExpansion, n: int) -> list[Convergent]:
    """The first n convergents p_i/q_i, i = 0..n-1."""
    if n < 1:
        raise ValueError("n must be >= 1")
    out = []
    p_prev, p = 1, exp.a0
    q_prev, q = 0, 1
    out.append(Convergent(0, p, q, exp.D))
    for i in range(1, n):
        a = exp.term(i)
        p_prev, p = p, a * p + p_prev
        q_prev, q = q, a * q + q_prev
        out.append(Convergent(i, p, q, exp.D))
    return out


def check_size_bound(conv: Convergent, a_next: int) -> bool:
    """|N_i| < 2 sqrt(D)/a_{i+1} + 1/(a_{i+1} q_i^2), decided exactly.

    Multiplying through by a q^2 gives |N| a q^2 - 1 < 2 q^2 sqrt(D), which is
    settled by one integer squaring.
    """
    q2 = conv.q * conv.q
    lhs = abs(conv.N) * a_next * q2 - 1
    if lhs < 0:
        return True
    return lhs * lhs < 4 * q2 * q2 * conv.D


def _cube_root_unit(F: FieldContext, eta: QuadInt, nrm: int) -> QuadInt | None:
    """A unit e of O_K with e^3 = eta, if one exists."""
    a, b = eta.as_sqrt_coords()
    digits = len(str(abs(a.numerator))) + 30
    with mpmath.workdps(digits):
        value = mpmath.mpf(a.numerator) / a.denominator + mpmath.mpf(b.numerator) / b.denominator * mpmath.sqrt(F.D)
        e = mpmath.cbrt(value)
        t0 = int(mpmath.nint(e + nrm / e))
    for t in (t0 - 1, t0, t0 + 1):
        b2, r = divmod(t * t - 4 * nrm, F.D)
        if r or b2 < 0:
            continue
        bb = math.isqrt(b2)
        if bb * bb != b2 or (t - bb) % 2:
            continue
        try:
            cand = F.from_surd(t, bb) if F.den == 2 else None
        except ValueError:
            continue
        if cand is not None and cand * cand * cand == eta:
            return cand
    return None


def fundamental_unit(field: FieldContext) -> tuple[QuadInt, int]:
    """(eps, N(eps)) with eps > 1 the fundamental unit of O_K."""
    exp = expand_sqrt(field.D)
    r = len(exp.period)
    c = convergents(exp, r)[-1]
    eta, nrm = c.alpha, c.N
    if field.den == 2:
        # [O_K^* : Z[sqrt D]^*] is 1 or 3
        root = _cube_root_unit(field, eta, nrm)
        if root is not None:
            return root, root.norm()
    return eta, nrm


# --- the family [k; u, ..., u, 2k] ------------------------------------------------


def q_recurrence(u: int, l: int) -> list[int]:
    """[q_0, ..., q_l] from q_-1 = 0, q_0 = 1, q_{i+1} = u q_i + q_{i-1}."""
    qs = [1]
    prev = 0
    for _ in range(l):
        qs.append(u * qs[-1] + prev)
        prev = qs[-2]
    return qs


def check_q_identities(u: int, l: int) -> dict:
    """Verify the q-sequence identities; report the first counterexample."""
    if u < 1 or l < 1:
        raise ValueError("need u >= 1 and l >= 1")
    qs = q_recurrence(u, l)

    def q(i: int) -> int:
        return 0 if i == -1 else qs[i]

    report = {"u": u, "l": l, "a": True, "second": True, "c": None, "counterexample": None}
    for i in range(1, l + 1):
        for j in range(0, i):
            lhs = q(i) * q(j - 1) - q(i - 1) * q(j)
            rhs = (-1) ** (j + 1) * q(i - j - 1)
            if lhs != rhs:
                report["a"] = False
                report["counterexample"] = report["counterexample"] or ("a", i, j, lhs, rhs)
        lhs = q(i) * q(i - 2) if i >= 1 else 0
        lhs -= q(i - 1) ** 2
        if lhs != (-1) ** i:
            report["second"] = False
            report["counterexample"] = report["counterexample"] or ("second", i, lhs)
    if u % 2 == 0:
        report["c"] = all(qs[i] % 2 == 0 for i in range(1, l + 1, 2))
        if not report["c"]:
            report["counterexample"] = report["counterexample"] or ("c",)
    report["passed"] = report["a"] and report["second"] and report["c"] is not False
    return report


def rho_product_exact(u: int) -> Fraction:
    """rho_+ rho_- computed in Q(sqrt(u^2+4)): (u/2)^2 - (1/2)^2 (u^2+4)."""
    half = Fraction(1, 2)
    return (u * half) ** 2 - half**2 * (u * u + 4)


@dataclass(frozen=True)
class BinetQuantities:
    """Interval enclosures of rho_pm, c_pm, c'_pm at a given precision."""

    u: int
    k: int
    D: int
    bits: int
    rho_plus: Interval
    rho_minus: Interval
    c_plus: Interval
    c_minus: Interval
    cprime_plus: Interval
    cprime_minus: Interval

    def alpha(self, i: int) -> Interval:
        return self.c_plus * self.rho_plus**i + self.c_minus * self.rho_minus**i

    def alpha_conj(self, i: int) -> Interval:
        return self.cprime_plus * self.rho_plus**i + self.cprime_minus * self.rho_minus**i


def binet_quantities(u: int, k: int, D: int, bits: int = 128) -> BinetQuantities:
    if u < 1 or k < 1 or D < 2:
        raise ValueError("need u >= 1, k >= 1, D >= 2")
    s = Interval.sqrt(u * u + 4, bits)
    sd = Interval.sqrt(D, bits)
    rp = (s + u) * Fraction(1, 2)
    rm = (-s + u) * Fraction(1, 2)
    kp, km = sd + k, -sd + k
    return BinetQuantities(
        u, k, D, bits,
        rho_plus=rp,
        rho_minus=rm,
        c_plus=(kp * rp + 1) / s,
        c_minus=(-(kp * rm) - 1) / s,
        cprime_plus=(km * rp + 1) / s,
        cprime_minus=(-(km * rm) - 1) / s,
    )


def check_technical(u: int, k: int, l: int, D: int, strict: bool = False) -> dict:
    """Decide the four estimates for the expansion [k; u x l, 2k] of sqrt(D).

    Each entry is "pass", "fail" or "hypothesis_not_met"; with strict=True a
    violated hypothesis raises HypothesisNotMet instead.
    """
    report: dict[str, object] = {"u": u, "k": k, "l": l, "D": str(D)}

    @lru_cache(maxsize=None)
    def bq(bits):
        return binet_quantities(u, k, D, bits)

    if k < u:
        if strict:
            raise HypothesisNotMet(f"k={k} < u={u}")
        report["a"] = "hypothesis_not_met"
    else:
        ok = decide(lambda bits: less(Interval.point(0), bq(bits).c_minus))
        report["a"] = "pass" if ok else "fail"

    if u < 2:
        if strict:
            raise HypothesisNotMet(f"u={u} < 2")
        for key in ("b", "c", "d"):
            report[key] = "hypothesis_not_met"
        return report

    lower = decide(lambda bits: less(bq(bits).rho_minus ** 2, abs(bq(bits).cprime_minus)))
    upper = decide(lambda bits: less(abs(bq(bits).cprime_minus), Interval.point(1)))
    report["b"] = "pass" if lower and upper else "fail"

    ok_c = decide(lambda bits: less(abs(bq(bits).cprime_plus), 2 / bq(bits).rho_plus**l))
    report["c"] = "pass" if ok_c else "fail"

    ok_d = True
    for n in range(0, (l - 4) // 2 + 1 if l >= 4 else 0):
        def pred(bits, n=n):
            b = bq(bits)
            return less(abs(b.cprime_plus * b.rho_plus**n), abs(b.cprime_minus * b.rho_minus**n) * Fraction(1, 2))

        if not decide(pred):
            ok_d = False
            report["d_counterexample"] = n
            break
    report["d"] = "pass" if ok_d else "fail"
    return report
