"""Simultaneous squarefree values of a quadratic and several linear polynomials.

Counts are exact: every prime p <= sqrt(max |value|) removes the arithmetic
progressions on which some polynomial vanishes mod p^2.  Root sets mod p^2 are
described as progressions (r, m) with m = p or m = p^2, which keeps huge
primes cheap and handles double roots and fixed prime divisors uniformly.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .errors import DegenerateSpec, NonSquarefreeModulus, UnresolvedFactorization
from .factor import DEFAULT_EFFORT, factorize
from .factor import is_squarefree as _factor_is_squarefree

SCAN_LENGTH = 64
BRUTE_MODULUS = 4
_SCALE_BITS = 160


def is_squarefree(n: int, effort: int = DEFAULT_EFFORT) -> bool | None:
    """True, False, or None when the factorization budget is exhausted."""
    return _factor_is_squarefree(n, effort)


Poly = tuple[int, ...]  # coefficients, highest degree first


def _eval(poly: Poly, x):
    acc = 0
    for c in poly:
        acc = acc * x + c
    return acc


@dataclass(frozen=True)
class SieveSpec:
    f: tuple[int, int, int]
    gs: tuple[tuple[int, int], ...] = ()

    def __post_init__(self):
        a, b, c = self.f
        if a == 0:
            raise DegenerateSpec("f must have degree 2")
        if self.discriminant == 0:
            raise DegenerateSpec("discriminant of f is 0")
        for k, r in self.gs:
            if k == 0 and r == 0:
                raise DegenerateSpec("g_j is identically 0")

    @classmethod
    def make(cls, f: Sequence[int], gs: Sequence[Sequence[int]] = ()) -> "SieveSpec":
        return cls(tuple(f), tuple(tuple(g) for g in gs))

    @property
    def discriminant(self) -> int:
        a, b, c = self.f
        return b * b - 4 * a * c

    @property
    def m(self) -> int:
        return len(self.gs)

    @property
    def polys(self) -> list[Poly]:
        return [self.f] + [tuple(g) for g in self.gs]

    @property
    def flagged(self) -> list[int]:
        """Indices of polynomials with no squarefree value among n = 1..SCAN_LENGTH."""
        out = []
        for idx, poly in enumerate(self.polys):
            vals = (_eval(poly, n) for n in range(1, SCAN_LENGTH + 1))
            if not any(v != 0 and is_squarefree(v) for v in vals):
                out.append(idx)
        return out

    def to_json(self) -> dict:
        return {"f": list(self.f), "g": [list(g) for g in self.gs]}


def shift_mod4(spec: SieveSpec) -> SieveSpec:
    """Substitute x -> 4x in f and every g_j."""
    a, b, c = spec.f
    return SieveSpec((16 * a, 4 * b, c), tuple((4 * k, r) for k, r in spec.gs))


# --- roots modulo p and p^2 ------------------------------------------------------


def _primes_upto(n: int) -> np.ndarray:
    if n < 2:
        return np.zeros(0, dtype=np.int64)
    mark = np.ones(n + 1, dtype=bool)
    mark[:2] = False
    for p in range(2, math.isqrt(n) + 1):
        if mark[p]:
            mark[p * p :: p] = False
    return np.flatnonzero(mark)


def _sqrt_mod_prime(a: int, p: int) -> int | None:
    """A square root of a modulo the odd prime p (Tonelli-Shanks), or None."""
    a %= p
    if a == 0:
        return 0
    if pow(a, (p - 1) // 2, p) != 1:
        return None
    if p % 4 == 3:
        return pow(a, (p + 1) // 4, p)
    q, s = p - 1, 0
    while q % 2 == 0:
        q //= 2
        s += 1
    z = 2
    while pow(z, (p - 1) // 2, p) != p - 1:
        z += 1
    m, c, t, r = s, pow(z, q, p), pow(a, q, p), pow(a, (q + 1) // 2, p)
    while t != 1:
        i, t2 = 0, t
        while t2 != 1:
            t2 = t2 * t2 % p
            i += 1
        b = pow(c, 1 << (m - i - 1), p)
        m, c, t, r = i, b * b % p, t * b * b % p, r * b % p
    return r


def _roots_mod_p(poly: Poly, p: int) -> list[int] | None:
    """Roots of poly mod p; None when poly vanishes identically mod p."""
    coeffs = [c % p for c in poly]
    while coeffs and coeffs[0] == 0:
        coeffs.pop(0)
    if not coeffs:
        return None
    if len(coeffs) == 1:
        return []
    if len(coeffs) == 2:
        k, r = coeffs
        return [(-r * pow(k, -1, p)) % p]
    a, b, c = coeffs
    if p == 2:
        return [x for x in range(2) if (a * x * x + b * x + c) % 2 == 0]
    disc = (b * b - 4 * a * c) % p
    inv = pow(2 * a, -1, p)
    if disc == 0:
        return [(-b * inv) % p]
    s = _sqrt_mod_prime(disc, p)
    if s is None:
        return []
    return sorted({((-b + s) * inv) % p, ((-b - s) * inv) % p})


def _derivative(poly: Poly) -> Poly:
    n = len(poly) - 1
    return tuple(c * (n - i) for i, c in enumerate(poly[:-1])) or (0,)


def progressions_mod_p2(poly: Poly, p: int) -> list[tuple[int, int]]:
    """Progressions (r, m), m in {p, p^2}, covering {x : p^2 | poly(x)}."""
    q = p * p
    if q <= BRUTE_MODULUS:
        return [(x, q) for x in range(q) if _eval(poly, x) % q == 0]
    roots = _roots_mod_p(poly, p)
    if roots is None:
        # poly = p * h, so p^2 | poly(x) iff p | h(x)
        h = tuple(c // p for c in poly)
        sub = _roots_mod_p(h, p)
        if sub is None:
            return [(0, 1)]
        return [(r, p) for r in sub]
    out = []
    dpoly = _derivative(poly)
    for r in roots:
        val = _eval(poly, r)
        slope = _eval(dpoly, r) % p
        if slope:
            t = (-(val // p) * pow(slope, -1, p)) % p
            out.append((r + p * t, q))
        elif val % q == 0:
            out.append((r, p))
    return out


def _residues_mod_p2(poly: Poly, p: int) -> set[int]:
    q = p * p
    out: set[int] = set()
    for r, m in progressions_mod_p2(poly, p):
        out.update(range(r % m, q, m))
    return out


# --- counting --------------------------------------------------------------------


def _integer_zeros(poly: Poly, X: int) -> list[int]:
    if len(poly) == 2:
        k, r = poly
        if k and r % k == 0 and 1 <= -r // k <= X:
            return [-r // k]
        return []
    a, b, c = poly
    disc = b * b - 4 * a * c
    if disc < 0:
        return []
    s = math.isqrt(disc)
    if s * s != disc:
        return []
    return sorted({z for num in (-b + s, -b - s) if num % (2 * a) == 0 and 1 <= (z := num // (2 * a)) <= X})


def _max_abs(poly: Poly, X: int) -> int:
    return sum(abs(c) * X ** (len(poly) - 1 - i) for i, c in enumerate(poly))


def _squarefree_mask(poly: Poly, X: int) -> np.ndarray:
    """mask[n] for n = 0..X: poly(n) nonzero and squarefree (mask[0] unused)."""
    mask = np.ones(X + 1, dtype=bool)
    mask[0] = False
    for z in _integer_zeros(poly, X):
        mask[z] = False
    for p in _primes_upto(math.isqrt(_max_abs(poly, X))):
        for r, m in progressions_mod_p2(poly, int(p)):
            start = r % m or m
            mask[start::m] = False
    return mask


def _joint_mask(spec: SieveSpec, X: int, include_f: bool = True) -> np.ndarray:
    mask = np.ones(X + 1, dtype=bool)
    mask[0] = False
    polys = spec.polys if include_f else spec.polys[1:]
    for poly in polys:
        mask &= _squarefree_mask(poly, X)
    return mask


def count_simultaneous(spec: SieveSpec, X: int) -> int:
    """#{1 <= n <= X : f(n), g_1(n), ..., g_m(n) all squarefree}."""
    if X < 1:
        raise ValueError("X must be >= 1")
    return int(_joint_mask(spec, X).sum())


def count_naive(spec: SieveSpec, X: int, effort: int = DEFAULT_EFFORT) -> int:
    """The same count by factoring every value separately."""
    total = 0
    for n in range(1, X + 1):
        good = True
        for poly in spec.polys:
            v = _eval(poly, n)
            if v == 0:
                good = False
                break
            verdict = is_squarefree(v, effort)
            if verdict is None:
                raise UnresolvedFactorization(f"squarefreeness of {v} unresolved", n=n)
            if not verdict:
                good = False
                break
        total += good
    return total


def _mobius_upto(n: int) -> np.ndarray:
    mu = np.ones(n + 1, dtype=np.int64)
    mu[0] = 0
    for p in _primes_upto(n):
        p = int(p)
        mu[p::p] *= -1
        mu[p * p :: p * p] = 0
    return mu


def count_mobius(spec: SieveSpec, X: int) -> int:
    """sum_{d} mu(d) #{n <= X : d^2 | f(n), every g_j(n) squarefree}.

    Divisors d run up to sqrt(max |f|); the g-conditions come from the sieve.
    Zeros of f are excluded up front, as in the other counts.
    """
    f = spec.f
    gmask = _joint_mask(spec, X, include_f=False)
    for z in _integer_zeros(f, X):
        gmask[z] = False
    good = np.flatnonzero(gmask)
    dmax = math.isqrt(_max_abs(f, X))
    mu = _mobius_upto(dmax)
    per_prime: dict[int, set[int]] = {}
    total = 0
    for d in range(1, dmax + 1):
        if mu[d] == 0:
            continue
        # residues of n mod d^2 with d^2 | f(n), assembled by CRT
        residues, modulus = [0], 1
        for p in factorize(d):
            if p not in per_prime:
                per_prime[p] = _residues_mod_p2(f, p)
            q = p * p
            residues = [_crt(r, modulus, s, q) for r in residues for s in per_prime[p]]
            modulus *= q
            if not residues:
                break
        if not residues:
            continue
        res = np.array(residues, dtype=np.int64)
        hits = int(np.isin(good % modulus, res).sum())
        total += int(mu[d]) * hits
    return total


def _crt(r1: int, m1: int, r2: int, m2: int) -> int:
    return (r1 + m1 * ((r2 - r1) * pow(m1, -1, m2) % m2)) % (m1 * m2)


# --- local densities and the Euler product ---------------------------------------


def local_density(spec: SieveSpec, d: Sequence[int]) -> int:
    """rho(d): residues n mod lcm(d_i^2) with d_0^2 | f(n) and d_j^2 | g_j(n)."""
    if len(d) != spec.m + 1:
        raise ValueError(f"need {spec.m + 1} moduli")
    primes: set[int] = set()
    for di in d:
        if di < 1:
            raise ValueError("moduli must be positive")
        fac = factorize(di) if di > 1 else {}
        if any(e > 1 for e in fac.values()):
            raise NonSquarefreeModulus(f"{di} is not squarefree")
        primes.update(fac)
    rho = 1
    for p in sorted(primes):
        sets = [_residues_mod_p2(poly, p) for poly, di in zip(spec.polys, d) if di % p == 0]
        rho *= len(set.intersection(*sets))
    return rho


def local_factor(spec: SieveSpec, p: int) -> Fraction:
    """Density of n mod p^2 at which no polynomial is divisible by p^2."""
    bad: set[int] = set()
    for poly in spec.polys:
        bad |= _residues_mod_p2(poly, p)
    return Fraction(p * p - len(bad), p * p)


@dataclass(frozen=True)
class EulerEnclosure:
    lo: Fraction
    hi: Fraction
    prime_cutoff: int
    degenerate: bool

    @property
    def midpoint(self) -> Fraction:
        return (self.lo + self.hi) / 2

    def contains(self, x) -> bool:
        return self.lo <= x <= self.hi

    def distance(self, x) -> Fraction:
        x = Fraction(x)
        return max(self.lo - x, x - self.hi, Fraction(0))

    def to_json(self) -> dict:
        return {"lo": float(self.lo), "hi": float(self.hi), "P": self.prime_cutoff, "degenerate": self.degenerate}


def _exceptional_primes(spec: SieveSpec) -> set[int]:
    """Primes at which some polynomial may vanish mod p^2 on more than one
    residue per root: divisors of the discriminant and of the contents."""
    vals = [abs(spec.discriminant), math.gcd(*spec.f)]
    vals += [math.gcd(k, r) for k, r in spec.gs]
    out: set[int] = set()
    for v in vals:
        if v > 1:
            out.update(factorize(v))
    return out


def euler_constant(spec: SieveSpec, prime_cutoff: int = 100_000) -> EulerEnclosure:
    """Rigorous enclosure of the density constant.

    The product over p <= P is accumulated with outward rounding.  A good
    prime p > P removes at most m + 2 residues mod p^2, so the remaining
    good factors lie in [1 - (m + 2)/P, 1]; exceptional primes above P are
    multiplied in exactly.
    """
    P = prime_cutoff
    if P < 100:
        raise ValueError("prime cutoff must be >= 100")
    scale = 1 << _SCALE_BITS
    lo = hi = scale
    primes = [int(p) for p in _primes_upto(P)]
    primes += sorted(p for p in _exceptional_primes(spec) if p > P)
    for p in primes:
        fac = local_factor(spec, p)
        lo = lo * fac.numerator // fac.denominator
        hi = -(-hi * fac.numerator // fac.denominator)
    R = spec.m + 2
    lo_f = Fraction(lo, scale) * (1 - Fraction(R, P))
    hi_f = Fraction(hi, scale)
    return EulerEnclosure(max(lo_f, Fraction(0)), hi_f, P, lo_f <= 0)
