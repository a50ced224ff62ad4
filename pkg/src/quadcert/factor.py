"""Integer factorization with a bounded effort budget.

Squarefreeness is the only question most callers ask, so ``is_squarefree``
avoids full factorization whenever the cofactor left after trial division is
small enough to be classified by primality and perfect-square tests alone.
"""
from __future__ import annotations

import math
import random
from functools import lru_cache

from sympy import isprime

from .errors import UnresolvedFactorization, ZeroInput

TRIAL_BOUND = 1000
DEFAULT_EFFORT = 2_000_000


@lru_cache(maxsize=None)
def small_primes(bound: int = TRIAL_BOUND) -> tuple[int, ...]:
    sieve = bytearray([1]) * (bound + 1)
    sieve[0:2] = b"\x00\x00"
    for p in range(2, math.isqrt(bound) + 1):
        if sieve[p]:
            sieve[p * p :: p] = bytearray(len(range(p * p, bound + 1, p)))
    return tuple(i for i, flag in enumerate(sieve) if flag)


def _brent(n: int, budget: int, rng: random.Random) -> tuple[int | None, int]:
    """One Pollard-Brent run; returns (factor or None, iterations used)."""
    y, c, m = rng.randrange(1, n), rng.randrange(1, n), 128
    g = r = q = 1
    used = 0
    x = ys = y
    while g == 1:
        x = y
        for _ in range(r):
            y = (y * y + c) % n
        k = 0
        while k < r and g == 1:
            ys = y
            for _ in range(min(m, r - k)):
                y = (y * y + c) % n
                q = q * abs(x - y) % n
            g = math.gcd(q, n)
            k += m
        used += r
        r <<= 1
        if used > budget:
            return None, used
    if g == n:
        while True:
            ys = (ys * ys + c) % n
            g = math.gcd(abs(x - ys), n)
            if g > 1:
                break
    return (g if g != n else None), used


def _split(n: int, effort: int) -> int:
    """A nontrivial factor of the composite n, or raise when effort runs out."""
    root = math.isqrt(n)
    if root * root == n:
        return root
    rng = random.Random(n)  # deterministic per input
    remaining = effort
    while remaining > 0:
        g, used = _brent(n, remaining, rng)
        remaining -= used
        if g is not None:
            return g
    raise UnresolvedFactorization(f"could not split {n} within effort {effort}", n=n)


def factorize(n: int, effort: int = DEFAULT_EFFORT) -> dict[int, int]:
    """Prime factorization of |n| as {prime: exponent}."""
    if n == 0:
        raise ZeroInput("cannot factor 0")
    n = abs(n)
    out: dict[int, int] = {}
    for p in small_primes():
        if p * p > n:
            break
        while n % p == 0:
            out[p] = out.get(p, 0) + 1
            n //= p
    stack = [n] if n > 1 else []
    while stack:
        m = stack.pop()
        if m == 1:
            continue
        if isprime(m):
            out[m] = out.get(m, 0) + 1
            continue
        d = _split(m, effort)
        stack.extend((d, m // d))
    return dict(sorted(out.items()))


def is_squarefree(n: int, effort: int = DEFAULT_EFFORT) -> bool | None:
    """True/False when decided, None when the factorization effort ran out.

    Zero raises ZeroInput; the sign of ``n`` is ignored.
    """
    if n == 0:
        raise ZeroInput("squarefreeness of 0 is undefined")
    n = abs(n)
    for p in small_primes():
        if p * p > n:
            break
        if n % p == 0:
            n //= p
            if n % p == 0:
                return False
    if n == 1 or isprime(n):
        return True
    root = math.isqrt(n)
    if root * root == n:
        return False
    # every prime factor exceeds TRIAL_BOUND, so a cofactor below its cube is p*q
    if n < TRIAL_BOUND**3:
        return True
    try:
        return all(e == 1 for e in factorize(n, effort).values())
    except UnresolvedFactorization:
        return None


def squarefree_or_raise(n: int, effort: int = DEFAULT_EFFORT) -> bool:
    verdict = is_squarefree(n, effort)
    if verdict is None:
        raise UnresolvedFactorization(f"squarefreeness of {n} unresolved", n=n)
    return verdict
