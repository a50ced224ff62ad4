import math

import pytest
import sympy
from sympy import continued_fraction_periodic

from quadcert.cfrac import (
    Convergent,
    binet_quantities,
    check_q_identities,
    check_size_bound,
    check_technical,
    convergents,
    expand_sqrt,
    fundamental_unit,
    rho_product_exact,
)
from quadcert.errors import HypothesisNotMet, PerfectSquare
from quadcert.family import instantiate, q_sequence
from quadcert.quadfield import make_field, norm


def squarefree(n):
    return all(e == 1 for e in sympy.factorint(n).values())


@pytest.mark.parametrize(
    "D,a0,period",
    [(73, 8, [1, 1, 5, 5, 1, 1, 16]), (2, 1, [2]), (646, 25, [2, 2, 2, 50])],
)
def test_expand_sqrt_examples(D, a0, period):
    exp = expand_sqrt(D)
    assert exp.a0 == a0 and list(exp.period) == period


def test_expand_sqrt_matches_sympy():
    for D in range(2, 600):
        if math.isqrt(D) ** 2 == D:
            continue
        a0, period = continued_fraction_periodic(0, 1, D)
        exp = expand_sqrt(D)
        assert (exp.a0, list(exp.period)) == (a0, period), D


def test_perfect_square_rejected():
    with pytest.raises(PerfectSquare):
        expand_sqrt(49)


def test_expansion_structure_up_to_10000():
    for D in range(2, 10_001):
        if math.isqrt(D) ** 2 == D or not squarefree(D):
            continue
        exp = expand_sqrt(D)
        p = exp.period
        assert exp.a0 == math.isqrt(D)
        assert p[-1] == 2 * exp.a0
        assert p[:-1] == p[:-1][::-1]
        assert min(p) >= 1


def test_convergent_examples():
    c = convergents(expand_sqrt(73), 7)
    assert (c[3].p, c[3].q, c[3].N) == (94, 11, 3)
    assert (c[6].p, c[6].q, c[6].N) == (1068, 125, -1)
    assert [x.N for x in convergents(expand_sqrt(646), 3)] == [-21, 17, -21]


def test_convergent_invariants():
    for D in (7, 73, 94, 151, 646, 9973):
        exp = expand_sqrt(D)
        cs = convergents(exp, 3 * len(exp.period) + 2)
        for prev, cur in zip(cs, cs[1:]):
            assert math.gcd(cur.p, cur.q) == 1
            assert cur.p * prev.q - prev.p * cur.q == (-1) ** (cur.i - 1)
        for c in cs:
            assert c.alpha.norm() == c.N
            # |p/q - sqrt D| < 1/(a_{i+1} q^2), cross-multiplied and squared
            a = exp.term(c.i + 1)
            # |p - q sqrt D| < 1/(a q)  <=>  |N| a q - p < q sqrt D
            lhs = abs(c.N) * a * c.q - c.p
            assert lhs < 0 or lhs * lhs < c.q * c.q * D


def test_size_bound_examples():
    c646 = convergents(expand_sqrt(646), 2)[1]
    assert check_size_bound(c646, 2)
    c73 = convergents(expand_sqrt(73), 1)[0]
    assert c73.N == -9 and check_size_bound(c73, 1)


def test_size_bound_rejects_false_input():
    # a fabricated convergent with a huge norm violates the bound
    fake = Convergent(0, 100, 1, 73)
    assert not check_size_bound(fake, 1)


def _pell_oracle(D):
    """Smallest unit > 1 of O_K by scanning the sqrt(D) coefficient."""
    den = 2 if D % 4 == 1 else 1
    B = 1
    while True:
        for s in (-4, 4) if den == 2 else (-1, 1):
            A2 = D * B * B + s
            A = math.isqrt(A2)
            if A * A == A2 and (den == 1 or (A - B) % 2 == 0):
                return A, B, s // (den * den)
        B += 1


@pytest.mark.parametrize("D", [2, 3, 5, 6, 7, 13, 21, 29, 31, 46, 53, 61, 73, 94, 109, 133, 157, 193])
def test_fundamental_unit_matches_pell_search(D):
    F = make_field(D)
    eps, sign = fundamental_unit(F)
    A, B, s = _pell_oracle(D)
    assert (eps.A, eps.B) == (A, B)
    assert sign == s == norm(eps)


def test_fundamental_unit_examples():
    F = make_field(73)
    assert fundamental_unit(F) == (F(943, 250), -1)
    F2 = make_field(2)
    assert fundamental_unit(F2) == (F2(1, 1), -1)
    F5 = make_field(5)
    assert fundamental_unit(F5) == (F5.omega, -1)


def test_q_identities_examples():
    q = q_sequence(2, 7)
    assert q[5] * q[1] - q[4] * q[2] == -q[2]
    assert q[4] * q[2] - q[3] ** 2 == 1
    assert [q[i] for i in (1, 3, 5, 7)] == [2, 12, 70, 408]
    assert q_sequence(6, 3) == [1, 6, 37, 228]


def test_q_identities_grid():
    for u in range(1, 11):
        for l in range(1, 16):
            assert check_q_identities(u, l)["passed"], (u, l)


def test_binet_quantities():
    b = binet_quantities(2, 7, 55, bits=96)
    # rho_+ = 1 + sqrt 2
    assert (b.rho_plus.lo - 1) ** 2 < 2 < (b.rho_plus.hi - 1) ** 2
    assert rho_product_exact(2) == -1 and rho_product_exact(7) == -1
    prod = b.rho_plus * b.rho_minus
    assert prod.contains(-1)
    inst = instantiate(6, 11, 1)
    bq = binet_quantities(6, inst.k, inst.D, bits=256)
    assert bq.c_minus.lo > 0
    for i in range(inst.l + 1):
        p, q = inst.p(i), inst.q(i)
        # alpha_i = p + q sqrt(D) lies in the closed-form enclosure
        val = bq.alpha(i)
        lo = p + q * bq.alpha(0).lo - q * inst.k
        hi = p + q * bq.alpha(0).hi - q * inst.k
        assert val.lo <= hi and lo <= val.hi


def test_check_technical_examples():
    inst = instantiate(6, 11, 1)
    r = check_technical(6, inst.k, 11, inst.D)
    assert all(r[k] == "pass" for k in "abcd")
    inst2 = instantiate(2, 7, 3)
    r2 = check_technical(2, inst2.k, 7, inst2.D)
    assert r2["b"] == r2["c"] == "pass"
    r3 = check_technical(6, 3, 11, 10)
    assert r3["a"] == "hypothesis_not_met"
    with pytest.raises(HypothesisNotMet):
        check_technical(6, 3, 11, 10, strict=True)
