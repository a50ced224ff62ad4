import random
from dataclasses import replace
from fractions import Fraction

import pytest
import sympy

from quadcert.cfrac import convergents, expand_sqrt
from quadcert.errors import EmptyWindow, Inadmissible, ParityViolation
from quadcert.family import (
    admissible,
    build_candidate_set,
    certify_non_universality,
    instantiate,
    prop11_brute_check,
    q_sequence,
    search_t,
    verify_instance,
)
from quadcert.quadfield import same_square_class, sign_surd

GRID = [(u, l) for u in (2, 6, 10) for l in (3, 5, 7, 9, 11)]


def test_q_sequence_examples():
    assert q_sequence(2, 3) == [1, 2, 5, 12]
    assert q_sequence(6, 3) == [1, 6, 37, 228]
    assert q_sequence(9, 1) == [1, 9]


def test_admissible_examples():
    assert admissible(2, 3)
    assert not admissible(4, 3)
    assert not admissible(2, 4)
    assert "even" in admissible(2, 4).reasons[0]


def test_instantiate_examples():
    a = instantiate(2, 3, 4)
    assert (a.k, a.D, a.N_of[1]) == (25, 646, 17)
    b = instantiate(2, 7, 1)
    assert (b.k, b.D, b.N_of[1], b.N_of[3]) == (205, 42195, 141, 145)


def test_instantiate_errors():
    with pytest.raises(Inadmissible):
        instantiate(4, 3, 1)
    with pytest.raises(Inadmissible):
        instantiate(2, 3, 0)
    # u = 1: q_3 = 3 is odd, so t must be odd
    with pytest.raises(ParityViolation):
        instantiate(1, 3, 2)
    off = instantiate(1, 3, 1)
    assert off.off_path and verify_instance(off)


@pytest.mark.parametrize("u,l", GRID)
def test_closed_forms_and_norms_on_grid(u, l):
    for t in range(1, 21):
        inst = instantiate(u, l, t)
        qs = inst.q_seq
        d2 = Fraction(t * t * qs[l] ** 2, 4) + Fraction(t * (u * qs[l] + 2 * qs[l - 1]), 2) + Fraction(u * u, 4) + 1
        assert inst.D == d2 == inst.k ** 2 + t * qs[l - 1] + 1
        exp = expand_sqrt(inst.D)
        assert exp.a0 == inst.k and exp.period == (u,) * l + (2 * inst.k,)
        for c in convergents(exp, l + 1):
            assert c.p ** 2 - inst.D * c.q ** 2 == inst.N(c.i)
            # totally positive exactly at odd indices
            if c.i <= l - 1:
                positive = sign_surd(c.p, c.q, inst.D) > 0 and sign_surd(c.p, -c.q, inst.D) > 0
                assert positive == (c.i % 2 == 1)
        for i in range(l):
            assert abs(inst.N(i)) == abs(inst.N(l - 1 - i))
        assert verify_instance(inst)


def test_converse_divisibility():
    # k outside the family: gamma^2 = (k p_l + p_(l-1))/q_l is not an integer
    rng = random.Random(11)
    for _ in range(20):
        u, l = rng.choice(GRID)
        qs = q_sequence(u, l)
        while True:
            k = rng.randrange(u + 1, 10**6)
            if (2 * k - u) % qs[l]:
                break
        p = [k * qs[i] + (qs[i - 1] if i else 0) for i in range(l + 1)]
        gamma_sq = Fraction(k * p[l] + p[l - 1], qs[l])
        assert gamma_sq.denominator != 1


def test_verify_detects_corruption():
    inst = instantiate(2, 3, 4)
    assert verify_instance(inst)
    assert not verify_instance(replace(inst, D=inst.D + 1))


def test_search_examples():
    hits = {i.t: i for i in search_t(2, 3, range(1, 11))}
    assert 4 in hits and hits[4].D == 646 == 2 * 17 * 19
    assert hits[4].evidence["N_squarefree"]["1"] is True
    assert 2 not in hits  # D = 180
    assert 1 not in {i.t for i in search_t(2, 11, [1])}
    assert instantiate(2, 11, 1).N_of[5] == 4901 == 13 ** 2 * 29


def test_search_evidence_against_sympy():
    for inst in search_t(6, 7, range(1, 40)):
        assert all(e == 1 for e in sympy.factorint(inst.D).values())
        for i in (1, 3):
            assert all(e == 1 for e in sympy.factorint(inst.N_of[i]).values())


def test_mod4_filter():
    for inst in search_t(2, 5, range(1, 60), mod4=True):
        assert inst.D % 4 == 2


def test_candidate_sets():
    inst = instantiate(2, 7, 1)
    assert build_candidate_set(inst, "direct") == [inst.field.one, inst.alpha(1), inst.alpha(3)]
    big = instantiate(6, 11, 1)
    assert len(build_candidate_set(big, "prop11")) == 3
    with pytest.raises(EmptyWindow):
        build_candidate_set(instantiate(2, 3, 4), "prop11")


def test_certify_examples():
    cert = certify_non_universality(instantiate(2, 7, 1), "direct")
    assert cert.valid and cert.conclusion_M == 3
    cert2 = certify_non_universality(instantiate(2, 3, 4), "direct")
    assert cert2.valid and cert2.conclusion_M == 2


def test_certify_rejects_nonsquarefree_norm():
    inst = instantiate(2, 11, 4)  # D squarefree, N_1 = 19025 = 5^2 * 761
    cert = certify_non_universality(inst, "direct")
    assert not cert.valid
    assert any(c["kind"] == "family_N_squarefree" and not c["verdict"] for c in cert.checks)


def test_distinct_squarefree_norms_give_distinct_classes():
    for inst in search_t(2, 11, range(1, 30))[:4]:
        elems = build_candidate_set(inst, "direct")[1:]
        for i, a in enumerate(elems):
            for b in elems[i + 1 :]:
                assert not same_square_class(a, b)


def test_prop11_brute_check():
    inst = next(i for i in search_t(6, 11, range(1, 50)))
    r = prop11_brute_check(inst, 1, 3)
    assert r and not r.notes and r.squares == [inst.field.zero]
    small = instantiate(2, 7, 1)
    r2 = prop11_brute_check(small, 1, 3)
    assert r2 and any("WindowViolation" in n for n in r2.notes)
