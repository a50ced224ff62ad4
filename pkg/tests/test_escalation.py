import itertools
import random

import pytest
import sympy

from quadcert.cli import paper73_queue
from quadcert.errors import (
    AlreadyRepresented,
    MixedFields,
    NotSymmetric,
    NotTotallyPositiveDefinite,
    QueueInvalid,
)
from quadcert.escalation import (
    canonical_signs,
    diagonal_lower_bound,
    empty_lattice,
    escalate,
    lower_bound_search,
    make_lattice,
    represents,
    truant,
)
from quadcert.quadfield import check_prop24, enumerate_box, iter_totally_positive, make_field


def diag(*entries):
    F = entries[0].field
    n = len(entries)
    return make_lattice([[entries[i] if i == j else F.zero for j in range(n)] for i in range(n)])


@pytest.fixture(scope="module")
def tree73():
    F = make_field(73)
    return lower_bound_search(F, paper73_queue(F), 8)


def test_make_lattice_examples(F73, el73):
    rho, rho_c, sigma = el73["rho"], el73["rho_c"], el73["sigma"]
    one, zero = F73.one, F73.zero
    L = make_lattice([[rho, one], [one, rho_c]])
    assert L.n == 2
    with pytest.raises(NotTotallyPositiveDefinite) as exc:
        make_lattice([[rho, one, zero], [one, rho_c, one], [zero, one, rho_c * sigma]])
    assert exc.value.index == 3
    with pytest.raises(NotTotallyPositiveDefinite) as exc:
        make_lattice([[rho_c, one, zero], [one, rho_c * sigma, rho], [zero, rho, F73(2)]])
    assert exc.value.index == 3 and not exc.value.minor


def test_make_lattice_shape_errors(F73):
    one, two = F73.one, F73(2)
    with pytest.raises(NotSymmetric):
        make_lattice([[two, one], [F73.zero, two]])
    with pytest.raises(NotSymmetric):
        make_lattice([[two, one]])
    with pytest.raises(MixedFields):
        make_lattice([[two, make_field(2).one], [make_field(2).one, two]])


def _embedded(rows, sign):
    r = sympy.sqrt(rows[0][0].field.D)
    den = rows[0][0].field.den
    return sympy.Matrix([[sympy.Rational(v.A, den) + sign * sympy.Rational(v.B, den) * r for v in row] for row in rows])


def _definite_oracle(rows):
    """Both real embeddings positive definite, via exact LDL pivots."""
    for sign in (1, -1):
        M = _embedded(rows, sign)
        n = M.shape[0]
        for i in range(n):
            piv = sympy.nsimplify(M[i, i])
            if sympy.simplify(piv) <= 0:
                return False
            for k in range(i + 1, n):
                f = M[k, i] / piv
                for l in range(i, n):
                    M[k, l] = sympy.radsimp(M[k, l] - f * M[i, l])
    return True


def test_make_lattice_matches_definiteness_oracle():
    rng = random.Random(2)
    F = make_field(5)
    for _ in range(60):
        n = rng.choice([2, 3])
        rows = [[None] * n for _ in range(n)]
        for i in range(n):
            rows[i][i] = F(rng.randint(1, 6), rng.randint(-2, 2))
            for j in range(i + 1, n):
                rows[i][j] = rows[j][i] = F(rng.randint(-2, 2), rng.randint(-1, 1))
        try:
            make_lattice(rows)
            accepted = True
        except NotTotallyPositiveDefinite:
            accepted = False
        assert accepted == _definite_oracle(rows), rows


def test_represents_examples(F73, el73):
    one = F73.one
    assert represents(diag(one), one) == (one,)
    assert represents(diag(one, el73["sigma"], el73["rho"]), el73["rho_c"]) is None
    L = make_lattice([[one, one], [one, F73(2)]])
    x = represents(L, F73(2))
    assert x is not None and L.value(x) == F73(2)
    assert represents(empty_lattice(F73), one) is None
    assert represents(empty_lattice(F73), F73.zero) == ()


def _brute_values(L, radius):
    """Every value x^T A x with all coordinates in a box of the given radius."""
    F = L.field
    coords = enumerate_box(F, radius, radius)
    return {L.value(x) for x in itertools.product(coords, repeat=L.n)}


@pytest.mark.parametrize("D", [5, 2, 13])
def test_represents_is_exhaustive(D):
    F = make_field(D)
    rng = random.Random(D)
    targets = list(iter_totally_positive(F, 6))
    for _ in range(4):
        a = F(rng.randint(1, 3), rng.randint(0, 1))
        b = F(rng.randint(2, 4), rng.randint(-1, 1))
        c = F(rng.randint(0, 1), 0)
        try:
            L = make_lattice([[a, c], [c, b]])
        except NotTotallyPositiveDefinite:
            continue
        # the smallest eigenvalue in each embedding exceeds 1/4 here, so
        # coordinates of solutions of trace <= 6 sit well inside radius 6
        brute = _brute_values(L, 6)
        for t in targets:
            x = represents(L, t)
            assert (x is not None) == (t in brute), (L, t)
            if x is not None:
                assert L.value(x) == t


def test_truant_examples(F73, el73, tree73):
    queue = paper73_queue(F73)
    assert truant(diag(F73.one), queue) == el73["rho"]
    assert truant(diag(F73.one), []) is None
    five = [n for n in tree73.nodes if n.lattice.n == 5]
    assert five and all(n.truant == F73(2) for n in five)


def test_escalate_examples(F73, el73):
    one, rho, sigma = F73.one, el73["rho"], el73["sigma"]
    out = escalate(diag(one), rho)
    assert out == [diag(one, rho)]
    L3 = diag(one, sigma, rho)
    entries = {M.A[2][3] for M in escalate(L3, el73["rho_c"])}
    assert entries == {F73.zero, F73.one}
    with pytest.raises(AlreadyRepresented):
        escalate(diag(one), F73(4))


def test_escalation_by_two_at_rank_five(F73, tree73):
    six = [n for n in tree73.nodes if n.lattice.n == 6]
    assert all(n.added_target == F73(2) for n in six)
    assert {c for n in six for c in n.cross_vector} == {F73.zero, F73.one}


def test_escalated_lattices_represent_target(F73, el73):
    base = diag(F73.one, el73["sigma"], el73["rho"])
    for tgt in (el73["rho_c"], el73["sigma_c"]):
        for M in escalate(base, tgt):
            x = represents(M, tgt)
            assert x is not None and M.value(x) == tgt


def test_canonical_signs_invariant(F73, el73):
    one, five = F73.one, F73(5)
    L = make_lattice([[F73(3), one, F73.zero], [one, five, -one], [F73.zero, -one, F73(4)]])
    flipped = make_lattice([[F73(3), -one, F73.zero], [-one, five, -one], [F73.zero, -one, F73(4)]])
    assert canonical_signs(L) == canonical_signs(flipped)


def test_lower_bound_examples(F73, el73, tree73):
    assert tree73.bound == 8 and tree73.exhaustive
    assert tree73.tree_summary[:4] == [1, 1, 1, 1]
    small = lower_bound_search(F73, [F73.one, el73["rho"], el73["sigma"]])
    assert small.bound == 3
    cert = check_prop24(F73, [F73.one, el73["rho"], el73["sigma"]], "brute")
    assert cert.conclusion_M <= small.bound
    assert lower_bound_search(make_field(7), [make_field(7).one]).bound == 1


def test_lower_bound_truncation_flag(F73):
    rb = lower_bound_search(F73, paper73_queue(F73), 8, max_branches=2)
    assert not rb.exhaustive


def test_queue_validation(F73, el73):
    with pytest.raises(QueueInvalid):
        lower_bound_search(F73, [])
    with pytest.raises(QueueInvalid):
        lower_bound_search(F73, [el73["rho"]])
    with pytest.raises(QueueInvalid):
        lower_bound_search(F73, [F73.one, el73["eps"]])
    with pytest.raises(QueueInvalid):
        lower_bound_search(F73, [F73.one, el73["rho"], el73["rho"]])


def test_certificate_set_forces_diagonal_branches():
    F = make_field(42195)
    queue = [F.one, F(411, 2), F(2465, 12)]
    rb = lower_bound_search(F, queue, 4)
    assert rb.bound == 3
    assert all(node.lattice.is_diagonal() for node in rb.nodes)


def test_diagonal_bound_examples(F73, el73):
    rho, rho_c, sigma, sigma_c, eps = (el73[k] for k in ("rho", "rho_c", "sigma", "sigma_c", "eps"))
    ten = [F73.one, F73(2), rho, rho_c, sigma, sigma_c, rho * sigma, rho * sigma_c, rho_c * sigma, rho_c * sigma_c]
    assert diagonal_lower_bound(F73, ten) == 10
    assert diagonal_lower_bound(F73, [F73.one, rho]) == 2
    assert diagonal_lower_bound(F73, [F73.one, rho, rho * eps * eps]) == 2


def test_tree_json_replays(F73, tree73):
    doc = tree73.to_json(emit_tree=True)
    assert doc["bound"] == 8 and len(doc["tree"]) == sum(tree73.tree_summary)
    for node in doc["tree"][1:]:
        parent = doc["tree"][node["parent"]]
        assert node["rank"] == parent["rank"] + 1
        assert node["added_target"] == parent["truant"]
