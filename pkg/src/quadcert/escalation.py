"""Classical lattices over O_K, representation, and truant-driven escalation.

A lattice is its Gram matrix A over O_K.  Both representation and escalation
reduce to one enumeration: all x in O_K^n with x^T Q x equal to, or totally
smaller than, a bound.  Completing squares (Q = sum q_ii (x_i + sum q_ij x_j)^2
with q in K) turns that into nested boxes, one coordinate at a time; each box
is enumerated in both real embeddings and filtered with exact arithmetic.
"""
from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from functools import cached_property
from typing import Iterator, Sequence

from .errors import (
    AlreadyRepresented,
    MixedFields,
    NotSymmetric,
    NotTotallyPositiveDefinite,
    QueueInvalid,
)
from .quadfield import (
    FieldContext,
    FieldElement,
    QuadInt,
    _box_candidates,
    _sqrt_upper,
    decompose_oracle,
    is_totally_positive,
    same_square_class,
)

_BITS = 64


def _tp(x: FieldElement) -> bool:
    return x.embedding_sign(1) > 0 and x.embedding_sign(2) > 0


def _tnn(x: FieldElement) -> bool:
    return x.embedding_sign(1) >= 0 and x.embedding_sign(2) >= 0


def _completed_squares(field: FieldContext, rows: Sequence[Sequence]) -> list[list[FieldElement]]:
    """Coefficients q with x^T A x = sum_i q_ii (x_i + sum_{j>i} q_ij x_j)^2.

    A zero pivot raises ZeroDivisionError; callers check pivots as they go.
    """
    n = len(rows)
    q = [[FieldElement.of(v) if isinstance(v, QuadInt) else v for v in row] for row in rows]
    for i in range(n):
        piv = q[i][i]
        if not piv:
            raise ZeroDivisionError(i)
        for j in range(i + 1, n):
            q[j][i] = q[i][j]
            q[i][j] = q[i][j] / piv
        for k in range(i + 1, n):
            for l in range(k, n):
                q[k][l] = q[k][l] - q[k][i] * q[i][l]
    return q


def _inverse(field: FieldContext, rows: Sequence[Sequence[QuadInt]]) -> list[list[FieldElement]]:
    n = len(rows)
    one, zero = FieldElement(field, 1), FieldElement(field, 0)
    m = [[FieldElement.of(v) for v in row] + [one if i == j else zero for j in range(n)] for i, row in enumerate(rows)]
    for col in range(n):
        pr = next(r for r in range(col, n) if m[r][col])
        m[col], m[pr] = m[pr], m[col]
        inv = m[col][col].inverse()
        m[col] = [v * inv for v in m[col]]
        for r in range(n):
            if r != col and m[r][col]:
                f = m[r][col]
                m[r] = [a - f * b for a, b in zip(m[r], m[col])]
    return [row[n:] for row in m]


def _short_vectors(
    field: FieldContext, q: list[list[FieldElement]], bound: FieldElement, strict: bool
) -> Iterator[tuple[QuadInt, ...]]:
    """x in O_K^n with x^T Q x = bound (strict=False) or bound - x^T Q x
    totally positive (strict=True); q comes from ``_completed_squares``."""
    n = len(q)
    x: list[QuadInt | None] = [None] * n
    zero = FieldElement(field, 0)
    admissible = _tp if strict else _tnn

    def rec(i: int, rest: FieldElement):
        if i < 0:
            if strict or not rest:
                yield tuple(x)
            return
        centre = zero
        for j in range(i + 1, n):
            if q[i][j]:
                centre = centre + q[i][j] * x[j]
        ratio = rest / q[i][i]
        box = []
        for k in (1, 2):
            r = _sqrt_upper(max(ratio.enclosure(k, _BITS)[1], 0))
            lo, hi = centre.enclosure(k, _BITS)
            box += [-hi - r, -lo + r]
        for cand in _box_candidates(field, *box):
            t = centre + cand
            left = rest - q[i][i] * t * t
            if admissible(left):
                x[i] = cand
                yield from rec(i - 1, left)
        x[i] = None

    if admissible(bound) or (not strict and not bound):
        yield from rec(n - 1, bound)


class GramLattice:
    """Gram matrix of a classical totally positive definite lattice."""

    def __init__(self, field: FieldContext, rows: Sequence[Sequence[QuadInt]]):
        self.field = field
        self.A = tuple(tuple(r) for r in rows)
        self.n = len(self.A)

    def __repr__(self):
        return f"GramLattice({[[str(v) for v in r] for r in self.A]})"

    def __eq__(self, other):
        return isinstance(other, GramLattice) and self.field == other.field and self.A == other.A

    def __hash__(self):
        return hash((self.field.D, self.A))

    @cached_property
    def squares(self) -> list[list[FieldElement]]:
        return _completed_squares(self.field, self.A)

    @cached_property
    def inverse_squares(self) -> list[list[FieldElement]]:
        return _completed_squares(self.field, _inverse(self.field, self.A))

    def value(self, x: Sequence[QuadInt]) -> QuadInt:
        total = self.field.zero
        for i in range(self.n):
            for j in range(self.n):
                total = total + x[i] * self.A[i][j] * x[j]
        return total

    def key(self) -> tuple:
        return tuple(self.A[i][j].key() for i in range(self.n) for j in range(i, self.n))

    def diagonal(self) -> list[QuadInt]:
        return [self.A[i][i] for i in range(self.n)]

    def is_diagonal(self) -> bool:
        return all(not self.A[i][j] for i in range(self.n) for j in range(self.n) if i != j)

    def to_json(self) -> list[list[list[str]]]:
        return [[v.to_json() for v in row] for row in self.A]


def leading_minors(field: FieldContext, rows) -> list[FieldElement]:
    """d_1, ..., d_n computed as running products of the elimination pivots."""
    out = []
    n = len(rows)
    q = [[FieldElement.of(v) for v in row] for row in rows]
    det = FieldElement(field, 1)
    for i in range(n):
        piv = q[i][i]
        det = det * piv
        out.append(det)
        if not piv:
            break
        for k in range(i + 1, n):
            f = q[k][i] / piv
            for l in range(i, n):
                q[k][l] = q[k][l] - f * q[i][l]
    return out


def make_lattice(entries: Sequence[Sequence[QuadInt]], field: FieldContext | None = None) -> GramLattice:
    rows = [list(r) for r in entries]
    n = len(rows)
    if any(len(r) != n for r in rows):
        raise NotSymmetric("Gram matrix must be square")
    if field is None:
        if n == 0:
            raise ValueError("field required for the empty lattice")
        field = rows[0][0].field
    if any(v.field != field for r in rows for v in r):
        raise MixedFields("entries from different fields")
    for i in range(n):
        for j in range(i + 1, n):
            if rows[i][j] != rows[j][i]:
                raise NotSymmetric(f"entry ({i}, {j}) differs from ({j}, {i})")
    for idx, minor in enumerate(leading_minors(field, rows), start=1):
        if not _tp(minor):
            raise NotTotallyPositiveDefinite(
                f"leading minor {idx} = {minor} is not totally positive",
                minor=minor.to_quadint() if minor.to_quadint() is not None else minor,
                index=idx,
            )
    return GramLattice(field, rows)


def empty_lattice(field: FieldContext) -> GramLattice:
    return GramLattice(field, ())


def represents(L: GramLattice, target: QuadInt) -> tuple[QuadInt, ...] | None:
    """Some x with x^T A x = target, or None when no such x exists."""
    if not target:
        return tuple(L.field.zero for _ in range(L.n))
    if L.n == 0 or not is_totally_positive(target):
        return None
    for x in _short_vectors(L.field, L.squares, FieldElement.of(target), strict=False):
        # -x is a solution too; report the one whose first nonzero entry is positive
        lead = next(v for v in x if v)
        return x if is_totally_positive(lead) or lead.key() > (-lead).key() else tuple(-v for v in x)
    return None


def truant(L: GramLattice, queue: Sequence[QuadInt]) -> QuadInt | None:
    for a in queue:
        if represents(L, a) is None:
            return a
    return None


def canonical_signs(L: GramLattice) -> GramLattice:
    """Representative of L under sign changes of basis vectors.

    Signs are fixed along a breadth-first spanning forest of the graph of
    nonzero off-diagonal entries, making each tree edge's entry the larger
    of +-entry in (y, x) order; entries inside a component then no longer
    depend on the starting signs.
    """
    n = L.n
    sign = [0] * n
    for root in range(n):
        if sign[root]:
            continue
        sign[root] = 1
        frontier = [root]
        while frontier:
            nxt = []
            for i in frontier:
                for j in range(n):
                    v = L.A[i][j]
                    if j == i or sign[j] or not v:
                        continue
                    signed = v if sign[i] == 1 else -v
                    sign[j] = 1 if signed.key() > (-signed).key() else -1
                    nxt.append(j)
            frontier = nxt
    rows = [[L.A[i][j] if sign[i] * sign[j] == 1 else -L.A[i][j] for j in range(n)] for i in range(n)]
    return GramLattice(L.field, rows)


def cross_vectors(L: GramLattice, target: QuadInt) -> list[tuple[QuadInt, ...]]:
    """All c with [[A, c], [c^T, target]] totally positive definite.

    Equivalently target - c^T A^{-1} c is totally positive, which implies the
    2x2 conditions a_ii target - c_i^2 totally positive.
    """
    if L.n == 0:
        return [()]
    return list(_short_vectors(L.field, L.inverse_squares, FieldElement.of(target), strict=True))


def _extend(L: GramLattice, c: Sequence[QuadInt], target: QuadInt) -> GramLattice:
    rows = [list(r) + [c[i]] for i, r in enumerate(L.A)]
    rows.append(list(c) + [target])
    return GramLattice(L.field, rows)


def escalate(L: GramLattice, target: QuadInt) -> list[GramLattice]:
    """Every extension of L by a vector of length target, up to sign changes."""
    if represents(L, target) is not None:
        raise AlreadyRepresented(f"{target} is already represented")
    seen: dict[tuple, GramLattice] = {}
    for c in cross_vectors(L, target):
        M = canonical_signs(_extend(L, c, target))
        seen.setdefault(M.key(), M)
    return [seen[k] for k in sorted(seen)]


@dataclass
class EscalationNode:
    lattice: GramLattice
    parent: int | None
    added_target: QuadInt | None
    cross_vector: tuple[QuadInt, ...]
    truant: QuadInt | None = None

    def to_json(self, ident: int) -> dict:
        return {
            "id": ident,
            "parent": self.parent,
            "rank": self.lattice.n,
            "added_target": self.added_target.to_json() if self.added_target is not None else None,
            "cross_vector": [c.to_json() for c in self.cross_vector],
            "gram": self.lattice.to_json(),
            "truant": self.truant.to_json() if self.truant is not None else None,
        }


@dataclass
class RankBound:
    field: FieldContext
    queue: list[QuadInt]
    bound: int
    tree_summary: list[int]
    exhaustive: bool
    nodes: list[EscalationNode] = dc_field(default_factory=list, repr=False)

    def to_json(self, emit_tree: bool = False) -> dict:
        doc = {
            "D": str(self.field.D),
            "queue": [a.to_json() for a in self.queue],
            "bound": self.bound,
            "exhaustive": self.exhaustive,
            "tree_summary": self.tree_summary,
        }
        if emit_tree:
            doc["tree"] = [node.to_json(i) for i, node in enumerate(self.nodes)]
        return doc


def _validate_queue(field: FieldContext, queue: Sequence[QuadInt]) -> None:
    if not queue:
        raise QueueInvalid("queue is empty")
    if any(a.field != field for a in queue):
        raise QueueInvalid("queue elements must lie in the given field")
    if queue[0] != field.one:
        raise QueueInvalid("queue must start with 1")
    for a in queue:
        if not is_totally_positive(a):
            raise QueueInvalid(f"{a} is not totally positive")
    if len(set(queue)) != len(queue):
        raise QueueInvalid("queue entries must be pairwise distinct")


def lower_bound_search(
    field: FieldContext,
    queue: Sequence[QuadInt],
    max_depth: int = 8,
    max_branches: int | None = None,
) -> RankBound:
    """Breadth-first escalation from the zero lattice.

    The bound is r + 1 for the largest rank r < max_depth at which every
    lattice in the tree still has a truant: any classical form representing
    the whole queue then needs more than r variables.
    """
    _validate_queue(field, queue)
    queue = list(queue)
    nodes = [EscalationNode(empty_lattice(field), None, None, ())]
    level = [0]
    summary: list[int] = []
    bound = 0
    exhaustive = True
    for r in range(max_depth):
        summary.append(len(level))
        for idx in level:
            nodes[idx].truant = truant(nodes[idx].lattice, queue)
        if any(nodes[idx].truant is None for idx in level):
            break
        bound = r + 1
        if r + 1 == max_depth:
            break
        seen: dict[tuple, int] = {}
        nxt = []
        for idx in level:
            node = nodes[idx]
            tgt = node.truant
            for M in escalate(node.lattice, tgt):
                k = M.key()
                if k in seen:
                    continue
                if max_branches is not None and len(nxt) >= max_branches:
                    exhaustive = False
                    continue
                seen[k] = len(nodes)
                c = tuple(M.A[i][M.n - 1] for i in range(M.n - 1))
                nodes.append(EscalationNode(M, idx, tgt, c))
                nxt.append(seen[k])
        level = nxt
    return RankBound(field, queue, bound, summary, exhaustive, nodes)


# --- diagonal forms ----------------------------------------------------------------


def _summands(a: QuadInt) -> Iterator[QuadInt]:
    """Totally positive s with a - s totally positive."""
    F = FieldElement.of(a)
    box = []
    for k in (1, 2):
        box += [0, F.enclosure(k, _BITS)[1]]
    for s in _box_candidates(a.field, *box):
        if is_totally_positive(s) and is_totally_positive(a - s):
            yield s


def _split_into_classes(a: QuadInt, reps: list[QuadInt]) -> bool:
    """Whether a is a sum of totally positive terms lying in pairwise distinct
    square classes, each class represented in reps (consumed as used)."""
    for idx, rep in enumerate(reps):
        if same_square_class(a, rep):
            return True
    for s in _summands(a):
        for idx, rep in enumerate(reps):
            if same_square_class(s, rep) and _split_into_classes(a - s, reps[:idx] + reps[idx + 1 :]):
                return True
    return False


def diagonal_lower_bound(field: FieldContext, elems: Sequence[QuadInt]) -> int:
    """Lower bound on the rank of a diagonal form representing every elem.

    An indecomposable element a can only be a single term c x^2, so each
    square class holding a listed indecomposable needs its own coefficient.
    One more variable is forced when some listed decomposable element, whose
    class is not yet covered, cannot be written as a sum of terms from
    distinct covered classes (for instance 2 = 1 + 1 uses the class of 1
    twice).
    """
    for a in elems:
        if a.field != field or not is_totally_positive(a):
            raise ValueError(f"{a} is not a totally positive element of the field")
    reps: list[QuadInt] = []
    decomposable = []
    for a in elems:
        if decompose_oracle(a) is not None:
            decomposable.append(a)
        elif not any(same_square_class(a, r) for r in reps):
            reps.append(a)
    extra = 0
    for a in decomposable:
        if any(same_square_class(a, r) for r in reps):
            continue
        if not _split_into_classes(a, reps):
            extra = 1
            break
    return len(reps) + extra
