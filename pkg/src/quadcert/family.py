"""Fields with sqrt(D) = [k; u, ..., u, 2k] and their certificates.

For admissible (u, l) every t >= 1 gives k = (q_l t + u)/2 and an explicit D;
the convergents alpha_i = p_i + q_i sqrt(D) then have norms linear in t.
"""
from __future__ import annotations

from dataclasses import dataclass, field as dc_field, replace
from fractions import Fraction
from typing import Iterable

from .cfrac import convergents, expand_sqrt, q_recurrence
from .errors import EmptyWindow, Inadmissible, ParityViolation
from .factor import DEFAULT_EFFORT, is_squarefree
from .quadfield import (
    Certificate,
    QuadInt,
    check_prop24,
    enumerate_dominated_squares,
    make_field,
)


@dataclass(frozen=True)
class Check:
    """A boolean verdict that carries its reasons."""

    ok: bool
    reasons: tuple[str, ...] = ()

    def __bool__(self):
        return self.ok


def q_sequence(u: int, l: int) -> list[int]:
    if u < 1 or l < 1:
        raise ValueError("need u >= 1 and l >= 1")
    return q_recurrence(u, l)


def admissible(u: int, l: int) -> Check:
    reasons = []
    if u < 1 or l < 1:
        return Check(False, ("u and l must be positive",))
    if u % 4 != 2:
        reasons.append(f"u={u} is not 2 mod 4")
    elif not is_squarefree(u * u // 4 + 1):
        reasons.append(f"u^2/4+1={u * u // 4 + 1} is not squarefree")
    if l % 2 == 0:
        reasons.append(f"l={l} is even")
    if q_sequence(u, l)[l] % 2:
        reasons.append(f"q_l={q_sequence(u, l)[l]} is odd")
    return Check(not reasons, tuple(reasons))


@dataclass(frozen=True)
class FamilyInstance:
    u: int
    l: int
    t: int
    k: int
    D: int
    q_seq: tuple[int, ...]
    N_of: dict[int, int] = dc_field(hash=False)
    k_i_of: dict[int, int] = dc_field(hash=False)
    off_path: bool = False
    evidence: dict | None = dc_field(default=None, hash=False, compare=False)

    def q(self, i: int) -> int:
        return 0 if i == -1 else self.q_seq[i]

    def p(self, i: int) -> int:
        return self.k * self.q(i) + self.q(i - 1)

    def N(self, i: int) -> int:
        """Norm of alpha_i from the closed form, for 0 <= i <= l."""
        sign = 1 if i % 2 else -1
        return sign * (self.t * self.q(i) * self.q(self.l - i - 1) + 1)

    def alpha(self, i: int) -> QuadInt:
        F = make_field(self.D)
        return F.from_surd(F.den * self.p(i), F.den * self.q(i))

    @property
    def field(self):
        return make_field(self.D)

    def to_json(self) -> dict:
        return {
            "u": self.u,
            "l": self.l,
            "t": self.t,
            "k": str(self.k),
            "D": str(self.D),
            "N": {str(i): str(n) for i, n in self.N_of.items()},
            "k_i": {str(i): str(v) for i, v in self.k_i_of.items()},
        }


def _D_closed_forms(u: int, l: int, t: int, qs: list[int]) -> tuple[int, Fraction]:
    k2 = qs[l] * t + u
    k = k2 // 2
    d1 = k * k + t * qs[l - 1] + 1
    d2 = (
        Fraction(t * t * qs[l] ** 2, 4)
        + Fraction(t * (u * qs[l] + 2 * qs[l - 1]), 2)
        + Fraction(u * u, 4)
        + 1
    )
    return d1, d2


def instantiate(u: int, l: int, t: int) -> FamilyInstance:
    if t < 1:
        raise Inadmissible(f"t={t} must be >= 1")
    qs = q_sequence(u, l)
    if (qs[l] * t + u) % 2:
        raise ParityViolation(f"q_l t + u = {qs[l] * t + u} is odd")
    off_path = u % 2 == 1
    if not off_path:
        adm = admissible(u, l)
        if not adm:
            raise Inadmissible("; ".join(adm.reasons))
    k = (qs[l] * t + u) // 2
    d1, d2 = _D_closed_forms(u, l, t, qs)
    if d1 != d2:
        raise AssertionError(f"closed forms of D disagree: {d1} vs {d2}")
    q = lambda i: 0 if i == -1 else qs[i]  # noqa: E731
    N_of, k_i_of = {}, {}
    for i in range(1, l + 1, 2):
        k_i_of[i] = q(i) * q(l - i - 1)
        N_of[i] = t * k_i_of[i] + 1
    return FamilyInstance(u, l, t, k, d1, tuple(qs), N_of, k_i_of, off_path)


def verify_instance(inst: FamilyInstance) -> Check:
    """Cross-check an instance against an independent expansion of sqrt(D)."""
    exp = expand_sqrt(inst.D)
    expected = (inst.u,) * inst.l + (2 * inst.k,)
    if exp.a0 != inst.k or exp.period != expected:
        return Check(False, (f"expansion of sqrt({inst.D}) is [{exp.a0}; {list(exp.period)}]",))
    convs = convergents(exp, inst.l + 1)
    for c in convs:
        if (c.p, c.q) != (inst.p(c.i), inst.q(c.i)):
            return Check(False, (f"convergent {c.i} is {c.p}/{c.q}",))
        if c.N != inst.N(c.i):
            return Check(False, (f"N_{c.i} = {c.N} but closed form gives {inst.N(c.i)}",))
    l = inst.l
    if (inst.k * inst.p(l) + inst.p(l - 1)) % inst.q(l):
        return Check(False, ("q_l does not divide k p_l + p_(l-1)",))
    return Check(True, ("period, norms and divisibility verified",))


def candidate_indices(l: int) -> list[int]:
    """Odd i <= (l-1)/2."""
    return [i for i in range(1, (l - 1) // 2 + 1) if i % 2]


def screen(inst: FamilyInstance, mod4: bool = False, effort: int = DEFAULT_EFFORT) -> dict:
    """Evidence for the search filters; ``passed`` summarizes them."""
    ev: dict = {"t": inst.t, "D": str(inst.D)}
    sq = is_squarefree(inst.D, effort)
    ev["D_squarefree"] = "unresolved" if sq is None else sq
    ok = sq is True
    if mod4:
        ev["D_mod_4"] = inst.D % 4
        ok = ok and inst.D % 4 == 2
    idx = candidate_indices(inst.l)
    ev["N_squarefree"] = {}
    for i in idx:
        v = is_squarefree(inst.N_of[i], effort)
        ev["N_squarefree"][str(i)] = "unresolved" if v is None else v
        ok = ok and v is True
    ks = [inst.k_i_of[i] for i in idx]
    ev["k_i_distinct"] = len(set(ks)) == len(ks)
    ev["non_unit"] = all(abs(inst.N_of[i]) != 1 for i in idx)
    ev["passed"] = bool(ok and ev["k_i_distinct"] and ev["non_unit"])
    return ev


def search_t(
    u: int,
    l: int,
    t_range: Iterable[int],
    mod4: bool = False,
    effort: int = DEFAULT_EFFORT,
) -> list[FamilyInstance]:
    """Instances for t in t_range (ascending) passing every filter."""
    adm = admissible(u, l)
    if not adm:
        raise Inadmissible("; ".join(adm.reasons))
    out = []
    for t in sorted(t_range):
        inst = instantiate(u, l, t)
        ev = screen(inst, mod4, effort)
        if ev["passed"]:
            out.append(replace(inst, evidence=ev))
    return out


def build_candidate_set(inst: FamilyInstance, range_mode: str = "direct") -> list[QuadInt]:
    if range_mode == "prop11":
        if inst.l < 6:
            raise EmptyWindow(f"(l-4)/2 < 1 for l={inst.l}")
        top = (inst.l - 4) // 2
    elif range_mode == "direct":
        top = (inst.l - 1) // 2
    else:
        raise ValueError(f"unknown range_mode {range_mode!r}")
    F = inst.field
    return [F.one] + [inst.alpha(i) for i in range(1, top + 1, 2)]


def certify_non_universality(inst: FamilyInstance, mode: str = "direct") -> Certificate:
    """Certificate over Q(sqrt D) built from 1 and the odd convergents.

    Condition 4 is always checked by box enumeration.
    """
    elems = build_candidate_set(inst, mode)
    cert = check_prop24(inst.field, elems, "brute")
    ev = inst.evidence or screen(inst)
    top = (inst.l - 4) // 2 if mode == "prop11" else (inst.l - 1) // 2
    family_checks = [
        {"kind": "family_D_squarefree", "index": 0, "verdict": ev["D_squarefree"] is True,
         "evidence": f"D={inst.D}: {ev['D_squarefree']}"},
    ]
    for i in range(1, top + 1, 2):
        v = ev["N_squarefree"].get(str(i))
        if v is None:
            v = is_squarefree(inst.N_of[i])
        family_checks.append({"kind": "family_N_squarefree", "index": (i + 1) // 2, "verdict": v is True,
                              "evidence": f"N_{i}={inst.N_of[i]}: {v}"})
    cert.checks = family_checks + cert.checks
    cert.valid = all(c["verdict"] for c in cert.checks)
    cert.conclusion_M = len(elems) if cert.valid else None
    return cert


@dataclass
class BruteCheck:
    ok: bool
    squares: list[QuadInt]
    notes: list[str]

    def __bool__(self):
        return self.ok


def prop11_brute_check(inst: FamilyInstance, i: int, j: int) -> BruteCheck:
    """Box-enumerate all mu with alpha_i alpha_j - mu^2 totally positive.

    Inside the window (odd i < j <= (l-4)/2, k > u >= 5) only mu = 0 may
    appear; a nonzero mu there would falsify the theorem.  Outside the window
    the check still runs and the violation is noted.
    """
    notes = []
    if not (i % 2 and j % 2 and i < j and 2 * j <= inst.l - 4):
        notes.append(f"WindowViolation: (i, j)=({i}, {j}) outside odd i < j <= (l-4)/2")
    if not inst.k > inst.u >= 5:
        notes.append(f"WindowViolation: k > u >= 5 fails (k={inst.k}, u={inst.u})")
    if inst.D % 4 == 1:
        notes.append("WindowViolation: D = 1 mod 4")
    prod = inst.alpha(i) * inst.alpha(j)
    squares = enumerate_dominated_squares(prod)
    return BruteCheck(all(not c for c in squares), squares, notes)


def seed_list(
    u_values: Iterable[int],
    l_values: Iterable[int],
    t_max: int,
    t_min: int = 1,
    mod4: bool = False,
    mode: str = "direct",
    per_pair: int | None = 1,
    effort: int = DEFAULT_EFFORT,
) -> list[dict]:
    """Search, certify and tabulate (u, l, t, D, M) for each admissible (u, l)."""
    rows = []
    for u in u_values:
        for l in l_values:
            if not admissible(u, l):
                continue
            found = 0
            for inst in search_t(u, l, range(t_min, t_max + 1), mod4, effort):
                cert = certify_non_universality(inst, mode)
                if not cert.valid:
                    continue
                rows.append({"u": u, "l": l, "t": inst.t, "D": str(inst.D), "M": cert.conclusion_M})
                found += 1
                if per_pair is not None and found >= per_pair:
                    break
    return rows
