"""Command-line entry point; every subcommand prints one JSON document.

Exit codes: 0 success, 2 invalid input, 3 unresolved factorization.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import cfrac, escalation, family, sieve
from .errors import QuadCertError, UnresolvedFactorization
from .factor import DEFAULT_EFFORT
from .quadfield import Certificate, check_prop24, make_field, parse_element

EXIT_OK, EXIT_INVALID, EXIT_UNRESOLVED = 0, 2, 3


def paper73_queue(F):
    """1, rho, sigma, rho', sigma', 2, rho' sigma, rho sigma over Q(sqrt 73)."""
    rho, sigma = F(4, 1), F(83, 22)
    rho_c, sigma_c = rho.conjugate(), sigma.conjugate()
    return [F.one, rho, sigma, rho_c, sigma_c, F(2), rho_c * sigma, rho * sigma]


BUILTIN_QUEUES = {"paper73": (73, paper73_queue)}


def _int_list(text: str) -> list[int]:
    return [int(v) for v in text.split(",") if v.strip()]


def _elements(F, text: str):
    return [parse_element(F, chunk) for chunk in text.split(";") if chunk.strip()]


def cmd_cfrac(args) -> dict:
    exp = cfrac.expand_sqrt(args.d)
    doc = exp.to_json()
    doc["squarefree"] = exp.squarefree
    if args.convergents:
        doc["convergents"] = [c.to_json() for c in cfrac.convergents(exp, args.convergents)]
    if args.unit:
        if not exp.squarefree:
            raise QuadCertError(f"{args.d} is not squarefree")
        eps, nrm = cfrac.fundamental_unit(make_field(args.d))
        doc["fundamental_unit"] = {"element": eps.to_json(), "norm": nrm}
    return doc


def cmd_family(args) -> list[dict]:
    records = []
    for inst in family.search_t(args.u, args.l, range(args.t_min, args.t_max + 1), args.mod4, args.effort):
        rec = inst.to_json()
        rec["evidence"] = inst.evidence
        if args.certify:
            rec["certificate"] = family.certify_non_universality(inst, args.mode).to_json()
        records.append(rec)
    return records


def cmd_sieve(args) -> dict:
    spec = sieve.SieveSpec.make(_int_list(args.f), [_int_list(g) for g in args.g or []])
    count = sieve.count_simultaneous(spec, args.x)
    doc = {"f": list(spec.f), "g": [list(g) for g in spec.gs], "count": count, "X": args.x,
           "ratio": count / args.x, "flagged": spec.flagged}
    if args.euler:
        doc["euler_enclosure"] = sieve.euler_constant(spec, args.euler).to_json()
    return doc


def _load_queue(args):
    if args.queue in BUILTIN_QUEUES:
        D, build = BUILTIN_QUEUES[args.queue]
        if args.d not in (None, D):
            raise QuadCertError(f"queue {args.queue} lives in Q(sqrt {D})")
        F = make_field(D)
        return F, build(F)
    if args.d is None:
        raise QuadCertError("--d is required with a queue file")
    F = make_field(args.d)
    text = Path(args.queue).read_text()
    return F, [parse_element(F, line) for line in text.splitlines() if line.strip()]


def cmd_escalate(args) -> dict:
    F, queue = _load_queue(args)
    rb = escalation.lower_bound_search(F, queue, args.max_depth, args.max_branches)
    return rb.to_json(emit_tree=args.emit_tree)


def verify_certificate(doc: dict) -> dict:
    """Recompute a stored certificate and compare every recorded verdict."""
    stored = Certificate.from_json(doc)
    fresh = check_prop24(stored.field, stored.elements, stored.cond4_mode)
    recorded = {(c["kind"], str(c.get("index", c.get("pair")))): c["verdict"] for c in stored.checks}
    recomputed = {(c["kind"], str(c.get("index", c.get("pair")))): c["verdict"] for c in fresh.checks}
    mismatches = [list(k) for k, v in recomputed.items() if k in recorded and recorded[k] != v]
    verified = not mismatches and fresh.valid == stored.valid and fresh.conclusion_M == stored.conclusion_M
    if stored.valid and not fresh.valid:
        verified = False
    return {"verified": verified, "valid": fresh.valid, "M": fresh.conclusion_M, "mismatches": mismatches}


def cmd_certify(args) -> object:
    if args.verify:
        return verify_certificate(json.loads(Path(args.verify).read_text()))
    if args.seed_list:
        return family.seed_list(
            _int_list(args.u), _int_list(args.l), args.t_max, args.t_min,
            mod4=args.mod4, mode=args.mode, effort=args.effort,
        )
    if args.d is None or args.elements is None:
        raise QuadCertError("certify needs --d and --elements, --verify, or --seed-list")
    F = make_field(args.d)
    return check_prop24(F, _elements(F, args.elements), args.cond4).to_json()


def build_parser() -> argparse.ArgumentParser:
    # shared options are accepted before or after the subcommand
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--effort", type=int, default=argparse.SUPPRESS, help="factorization budget")
    common.add_argument("--json-pretty", action="store_true", default=argparse.SUPPRESS)
    common.add_argument("--output", "-o", default=argparse.SUPPRESS, help="write JSON here instead of stdout")
    p = argparse.ArgumentParser(prog="quadcert", description=__doc__.splitlines()[0], parents=[common])
    p.set_defaults(effort=DEFAULT_EFFORT, json_pretty=False, output=None)
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("cfrac", parents=[common], help="continued fraction of sqrt(D)")
    c.add_argument("--d", type=int, required=True)
    c.add_argument("--n", "--convergents", dest="convergents", type=int, default=0)
    c.add_argument("--unit", action="store_true", help="include the fundamental unit")
    c.set_defaults(func=cmd_cfrac)

    f = sub.add_parser("family", parents=[common], help="scan t for the expansion [k; u x l, 2k]")
    f.add_argument("--u", type=int, required=True)
    f.add_argument("--l", type=int, required=True)
    f.add_argument("--t-min", type=int, default=1)
    f.add_argument("--t-max", type=int, required=True)
    f.add_argument("--mod4", action="store_true", help="keep only D = 2 mod 4")
    f.add_argument("--certify", action="store_true")
    f.add_argument("--mode", choices=["direct", "prop11"], default="direct")
    f.set_defaults(func=cmd_family)

    s = sub.add_parser("sieve", parents=[common], help="count simultaneous squarefree values")
    s.add_argument("--f", required=True, help="a,b,c for ax^2+bx+c")
    s.add_argument("--g", action="append", help="k,r for kx+r (repeatable)")
    s.add_argument("--x", type=int, required=True)
    s.add_argument("--euler", type=int, help="prime cutoff for the density enclosure")
    s.set_defaults(func=cmd_sieve)

    e = sub.add_parser("escalate", parents=[common], help="rank lower bound by escalation")
    e.add_argument("--d", type=int)
    e.add_argument("--queue", required=True, help="builtin name or file of x,y lines")
    e.add_argument("--max-depth", type=int, default=8)
    e.add_argument("--max-branches", type=int)
    e.add_argument("--emit-tree", action="store_true")
    e.set_defaults(func=cmd_escalate)

    v = sub.add_parser("certify", parents=[common], help="check or verify a non-universality certificate")
    v.add_argument("--d", type=int)
    v.add_argument("--elements", help="x,y;x,y;... in the basis {1, omega}")
    v.add_argument("--cond4", choices=["brute", "condition5"], default="brute")
    v.add_argument("--verify", metavar="FILE")
    v.add_argument("--seed-list", action="store_true")
    v.add_argument("--u", default="2,6")
    v.add_argument("--l", default="7,11")
    v.add_argument("--t-min", type=int, default=1)
    v.add_argument("--t-max", type=int, default=50)
    v.add_argument("--mod4", action="store_true")
    v.add_argument("--mode", choices=["direct", "prop11"], default="direct")
    v.set_defaults(func=cmd_certify)
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INVALID if exc.code else EXIT_OK
    try:
        result = args.func(args)
    except UnresolvedFactorization as exc:
        print(f"quadcert: {exc}", file=sys.stderr)
        return EXIT_UNRESOLVED
    except (QuadCertError, ValueError, OSError) as exc:
        print(f"quadcert: {exc}", file=sys.stderr)
        return EXIT_INVALID
    text = json.dumps(result, indent=2 if args.json_pretty else None, sort_keys=True)
    if args.output:
        Path(args.output).write_text(text + "\n")
    else:
        print(text)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
