"""Command-line front end.

Every subcommand prints (or writes with ``--out``) one JSON document.
Exit codes: 0 success, 1 usage or input error, 2 research event
(verification failure, coverage gap, pairing-uniqueness violation,
search exhaustion).
"""

import argparse
import json
import os
import sys
import tempfile
import time

from .decompose import (DecomposeBounds, artin_search, decompose_Gamma02,
                        matches_normal_form, replay)
from .errors import LevelError, ResearchEvent, SearchExhaustedError
from .mat2 import LevelContext, Mat2, parse_matrix
from .process import (EnumerationStats, audit, base_case_matrix, derive_base_case,
                      enumerate_certified_L, pairing_candidates, process_step,
                      reduce_to_L, select_integral_pairing, _t2_terms)
from .relations import (certificate_from_json, conjugate_sum, expand_second_order,
                        hecke_T2, seed_kb, KnowledgeBase)
from .sampling import random_elements
from .subgroups import (descriptor_of, in_G02, in_L02, in_gamma0, in_gamma02,
                        level_descriptors)

OUT_DIR_ENV = "HECKE_PAIRING_OUT_DIR"


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


def _dump(doc):
    return json.dumps(doc, sort_keys=True, separators=(",", ":")) + "\n"


def _emit(doc, out):
    text = _dump(doc)
    if not out:
        sys.stdout.write(text)
        return
    if not os.path.isabs(out) and os.environ.get(OUT_DIR_ENV):
        out = os.path.join(os.environ[OUT_DIR_ENV], out)
    directory = os.path.dirname(os.path.abspath(out))
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=".json")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, out)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _ctx(args):
    return LevelContext(args.N, getattr(args, "epsilon", 1))


# --- subcommands ---------------------------------------------------------

def cmd_process(args):
    ctx = _ctx(args)
    kb = seed_kb(ctx, args.rewrite_depth)
    derive_base_case(kb)
    stats = EnumerationStats()
    doc = {"N": str(ctx.N), "n_max": str(args.n_max), "epsilon": str(ctx.epsilon)}
    status = 0
    try:
        enumerate_certified_L(kb, args.n_max, stats)
    except ResearchEvent as exc:
        doc["event"] = {"type": type(exc).__name__, "message": str(exc)}
        if getattr(exc, "missing", None):
            doc["event"]["missing"] = [[str(x) for x in key] for key in exc.missing]
        status = 2
    doc["stats"] = {"steps": str(stats.steps), "P1": str(stats.pairing_counts["P1"]),
                    "P2": str(stats.pairing_counts["P2"]),
                    "half_level_adjustments": str(stats.half_level_adjustments)}
    doc["certificates"] = [c.to_json() for c in kb.certificates()]
    if args.audit:
        rep = audit(kb)
        doc["audit"] = _audit_summary(rep)
        if not rep.ok:
            status = 2
    _emit(doc, args.out)
    return status


def cmd_member(args):
    ctx = _ctx(args)
    m = parse_matrix(args.matrix)
    doc = {"gamma0": in_gamma0(m, ctx), "gamma02": in_gamma02(m, ctx),
           "G02": in_G02(m, ctx), "L02": in_L02(m, ctx)}
    _emit(doc, args.out)
    return 0


def cmd_decompose(args):
    ctx = _ctx(args)
    g = parse_matrix(args.matrix)
    kb = seed_kb(ctx, args.rewrite_depth)
    enumerate_certified_L(kb, args.n_max)
    bounds = DecomposeBounds(max_level=args.max_level, max_radius=args.max_radius)
    try:
        dec = decompose_Gamma02(g, ctx, kb, bounds)
    except SearchExhaustedError as exc:
        _emit({"exhausted": True, "message": str(exc)}, args.out)
        return 2
    verified = replay(dec.word, kb) == g and matches_normal_form(dec.word, ctx, kb.lookup)
    doc = {"word": dec.word.to_json(), "normal_form": dec.normal_form_json(),
           "verified": verified, "levels": [str(x) for x in dec.levels]}
    if args.with_certificates:
        doc["certificates"] = [c.to_json() for c in kb.certificates()]
    _emit(doc, args.out)
    return 0 if verified else 2


def artin_survey(bound, k_max, n_cap=None):
    """Witness search over 1 <= d, b, M <= bound with gcd(d, bM) = 1."""
    from math import gcd
    rows, exhausted = [], []
    max_k = max_n = None
    for d in range(1, bound + 1):
        for b in range(1, bound + 1):
            for M in range(1, bound + 1):
                if gcd(d, b * M) != 1:
                    continue
                try:
                    w = artin_search(d, b, M, k_max, n_cap)
                except SearchExhaustedError as exc:
                    exhausted.append({"d": str(d), "b": str(b), "M": str(M),
                                      "obstructed": exc.obstructed})
                    continue
                rows.append(w)
                if max_k is None or (w.k, w.n) > (max_k.k, max_k.n):
                    max_k = w
                if max_n is None or (w.n, w.k) > (max_n.n, max_n.k):
                    max_n = w
    return {"bound": str(bound), "k_max": str(k_max), "searched": str(len(rows) + len(exhausted)),
            "found": str(len(rows)),
            "max_k": max_k.to_json() if max_k else None,
            "max_n": max_n.to_json() if max_n else None,
            "exhausted": exhausted}


def cmd_artin(args):
    if args.survey is not None:
        doc = artin_survey(args.survey, args.k_max, args.n_cap)
        _emit(doc, args.out)
        return 2 if doc["exhausted"] else 0
    if None in (args.d, args.b, args.M):
        raise UsageError("artin needs --d, --b and --M (or --survey)")
    try:
        w = artin_search(args.d, args.b, args.M, args.k_max, args.n_cap)
    except SearchExhaustedError as exc:
        _emit({"exhausted": True, "obstructed": exc.obstructed, "message": str(exc),
               "k_max": str(args.k_max)}, args.out)
        return 2
    _emit(w.to_json(), args.out)
    return 0


def _audit_summary(rep):
    return {"checked": str(rep.checked), "passed": str(rep.passed),
            "failures": [{"key": k, "message": m} for k, m in rep.failures]}


def _load_kb(path, ctx_override=None):
    with open(path) as fh:
        doc = json.load(fh)
    ctx = ctx_override or LevelContext(int(doc["N"]), int(doc.get("epsilon", 1)))
    kb = KnowledgeBase(ctx)
    for item in doc["certificates"]:
        kb.add(certificate_from_json(item))
    return kb


class _Tally:
    def __init__(self):
        self.checks = {}
        self.failures = []

    def record(self, check, ok, key="", message=""):
        entry = self.checks.setdefault(check, {"passed": 0, "failed": 0})
        entry["passed" if ok else "failed"] += 1
        if not ok:
            self.failures.append({"check": check, "key": key, "message": message})

    def to_json(self):
        return {"checks": {k: {"passed": str(v["passed"]), "failed": str(v["failed"])}
                           for k, v in self.checks.items()},
                "failures": self.failures, "ok": not self.failures}


def _audit_level(ctx, n_max, samples, seed, tally):
    N = ctx.N
    try:
        base_case_matrix(ctx, 1)
        base_case_matrix(ctx, -1)
        tally.record("hecke-conjugation", True)
        tally.record("base-case", True)
    except AssertionError as exc:
        tally.record("base-case", False, f"N={N}", str(exc))
    kb = seed_kb(ctx)
    try:
        enumerate_certified_L(kb, n_max)
        tally.record("coverage", True)
    except ResearchEvent as exc:
        tally.record("coverage", False, f"N={N}", str(exc))
    for n in range(1, n_max):
        for desc in level_descriptors(ctx, n):
            X = desc.matrix()
            A, _, B = _t2_terms(X)
            p1, p2 = pairing_candidates(A, B, ctx)
            try:
                select_integral_pairing(p1, p2, parity_even=(X.d % 2 == 0))
                tally.record("pairing-uniqueness", True)
            except ResearchEvent as exc:
                tally.record("pairing-uniqueness", False, X.key_str(), str(exc))
    for cert in kb.certificates():
        m = cert.matrix
        if in_L02(m, ctx) and m.a > 2:
            red = reduce_to_L(m, ctx)
            tally.record("reduction", red.reduced == m and red.k == 0 and red.l == 0, m.key_str())
    rep = audit(kb)
    for key, msg in rep.failures:
        tally.record("replay", False, key, msg)
    for _ in range(rep.passed):
        tally.record("replay", True)
    for g in random_elements(ctx, samples, seed=seed):
        try:
            dec = decompose_Gamma02(g, ctx, kb)
            ok = replay(dec.word, kb) == g and matches_normal_form(dec.word, ctx, kb.lookup)
            tally.record("round-trip", ok, g.key_str(), "" if ok else "replay mismatch")
        except ResearchEvent as exc:
            tally.record("round-trip", False, g.key_str(), str(exc))


def cmd_audit(args):
    tally = _Tally()
    if args.input:
        kb = _load_kb(args.input)
        rep = audit(kb)
        for key, msg in rep.failures:
            tally.record("replay", False, key, msg)
        for _ in range(rep.passed):
            tally.record("replay", True)
        levels = []
    else:
        levels = args.N or [3]
    for N in levels:
        _audit_level(LevelContext(N, args.epsilon), args.n_max, args.samples, args.seed, tally)
    doc = tally.to_json()
    doc["seed"] = str(args.seed)
    _emit(doc, args.out)
    return 0 if doc["ok"] else 2


def cmd_expand2(args):
    g, d = parse_matrix(args.gamma), parse_matrix(args.delta)
    s = expand_second_order(g, d)
    _emit({"terms": s.to_json()}, args.out)
    return 0


# --- parser ----------------------------------------------------------------

def build_parser():
    p = _Parser(prog="hecke-pairing", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp, level=True):
        if level:
            sp.add_argument("--N", type=int, required=True, help="odd level >= 3")
            sp.add_argument("--epsilon", type=int, default=1, choices=(1, -1))
        sp.add_argument("--out", help=f"output file (relative paths go under ${OUT_DIR_ENV})")
        sp.add_argument("--seed", type=int, default=0)

    sp = sub.add_parser("process", help="certify L_0,2(N) up to a level")
    common(sp)
    sp.add_argument("--n-max", type=int, default=4)
    sp.add_argument("--rewrite-depth", type=int, default=4)
    sp.add_argument("--audit", action="store_true", help="replay every certificate")
    sp.set_defaults(func=cmd_process)

    sp = sub.add_parser("member", help="subgroup membership flags")
    common(sp)
    sp.add_argument("--matrix", required=True, help="a,b,c,d")
    sp.set_defaults(func=cmd_member)

    sp = sub.add_parser("decompose", help="W^k d1 d2 W^l decomposition")
    common(sp)
    sp.add_argument("--matrix", required=True, help="a,b,c,d")
    sp.add_argument("--n-max", type=int, default=2, help="levels certified up front")
    sp.add_argument("--rewrite-depth", type=int, default=4)
    sp.add_argument("--max-level", type=int, default=DecomposeBounds.max_level)
    sp.add_argument("--max-radius", type=int, default=DecomposeBounds.max_radius)
    sp.add_argument("--with-certificates", action="store_true")
    sp.set_defaults(func=cmd_decompose)

    sp = sub.add_parser("artin", help="witness k, n with b = 2^n mod d + kM")
    common(sp, level=False)
    sp.add_argument("--d", type=int)
    sp.add_argument("--b", type=int)
    sp.add_argument("--M", type=int)
    sp.add_argument("--k-max", type=int, default=5000)
    sp.add_argument("--n-cap", type=int, default=None)
    sp.add_argument("--survey", type=int, metavar="BOUND",
                    help="survey all 1 <= d, b, M <= BOUND")
    sp.set_defaults(func=cmd_artin)

    sp = sub.add_parser("audit", help="re-verify identities and certificates")
    common(sp, level=False)
    sp.add_argument("--N", type=int, nargs="*", help="levels to audit")
    sp.add_argument("--epsilon", type=int, default=1, choices=(1, -1))
    sp.add_argument("--n-max", type=int, default=6)
    sp.add_argument("--samples", type=int, default=20, help="round-trip decompositions per level")
    sp.add_argument("--input", help="certificate file written by 'process'")
    sp.set_defaults(func=cmd_audit)

    sp = sub.add_parser("expand2", help="expand (1 - g)(1 - d)")
    common(sp, level=False)
    sp.add_argument("--N", type=int, help="accepted for symmetry; unused")
    sp.add_argument("--gamma", required=True, help="a,b,c,d")
    sp.add_argument("--delta", required=True, help="a,b,c,d")
    sp.set_defaults(func=cmd_expand2)
    return p


def main(argv=None):
    try:
        args = build_parser().parse_args(argv)
        return args.func(args)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return 1
    except ResearchEvent as exc:
        print(f"research event: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    except (LevelError, ValueError, KeyError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
