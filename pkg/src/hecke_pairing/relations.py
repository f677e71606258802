"""Formal sums of matrices and the relation engine.

A certified matrix g means ``g = 1`` modulo the right ideal annihilating a
fixed form f, i.e. ``f|g = f``.  Because the ideal is a right ideal, a
certified g may be multiplied onto any relation from the left; and both
sides of a relation may be multiplied on the right by the same matrix.
Those are the only two rewriting moves the engine uses.
"""

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Optional

from .errors import UnknownKeyError
from .mat2 import IDENTITY, LevelContext, Mat2, T, W
from .words import GeneratorWord, cert_token, gen_token, parse_token, replay


class FormalSum:
    """Finite Z-linear combination of matrices; zero coefficients dropped."""

    __slots__ = ("_terms",)

    def __init__(self, terms=()):
        acc = {}
        items = terms.items() if isinstance(terms, dict) else terms
        for m, c in items:
            if c:
                acc[m] = acc.get(m, 0) + c
        self._terms = {m: c for m, c in acc.items() if c}

    @classmethod
    def of(cls, *mats):
        return cls((m, 1) for m in mats)

    def items(self):
        return self._terms.items()

    def matrices(self):
        return list(self._terms)

    def coefficient(self, m):
        return self._terms.get(m, 0)

    def __len__(self):
        return len(self._terms)

    def __contains__(self, m):
        return m in self._terms

    def __eq__(self, other):
        return isinstance(other, FormalSum) and self._terms == other._terms

    def __hash__(self):
        return hash(frozenset(self._terms.items()))

    def __repr__(self):
        inner = " ".join(f"{'+' if c > 0 else '-'}{abs(c) if abs(c) != 1 else ''}{m}"
                         for m, c in self.sorted_terms())
        return f"FormalSum({inner})"

    def sorted_terms(self):
        return sorted(self._terms.items(), key=lambda t: _sort_key(t[0]))

    def to_json(self):
        return [{"coefficient": str(c), "matrix": m.to_json()} for m, c in self.sorted_terms()]


def _sort_key(m):
    return tuple((x.numerator, x.denominator) if not isinstance(x, int) else (x, 1)
                 for x in m.entries)


def hecke_T2():
    """(2,0,0,1) + (1,0,0,2) + (1,1,0,2)."""
    return FormalSum.of(Mat2._raw(2, 0, 0, 1), Mat2._raw(1, 0, 0, 2), Mat2._raw(1, 1, 0, 2))


def conjugate_sum(s, g):
    gi = g.inverse()
    return FormalSum((gi @ m @ g, c) for m, c in s.items())


def mul_sum(s, g, side="right"):
    if side == "right":
        return FormalSum((m @ g, c) for m, c in s.items())
    if side == "left":
        return FormalSum((g @ m, c) for m, c in s.items())
    raise ValueError("side must be 'left' or 'right'")


def add(s, t):
    return FormalSum(list(s.items()) + list(t.items()))


def sub(s, t):
    return FormalSum(list(s.items()) + [(m, -c) for m, c in t.items()])


def cancel_common(lhs, rhs):
    """Remove min(coefficient) copies of each matrix present on both sides."""
    left, right = dict(lhs.items()), dict(rhs.items())
    for m in list(left):
        if m in right:
            cl, cr = left[m], right[m]
            if (cl > 0) != (cr > 0):
                continue
            k = min(cl, cr) if cl > 0 else max(cl, cr)
            left[m] -= k
            right[m] -= k
    return FormalSum(left), FormalSum(right)


def expand_second_order(g, d):
    """(1 - g)(1 - d) = 1 - g - d + g d, merged."""
    return FormalSum([(IDENTITY, 1), (g, -1), (d, -1), (g @ d, 1)])


# --- certificates -----------------------------------------------------------

@dataclass(frozen=True)
class SeedReason:
    name: str  # "T" or "W"
    kind: str = field(default="seed", init=False)

    def to_json(self):
        return {"kind": self.kind, "generator": self.name}


@dataclass(frozen=True)
class BaseM2Reason:
    """Derived from the Fricke conjugate of T2 at sign epsilon."""
    epsilon: int
    kind: str = field(default="base-M2", init=False)

    def to_json(self):
        return {"kind": self.kind, "epsilon": self.epsilon}


@dataclass(frozen=True)
class WordReason:
    word: GeneratorWord
    kind: str = field(default="word", init=False)

    def to_json(self):
        return {"kind": self.kind, "word": self.word.to_json()}


@dataclass(frozen=True)
class ProcessStepReason:
    """One output of a process step applied to ``parent``.

    ``cancel`` is the word u with u*(2,0,0,1) equal to the middle term of
    T2*parent; ``output`` selects which matrix of the chosen pairing this
    certificate is; ``pre``/``post`` are the W and T runs of the reduction.
    """
    parent: str
    cancel: GeneratorWord
    pairing: str
    output: int
    pre: tuple
    post: tuple
    rejected: tuple = ()
    kind: str = field(default="process-step", init=False)

    def to_json(self):
        return {"kind": self.kind, "parent": self.parent, "pairing": self.pairing,
                "pre": list(self.pre), "post": list(self.post),
                "cancel": self.cancel.to_json(), "output": self.output,
                "rejected": [m.to_json() for m in self.rejected]}


@dataclass(frozen=True)
class Certificate:
    matrix: Mat2
    reason: object
    depth: int = 0

    @property
    def key(self):
        return self.matrix.key_str()

    def to_json(self):
        return {"matrix": self.matrix.to_json(), "reason": self.reason.to_json(),
                "depth": self.depth}


def reason_from_json(data):
    kind = data.get("kind")
    if kind == "seed":
        return SeedReason(data["generator"])
    if kind == "base-M2":
        return BaseM2Reason(int(data["epsilon"]))
    if kind == "word":
        return WordReason(GeneratorWord(tuple(data["word"])))
    if kind == "process-step":
        return ProcessStepReason(
            parent=data["parent"], cancel=GeneratorWord(tuple(data["cancel"])),
            pairing=data["pairing"], output=int(data["output"]),
            pre=tuple(data["pre"]), post=tuple(data["post"]),
            rejected=tuple(Mat2.from_json(m) for m in data.get("rejected", ())))
    raise ValueError(f"unknown certificate kind {kind!r}")


def certificate_from_json(data):
    return Certificate(Mat2.from_json(data["matrix"]), reason_from_json(data["reason"]),
                       int(data.get("depth", 0)))


class KnowledgeBase:
    """Certified relations ``g = 1`` keyed by canonical matrix key.

    Insertion keeps the first certificate for a key.  ``snapshot`` gives an
    independent copy for read-only workers; ``merge`` folds their results
    back in.
    """

    def __init__(self, ctx, rewrite_depth=4):
        self.ctx = ctx
        self.rewrite_depth = rewrite_depth
        self.certified = {}
        self.events = []  # free-form log of noteworthy occurrences

    def __len__(self):
        return len(self.certified)

    def __contains__(self, m):
        return m.key() in self.certified

    def get(self, m) -> Optional[Certificate]:
        return self.certified.get(m.key())

    def add(self, cert):
        """Insert unless present; return the certificate now stored."""
        m = cert.matrix
        if not (m.is_integral() and m.det() == 1):
            raise ValueError(f"only integral det-1 matrices can be certified, got {m}")
        return self.certified.setdefault(m.key(), cert)

    def lookup(self, key_str):
        try:
            m = Mat2.from_key_str(key_str)
        except (ValueError, ZeroDivisionError):
            raise UnknownKeyError(key_str) from None
        if m.key() not in self.certified:
            raise UnknownKeyError(key_str)
        return m

    def certificates(self):
        return list(self.certified.values())

    def snapshot(self):
        kb = KnowledgeBase(self.ctx, self.rewrite_depth)
        kb.certified = dict(self.certified)
        return kb

    def merge(self, other):
        for cert in other.certified.values():
            self.add(cert)
        return self


def seed_kb(ctx, rewrite_depth=4):
    kb = KnowledgeBase(ctx, rewrite_depth)
    kb.add(Certificate(T(), SeedReason("T"), 0))
    kb.add(Certificate(W(ctx), SeedReason("W"), 0))
    return kb


# --- bounded equivalence search --------------------------------------------

@lru_cache(maxsize=64)
def _tw_words(N, depth):
    """Freely reduced T/W words up to ``depth``, shortest first, as
    a list of (matrix, tokens) with one entry per distinct matrix."""
    ctx = LevelContext(N)
    gens = [("T", T()), ("T-1", T().inverse()), ("W", W(ctx)), ("W-1", W(ctx).inverse())]
    inverse_of = {"T": "T-1", "T-1": "T", "W": "W-1", "W-1": "W"}
    seen = {IDENTITY: ()}
    frontier = [(IDENTITY, ())]
    for _ in range(depth):
        nxt = []
        for m, toks in frontier:
            for tok, g in gens:
                if toks and inverse_of[toks[-1]] == tok:
                    continue
                m2 = m @ g
                if m2 not in seen:
                    seen[m2] = toks + (tok,)
                    nxt.append((m2, toks + (tok,)))
        frontier = nxt
    return list(seen.items())


def _compact(tokens):
    out = []
    for tok in tokens:
        kind, v = parse_token(tok)
        if out and out[-1][0] == kind:
            out[-1][1] += v
        else:
            out.append([kind, v])
    return tuple(t for kind, v in out for t in gen_token(kind, v))


def find_word(kb, x, depth=None):
    """Word of length <= depth over T/W and at most one certificate whose
    replay is exactly ``x``; None if there is none."""
    depth = kb.rewrite_depth if depth is None else depth
    if not (x.is_integral() and x.det() == 1):
        return None
    table = _tw_words(kb.ctx.N, depth)
    lookup = dict(table)
    if x in lookup:
        return GeneratorWord(_compact(lookup[x]))
    short = [(m, toks) for m, toks in table if len(toks) <= depth - 1]
    for u, utoks in short:
        ui = u.inverse()
        for v, vtoks in short:
            if len(utoks) + len(vtoks) > depth - 1:
                continue
            c = ui @ x @ v.inverse()
            if c.key() in kb.certified:
                return GeneratorWord(_compact(utoks) + (cert_token(c),) + _compact(vtoks))
    return None


def equivalent_to(kb, m, target, two_sided=False):
    """Search for a witness that ``m`` is equivalent to ``target``.

    One-sided (default): a word u with replay(u) * target == m, so that
    ``m = u*target`` and u = 1 gives m = target.  Two-sided: a pair (u, v)
    with u * target * v == m; v acts on the right of target and is only a
    valid rewrite when target itself is a relation.  Witnesses are
    re-multiplied before being returned.
    """
    depth = kb.rewrite_depth
    if not two_sided:
        u = find_word(kb, m @ target.inverse(), depth)
        if u is None:
            return None
        if replay(u, kb.ctx, kb.lookup) @ target != m:
            raise AssertionError("equivalence witness failed to replay")
        return u
    for v, vtoks in _tw_words(kb.ctx.N, depth):
        rest = depth - len(vtoks)
        u = find_word(kb, m @ v.inverse() @ target.inverse(), rest)
        if u is not None:
            vw = GeneratorWord(_compact(vtoks))
            if replay(u, kb.ctx, kb.lookup) @ target @ replay(vw, kb.ctx) != m:
                raise AssertionError("equivalence witness failed to replay")
            return u, vw
    return None
