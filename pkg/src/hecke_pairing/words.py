"""Generator words over T, W_N and certified matrices.

Tokens are strings so that words serialize to JSON unchanged:

    "T", "T-1", "W", "W-1"     single generators and their inverses
    "T^k", "W^k"               a run of |k| >= 2 copies (k may be negative)
    "C(a,b,c,d)"               a matrix certified in the knowledge base

Run tokens keep words short when an exponent is astronomically large.
"""

import re
from dataclasses import dataclass

from .errors import UnknownKeyError
from .mat2 import IDENTITY, Mat2, T_pow, W_pow

_POWER = re.compile(r"^([TW])\^(-?\d+)$")
_CERT = re.compile(r"^C\(([^()]*)\)$")


def gen_token(kind, k):
    """Token(s) for kind^k as a tuple (empty when k == 0)."""
    if k == 0:
        return ()
    if k == 1:
        return (kind,)
    if k == -1:
        return (kind + "-1",)
    return (f"{kind}^{k}",)


def cert_token(m):
    return f"C({m.key_str()})"


def parse_token(tok):
    """Return ('T', k), ('W', k) or ('C', key_str)."""
    if tok in ("T", "W"):
        return tok, 1
    if tok in ("T-1", "W-1"):
        return tok[0], -1
    m = _POWER.match(tok)
    if m:
        return m.group(1), int(m.group(2))
    m = _CERT.match(tok)
    if m:
        return "C", m.group(1)
    raise ValueError(f"unrecognized word token {tok!r}")


@dataclass(frozen=True)
class GeneratorWord:
    tokens: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "tokens", tuple(self.tokens))
        for tok in self.tokens:
            parse_token(tok)

    def __len__(self):
        return len(self.tokens)

    def __iter__(self):
        return iter(self.tokens)

    def __add__(self, other):
        return GeneratorWord(self.tokens + tuple(other))

    def cert_keys(self):
        return [v for k, v in map(parse_token, self.tokens) if k == "C"]

    def to_json(self):
        return list(self.tokens)


def word(*parts):
    """Concatenate tokens, token tuples and words into one GeneratorWord."""
    out = []
    for p in parts:
        if isinstance(p, str):
            out.append(p)
        else:
            out.extend(p)
    return GeneratorWord(tuple(out))


def collapse(w):
    """Merge adjacent T (resp. W) tokens into a single run; drop empty runs."""
    out = []  # list of [kind, value]
    for tok in w:
        kind, v = parse_token(tok)
        if kind != "C" and out and out[-1][0] == kind:
            out[-1][1] += v
            if out[-1][1] == 0:
                out.pop()
        else:
            out.append([kind, v])
    tokens = []
    for kind, v in out:
        tokens.extend(gen_token(kind, v) if kind != "C" else (f"C({v})",))
    return GeneratorWord(tuple(tokens))


def runs(w):
    """Collapsed word as a list of (kind, value) pairs."""
    return [parse_token(t) for t in collapse(w)]


def replay(w, ctx, lookup=None):
    """Exact left-to-right product.

    ``lookup(key_str)`` must return the certified matrix for a certificate
    token; it should raise :class:`UnknownKeyError` for absent keys.
    """
    out = IDENTITY
    for tok in w:
        kind, v = parse_token(tok)
        if kind == "T":
            out = out @ T_pow(v)
        elif kind == "W":
            out = out @ W_pow(v, ctx)
        else:
            if lookup is None:
                raise UnknownKeyError(v)
            out = out @ lookup(v)
    return out


def inverse_tw(w):
    """Inverse of a word that contains only T/W tokens."""
    out = []
    for tok in reversed(tuple(w)):
        kind, v = parse_token(tok)
        if kind == "C":
            raise ValueError("inverse_tw only handles T/W words")
        out.extend(gen_token(kind, -v))
    return GeneratorWord(tuple(out))


def matrix_from_cert_key(key):
    return Mat2.from_key_str(key)
