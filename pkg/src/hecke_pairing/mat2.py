"""Exact 2x2 matrices over the rationals and the level context.

Entries are Python ints whenever they are integral and ``Fraction``
otherwise, so the common integral case runs at big-integer speed while
rational intermediates (such as a product with ``(1,1,0,2)^-1``) stay exact.
Matrices are never identified up to sign.
"""

from dataclasses import dataclass, field
from fractions import Fraction
from numbers import Rational

from .errors import LevelError, SingularMatrixError


def _norm(x):
    """Canonical entry: int when integral, otherwise a reduced Fraction."""
    if isinstance(x, int):
        return x
    if isinstance(x, Fraction):
        return x.numerator if x.denominator == 1 else x
    if isinstance(x, Rational):
        return _norm(Fraction(x.numerator, x.denominator))
    if isinstance(x, str):
        return _norm(Fraction(x.strip()))
    raise TypeError(f"matrix entries must be rational, got {type(x).__name__}")


class Mat2:
    """Immutable exact 2x2 matrix ``(a, b; c, d)`` with nonzero determinant."""

    __slots__ = ("a", "b", "c", "d", "_hash")

    def __init__(self, a, b, c, d):
        a, b, c, d = _norm(a), _norm(b), _norm(c), _norm(d)
        if a * d - b * c == 0:
            raise SingularMatrixError(f"singular matrix ({a},{b},{c},{d})")
        self._set(a, b, c, d)

    def _set(self, a, b, c, d):
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "d", d)
        object.__setattr__(self, "_hash", None)

    @classmethod
    def _raw(cls, a, b, c, d):
        # trusted constructor: entries already normalized, det known nonzero
        m = object.__new__(cls)
        _SET_A(m, a)
        _SET_B(m, b)
        _SET_C(m, c)
        _SET_D(m, d)
        _SET_H(m, None)
        return m

    def __setattr__(self, name, value):
        raise AttributeError("Mat2 is immutable")

    def __reduce__(self):
        return (Mat2, self.entries)

    @property
    def entries(self):
        return (self.a, self.b, self.c, self.d)

    def key(self):
        """Canonical deduplication key: the tuple of lowest-terms entries."""
        return (self.a, self.b, self.c, self.d)

    def key_str(self):
        return ",".join(str(x) for x in self.entries)

    @classmethod
    def from_key_str(cls, s):
        parts = s.split(",")
        if len(parts) != 4:
            raise ValueError(f"matrix key needs four entries: {s!r}")
        return cls(*parts)

    def __eq__(self, other):
        if not isinstance(other, Mat2):
            return NotImplemented
        return (self.a == other.a and self.b == other.b
                and self.c == other.c and self.d == other.d)

    def __hash__(self):
        h = self._hash
        if h is None:
            h = hash(self.entries)
            object.__setattr__(self, "_hash", h)
        return h

    def __repr__(self):
        return f"Mat2({self.a}, {self.b}, {self.c}, {self.d})"

    def __str__(self):
        return f"({self.a},{self.b},{self.c},{self.d})"

    def det(self):
        return _norm(self.a * self.d - self.b * self.c)

    def is_integral(self):
        return (type(self.a) is int and type(self.b) is int
                and type(self.c) is int and type(self.d) is int)

    def __matmul__(self, o):
        a, b, c, d = self.a, self.b, self.c, self.d
        e, f, g, h = o.a, o.b, o.c, o.d
        p, q, r, s = a * e + b * g, a * f + b * h, c * e + d * g, c * f + d * h
        if (type(p) is int and type(q) is int
                and type(r) is int and type(s) is int):
            return Mat2._raw(p, q, r, s)
        return Mat2._raw(_norm(p), _norm(q), _norm(r), _norm(s))

    def inverse(self):
        a, b, c, d = self.entries
        det = a * d - b * c
        if det == 1:
            return Mat2._raw(d, -b, -c, a)
        if det == -1:
            return Mat2._raw(-d, b, c, -a)
        det = Fraction(det)
        return Mat2._raw(_norm(d / det), _norm(-b / det),
                         _norm(-c / det), _norm(a / det))

    def __pow__(self, k):
        if not isinstance(k, int):
            return NotImplemented
        base = self if k >= 0 else self.inverse()
        k = abs(k)
        out = IDENTITY
        while k:
            if k & 1:
                out = out @ base
            base = base @ base
            k >>= 1
        return out

    def __neg__(self):
        return Mat2._raw(-self.a, -self.b, -self.c, -self.d)

    def to_json(self):
        return [str(x) for x in self.entries]

    @classmethod
    def from_json(cls, data):
        if not isinstance(data, (list, tuple)) or len(data) != 4:
            raise ValueError("matrix JSON must be a list of four strings")
        return cls(*(str(x) for x in data))


_SET_A, _SET_B, _SET_C, _SET_D, _SET_H = (
    Mat2.a.__set__, Mat2.b.__set__, Mat2.c.__set__, Mat2.d.__set__, Mat2._hash.__set__)

IDENTITY = Mat2._raw(1, 0, 0, 1)


def mat(a, b, c, d):
    """Build a matrix, rejecting singular input."""
    return Mat2(a, b, c, d)


def mul(x, y):
    return x @ y


def inverse(x):
    return x.inverse()


def det(x):
    return x.det()


def is_integral(x):
    return x.is_integral()


def parse_matrix(text):
    """Parse ``"a,b,c,d"`` where each entry is an integer or ``p/q``."""
    return Mat2.from_key_str(text)


def _pow2_subgroup(N):
    seen = []
    x = 1 % N
    while x not in seen:
        seen.append(x)
        x = (2 * x) % N
    return seen


@dataclass(frozen=True)
class LevelContext:
    """The odd level N and the data derived from it.

    ``pow2_residues`` is the cyclic subgroup of (Z/NZ)* generated by 2 and
    ``order`` is its size.  ``epsilon`` is the sign of the Fricke relation;
    it enters only the base-case derivation.
    """

    N: int
    epsilon: int = 1
    pow2_residues: frozenset = field(init=False, repr=False, compare=False)
    order: int = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        N = self.N
        if isinstance(N, bool) or not isinstance(N, int):
            raise LevelError(f"level must be an integer, got {N!r}")
        if N < 3:
            raise LevelError(f"level must be >= 3, got {N}")
        if N % 2 == 0:
            raise LevelError(f"level must be odd, got {N}")
        if self.epsilon not in (1, -1):
            raise LevelError(f"epsilon must be +1 or -1, got {self.epsilon!r}")
        residues = _pow2_subgroup(N)
        object.__setattr__(self, "pow2_residues", frozenset(residues))
        object.__setattr__(self, "order", len(residues))

    def pow2_log(self, a):
        """Smallest j >= 0 with 2^j = a mod N, or None."""
        a %= self.N
        x = 1
        for j in range(self.order):
            if x == a:
                return j
            x = (2 * x) % self.N
        return None


def T():
    return Mat2._raw(1, 1, 0, 1)


def W(ctx):
    return Mat2._raw(1, 0, ctx.N, 1)


def H(ctx):
    return Mat2._raw(0, -1, ctx.N, 0)


def M2(ctx):
    return Mat2._raw(2, -1, -ctx.N, (ctx.N + 1) // 2)


def named(name, ctx):
    """Named matrices: ``T``, ``W`` (alias ``W_N``), ``H`` (``H_N``), ``M2``."""
    table = {"T": lambda: T(), "W": lambda: W(ctx), "W_N": lambda: W(ctx),
             "H": lambda: H(ctx), "H_N": lambda: H(ctx), "M2": lambda: M2(ctx)}
    try:
        return table[name]()
    except KeyError:
        raise ValueError(f"unknown named matrix {name!r}") from None


def T_pow(k):
    return Mat2._raw(1, k, 0, 1)


def W_pow(k, ctx):
    return Mat2._raw(1, 0, k * ctx.N, 1)
