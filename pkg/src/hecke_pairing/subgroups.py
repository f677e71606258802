"""Membership predicates for Gamma_0(N) and its power-of-two subsets.

The chain of sets, smallest first:

    L02(N)  subset of  G02(N)  subset of  Gamma02(N)  subset of  Gamma0(N)

G02 asks for a top-left entry that is exactly a power of two; Gamma02 only
asks for it modulo N.  L02 adds the off-diagonal bound |alpha|, |beta| <=
2^(n-1) where the matrix is (2^n, alpha, beta*N, *).
"""

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import product

from sympy import factorint, primitive_root

from .errors import NotInGamma0Error, NotInSubgroupError
from .mat2 import LevelContext, Mat2


def in_gamma0(m, ctx):
    return m.is_integral() and m.det() == 1 and m.c % ctx.N == 0


def in_gamma02(m, ctx):
    return in_gamma0(m, ctx) and (m.a % ctx.N) in ctx.pow2_residues


def power_of_two_exponent(x):
    """Return n with x == 2^n, or None."""
    if type(x) is not int or x <= 0 or x & (x - 1):
        return None
    return x.bit_length() - 1


def in_G02(m, ctx):
    return in_gamma0(m, ctx) and power_of_two_exponent(m.a) is not None


@lru_cache(maxsize=None)
def _character_data(N):
    # (Z/NZ)* for odd N is a product of cyclic groups, one per prime power.
    factors = []
    for p, e in sorted(factorint(N).items()):
        q = p ** e
        g = primitive_root(q)
        phi = q - q // p
        index = {}
        x = 1
        for i in range(phi):
            index[x] = i
            x = x * g % q
        factors.append((q, phi, index))
    orders = [phi for _, phi, _ in factors]
    characters = []
    for exps in product(*(range(o) for o in orders)):
        characters.append(exps)
    return factors, characters


def _character_angle(exps, factors, x):
    """chi(x) = exp(2 pi i * angle); the angle is exact, taken mod 1."""
    angle = Fraction(0)
    for t, (q, phi, index) in zip(exps, factors):
        angle += Fraction(t * index[x % q], phi)
    return angle - (angle.numerator // angle.denominator)


def in_gamma02_by_characters(m, ctx):
    """Character-theoretic membership test.

    ``a`` lies in the subgroup generated by 2 exactly when chi(a) = 1 for
    every Dirichlet character chi mod N with chi(2) = 1.  Characters are
    indexed by exponent vectors over the cyclic factors and evaluated with
    exact rational angles.
    """
    if not in_gamma0(m, ctx):
        raise NotInGamma0Error(f"{m} is not in Gamma_0({ctx.N})")
    factors, characters = _character_data(ctx.N)
    a = m.a % ctx.N
    for exps in characters:
        if _character_angle(exps, factors, 2) == 0 and _character_angle(exps, factors, a) != 0:
            return False
    return True


@dataclass(frozen=True)
class LElementDescriptor:
    n: int
    alpha: int
    beta: int
    ctx: LevelContext

    def __post_init__(self):
        n, alpha, beta, N = self.n, self.alpha, self.beta, self.ctx.N
        half = 1 << (n - 1) if n >= 1 else 0
        if n < 1 or alpha % 2 == 0 or beta % 2 == 0:
            raise ValueError(f"invalid L descriptor {(n, alpha, beta)}")
        if abs(alpha) > half or abs(beta) > half:
            raise ValueError(f"descriptor {(n, alpha, beta)} violates |alpha|,|beta| <= 2^(n-1)")
        if (alpha * beta * N + 1) % (1 << n):
            raise ValueError(f"descriptor {(n, alpha, beta)} has non-integral corner")

    @property
    def key(self):
        return (self.n, self.alpha, self.beta)

    def matrix(self):
        N = self.ctx.N
        d = (self.alpha * self.beta * N + 1) >> self.n
        return Mat2._raw(1 << self.n, self.alpha, self.beta * N, d)


def in_L02(m, ctx):
    if not in_G02(m, ctx):
        return False
    n = power_of_two_exponent(m.a)
    if n < 1:
        return False
    half = 1 << (n - 1)
    return abs(m.b) <= half and abs(m.c // ctx.N) <= half


def descriptor_of(m, ctx):
    if not in_L02(m, ctx):
        raise NotInSubgroupError(f"{m} is not in L_0,2({ctx.N})")
    return LElementDescriptor(power_of_two_exponent(m.a), m.b, m.c // ctx.N, ctx)


def level_descriptors(ctx, n):
    """All descriptors of a single level n, ordered by (alpha, beta)."""
    N = ctx.N
    mod = 1 << n
    half = mod >> 1
    out = []
    for alpha in range(-half, half + 1):
        if alpha % 2 == 0:
            continue
        r = (-pow(alpha * N, -1, mod)) % mod
        for beta in sorted({r, r - mod}):
            if -half <= beta <= half:
                out.append(LElementDescriptor(n, alpha, beta, ctx))
    return out


def enumerate_L_descriptors(ctx, n_max):
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    out = []
    for n in range(1, n_max + 1):
        out.extend(level_descriptors(ctx, n))
    return out
