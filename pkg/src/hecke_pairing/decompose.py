"""Decomposition of Gamma_0,2(N) elements and the weak-Artin search.

A G_0,2 element (2^n, *, *, *) is W^k * L * T^l for an L-element L of
level n.  A general g in Gamma_0,2(N) is written g = W^k d1 d2 W^l with
d1, d2 in G_0,2(N).  To find d1 we look at the top row (e, -alpha) of its
inverse: the row of d1^-1 * g is (y1, y2) = (e a - alpha c, e b - alpha d)
and d2 = d1^-1 g W^-l lies in G_0,2 as soon as y1 = 2^j mod |y2| N.  The
pairs (alpha, y2) with b | y2 + alpha d form a rank-2 lattice; short
lattice vectors keep both discrete-log moduli small, which keeps the two
certificate levels n and j small.
"""

from dataclasses import dataclass, field
from functools import lru_cache
from math import gcd
from typing import Optional

from sympy import jacobi_symbol
from sympy.ntheory import discrete_log, n_order

from .errors import (MissingCertificateError, NotInSubgroupError, SearchExhaustedError,
                     SignQuotientError, UnknownKeyError)
from .mat2 import IDENTITY, Mat2, W_pow
from .process import ensure_L_certificate, reduce_to_L
from .subgroups import in_G02, in_gamma0, in_gamma02, power_of_two_exponent
from .words import GeneratorWord, cert_token, collapse, gen_token, parse_token, word
from .words import replay as replay_word


# --- discrete logarithms base 2 ------------------------------------------

@lru_cache(maxsize=1 << 16)
def _order_of_two(m):
    return n_order(2, m)


def min_pow2_exponent(t, mod, cap=None):
    """Smallest j >= 0 with 2^j = t (mod mod), or None.

    With ``cap`` the answer is found by stepping and limited to j <= cap;
    without it an exact discrete logarithm is used.
    """
    if mod == 1:
        return 0
    t %= mod
    if cap is not None:
        x = 1 % mod
        for j in range(cap + 1):
            if x == t:
                return j
            x = (x << 1) % mod
        return None
    s = (mod & -mod).bit_length() - 1  # mod = 2^s * odd
    odd = mod >> s
    x = 1 % mod
    for j in range(s):
        if x == t:
            return j
        x = (x << 1) % mod
    if t % (1 << s):
        return None
    if odd == 1:
        return s
    to = t % odd
    if gcd(to, odd) != 1:
        return None
    order = _order_of_two(odd)
    try:
        j0 = discrete_log(odd, to, 2)
    except ValueError:
        return None
    j0 %= order
    if j0 < s:
        j0 += ((s - j0 + order - 1) // order) * order
    return j0


# --- weak Artin search ---------------------------------------------------

@dataclass(frozen=True)
class ArtinWitness:
    d: int
    b: int
    M: int
    k: int
    n: int

    @property
    def modulus(self):
        return self.d + self.k * self.M

    def verify(self):
        m = self.modulus
        return (gcd(self.d, self.b * self.M) == 1 and m > 1
                and pow(2, self.n, m) == self.b % m)

    def to_json(self):
        return {"d": str(self.d), "b": str(self.b), "M": str(self.M),
                "k": str(self.k), "n": str(self.n), "modulus": str(self.modulus)}


def _step_log(b, m, n_cap):
    """Smallest n <= n_cap with 2^n = b mod m by stepping powers of 2.

    Stepping stops at n_cap or when the power sequence revisits a value
    (its period is then complete).  Odd moduli with a large order switch to
    an exact discrete log; the answer is the same smallest n.
    """
    if m % 2 and m > 4096:
        n = min_pow2_exponent(b, m)
        return n if n is not None and n <= n_cap else None
    target = b % m
    x, seen = 1 % m, set()
    for n in range(n_cap + 1):
        if x == target:
            return n
        if x in seen:
            return None
        seen.add(x)
        x = (x << 1) % m
    return None


def jacobi_obstructed(d, b, M):
    """True when quadratic reciprocity rules out every k >= 0.

    If 2 = 2^n mod m then (b/m) = (2/m)^n.  When every modulus m = d + kM
    is odd with (2/m) = 1 but (b/m) = -1, no k can work.  Both symbols are
    periodic in m with period dividing 8|b|, so one period decides it.
    """
    if M % 2:
        return False  # moduli of both parities occur
    period = 8 * abs(b)
    any_checked = False
    for k in range(period + 1):
        m = d + k * M
        if m <= 1:
            continue
        any_checked = True
        if jacobi_symbol(2, m) != 1 or jacobi_symbol(b % m, m) != -1:
            return False
    return any_checked


def artin_search(d, b, M, k_max, n_cap=None):
    """Smallest k in [0, k_max] (then smallest n) with b = 2^n mod (d + kM)."""
    if M < 1:
        raise ValueError("M must be >= 1")
    if gcd(d, b * M) != 1:
        raise ValueError(f"gcd(d, bM) = gcd({d}, {b * M}) != 1")
    if jacobi_obstructed(d, b, M):
        # no k of any size works, so scanning would only burn time
        raise SearchExhaustedError(
            f"no witness for (d={d}, b={b}, M={M}) with any k: obstructed by quadratic reciprocity",
            scanned={"k_max": k_max, "n_cap": n_cap, "skipped": True}, obstructed=True)
    for k in range(k_max + 1):
        m = d + k * M
        if m <= 1:
            continue
        cap = m if n_cap is None else n_cap
        n = _step_log(b, m, cap)
        if n is not None:
            w = ArtinWitness(d, b, M, k, n)
            if not w.verify():
                raise AssertionError(f"artin witness {w} fails verification")
            return w
    obstructed = jacobi_obstructed(d, b, M)
    why = "obstructed by quadratic reciprocity" if obstructed else "bounds exhausted"
    raise SearchExhaustedError(
        f"no witness for (d={d}, b={b}, M={M}) with k <= {k_max}: {why}",
        scanned={"k_max": k_max, "n_cap": n_cap}, obstructed=obstructed)


# --- G_0,2 decomposition -------------------------------------------------

def decompose_G02(psi, ctx, kb, certify=False):
    """Word W^a * C(L) * T^b (or a pure T/W word when the corner is 1)."""
    if not in_G02(psi, ctx):
        raise NotInSubgroupError(f"{psi} is not in G_0,2({ctx.N})")
    if psi.a == 1:
        # (1, alpha, beta N, *) = W^beta T^alpha
        return word(gen_token("W", psi.c // ctx.N), gen_token("T", psi.b))
    red = reduce_to_L(psi, ctx)
    if red.reduced not in kb:
        if not certify:
            raise MissingCertificateError(
                f"L-element {red.reduced} (level {power_of_two_exponent(psi.a)}) is not certified")
        ensure_L_certificate(kb, red.reduced)
    return red.word()


# --- Gamma_0,2 decomposition --------------------------------------------

@dataclass(frozen=True)
class DecomposeBounds:
    radius: int = 6            # first lattice window, |i|,|j| <= radius
    quick_cap: int = 64        # stepping cap in the first pass
    max_radius: int = 24       # largest lattice window tried
    max_level: int = 4096      # refuse to certify L-elements above this level
    good_cost: int = 256       # stop widening the window once n + j is this small


@dataclass(frozen=True)
class Decomposition:
    word: GeneratorWord
    k: int
    delta1: Mat2
    delta2: Mat2
    l: int

    @property
    def levels(self):
        return (power_of_two_exponent(self.delta1.a), power_of_two_exponent(self.delta2.a))

    def normal_form_json(self):
        return {"k": str(self.k), "delta1": self.delta1.to_json(),
                "delta2": self.delta2.to_json(), "l": str(self.l)}


@dataclass(frozen=True)
class _Candidate:
    cost: int
    alpha: int
    e: int
    n: int
    y2: int
    j: int


def _gauss_reduce(u, v):
    def n2(x):
        return x[0] * x[0] + x[1] * x[1]
    if n2(u) > n2(v):
        u, v = v, u
    while True:
        nu = n2(u)
        num = u[0] * v[0] + u[1] * v[1]
        mu = (2 * num + nu) // (2 * nu)  # nearest integer
        v = (v[0] - mu * u[0], v[1] - mu * u[1])
        if n2(v) >= nu:
            return u, v
        u, v = v, u


def _lattice_points(b, d, radius, skip=0):
    """Points (alpha, y2) with y2 = -alpha d (mod b), in a fixed order."""
    B = abs(b)
    u, v = _gauss_reduce((1, (-d) % B), (0, B))
    pts = [(i, j) for i in range(-radius, radius + 1) for j in range(-radius, radius + 1)
           if max(abs(i), abs(j)) > skip]
    pts.sort(key=lambda p: (abs(p[0]) + abs(p[1]), p))
    for i, j in pts:
        yield i * u[0] + j * v[0], i * u[1] + j * v[1]


def _evaluate(g, ctx, alpha, y2, cap, best):
    a, b, c, d = g.entries
    N = ctx.N
    if y2 == 0:
        return None
    if alpha == 0:
        if y2 != b:
            return None
        e, n = 1, 0
    else:
        e, rem = divmod(y2 + alpha * d, b)
        if rem or gcd(e, abs(alpha) * N) != 1:
            return None
        n = min_pow2_exponent(pow(e, -1, abs(alpha) * N), abs(alpha) * N, cap)
        if n is None or (best is not None and n >= best.cost):
            return None
    y1 = e * a - alpha * c
    j = min_pow2_exponent(y1, abs(y2) * N, cap)
    if j is None:
        return None
    return _Candidate(n + j, alpha, e, n, y2, j)


def _search(g, ctx, bounds):
    """Cheapest candidate: a capped pass first, then exact discrete logs
    over growing lattice windows until the best cost is acceptable."""
    b, d = g.b, g.d
    best = _evaluate(g, ctx, 0, b, bounds.quick_cap, None)
    for alpha, y2 in _lattice_points(b, d, bounds.radius):
        cand = _evaluate(g, ctx, alpha, y2, bounds.quick_cap, best)
        if cand is not None and (best is None or cand.cost < best.cost):
            best = cand
    if best is not None:
        return best
    best = _evaluate(g, ctx, 0, b, None, None)
    radius, done = bounds.radius, -1
    while True:
        for alpha, y2 in _lattice_points(b, d, radius, skip=done):
            cand = _evaluate(g, ctx, alpha, y2, None, best)
            if cand is not None and (best is None or cand.cost < best.cost):
                best = cand
        if (best is not None and best.cost <= bounds.good_cost) or radius >= bounds.max_radius:
            return best
        done, radius = radius, min(2 * radius, bounds.max_radius)


def decompose_Gamma02(g, ctx, kb, bounds=None):
    """Write g = W^k d1 d2 W^l with d1, d2 in G_0,2(N) and return the
    generator word (certifying the needed L-elements on demand)."""
    bounds = bounds or DecomposeBounds()
    if not in_gamma02(g, ctx):
        raise NotInSubgroupError(f"{g} is not in Gamma_0,2({ctx.N})")
    N = ctx.N
    a, b, c, d = g.entries
    if b == 0 and a == 1:
        return _finish(g, ctx, kb, c // N, IDENTITY, IDENTITY, 0, bounds)
    if in_G02(g, ctx):
        return _finish(g, ctx, kb, 0, IDENTITY, g, 0, bounds)
    if b == 0:
        # g = -W^m.  With d1 = T the row of T^-1 g is (-1 - c, 1), so a
        # power 2^j = -1 mod N finishes it; one exists because a = -1 lies
        # in the subgroup generated by 2.
        j = min_pow2_exponent(a - c, N)
        if j is None:
            raise SignQuotientError(f"{g} is -W^m but -1 is not a power of 2 mod {N}")
        cand = _Candidate(j, 1, 1, 0, -d, j)
    else:
        cand = _search(g, ctx, bounds)
    if cand is None:
        raise SearchExhaustedError(
            f"no decomposition of {g} within lattice radius {bounds.max_radius}",
            scanned={"max_radius": bounds.max_radius})
    if max(cand.n, cand.j) > bounds.max_level:
        raise SearchExhaustedError(
            f"decomposition of {g} needs L-elements of levels {cand.n}, {cand.j} "
            f"(limit {bounds.max_level})",
            scanned={"levels": [cand.n, cand.j], "max_level": bounds.max_level})
    alpha, e, n = cand.alpha, cand.e, cand.n
    if alpha == 0:
        delta1 = IDENTITY
    else:
        beta, rem = divmod((1 << n) * e - 1, alpha * N)
        if rem:
            raise AssertionError("delta1 corner is not integral")
        delta1 = Mat2._raw(1 << n, alpha, beta * N, e)
    y = delta1.inverse() @ g
    l, rem = divmod(y.a - (1 << cand.j), N * y.b)
    if rem:
        raise AssertionError("W exponent is not integral")
    delta2 = y @ W_pow(-l, ctx)
    return _finish(g, ctx, kb, 0, delta1, delta2, l, bounds)


def _finish(g, ctx, kb, k, delta1, delta2, l, bounds):
    for dlt in (delta1, delta2):
        if not in_G02(dlt, ctx):
            raise AssertionError(f"normal-form factor {dlt} is not in G_0,2")
    parts = [gen_token("W", k)]
    for dlt in (delta1, delta2):
        if dlt != IDENTITY:
            parts.append(decompose_G02(dlt, ctx, kb, certify=True))
    parts.append(gen_token("W", l))
    w = collapse(word(*parts))
    dec = Decomposition(w, k, delta1, delta2, l)
    if replay(w, kb) != g:
        raise AssertionError(f"decomposition of {g} does not replay")
    return dec


def replay(w, kb):
    """Exact product of a word against the knowledge base."""
    return replay_word(w, kb.ctx, kb.lookup)


# --- normal-form pattern check --------------------------------------------

def matches_normal_form(w, ctx, lookup):
    """Does the collapsed word split as W^k X Y W^l with X, Y in G_0,2?

    Independent of how the word was produced: tries every split of the
    collapsed token list.
    """
    toks = list(collapse(w))
    lead = 1 if toks and parse_token(toks[0])[0] == "W" else 0
    trail = 1 if len(toks) > lead and parse_token(toks[-1])[0] == "W" else 0
    options = [(lead, trail)]
    if lead:
        options.append((0, trail))
    if trail:
        options.append((lead, 0))
    if lead and trail:
        options.append((0, 0))
    for lo, tr in options:
        middle = toks[lo:len(toks) - tr]
        for cut in range(len(middle) + 1):
            x = replay_word(GeneratorWord(tuple(middle[:cut])), ctx, lookup)
            y = replay_word(GeneratorWord(tuple(middle[cut:])), ctx, lookup)
            if in_G02(x, ctx) and in_G02(y, ctx):
                return True
    return False
