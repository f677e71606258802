"""The Hecke-operator process: base case, process steps and enumeration.

Starting from T = 1 and W_N = 1, the Fricke conjugate of T2 yields M2 = 1.
Each process step takes a certified L-element X of level n, expands
T2*X = T2, cancels one term through an already certified matrix, and
splits the remaining four-term relation A + B = C + D into two two-term
relations.  Of the two possible splits exactly one is integral; that one
gives two new certified L-elements of level n + 1.
"""

from dataclasses import dataclass, field
from fractions import Fraction

from .errors import (ConsistencyError, CoverageGapError, MissingCertificateError,
                     PairingUniquenessError, UnknownKeyError, VerificationError)
from .mat2 import IDENTITY, M2, Mat2, T, T_pow, W, W_pow, H, _norm
from .relations import (BaseM2Reason, Certificate, FormalSum, ProcessStepReason, SeedReason,
                        WordReason, cancel_common, conjugate_sum, equivalent_to,
                        hecke_T2, mul_sum)
from .subgroups import (LElementDescriptor, descriptor_of, enumerate_L_descriptors,
                        in_L02, level_descriptors, power_of_two_exponent)
from .words import GeneratorWord, cert_token, gen_token, replay, word

TWO_ONE = Mat2._raw(2, 0, 0, 1)
C_MAT = Mat2._raw(1, 0, 0, 2)
D_MAT = Mat2._raw(1, 1, 0, 2)
_T2 = hecke_T2()


def _half(x):
    return x >> 1 if type(x) is int and not x & 1 else _norm(Fraction(x) / 2)


def _times_C_inv(m):
    # m @ (1,0,0,2)^-1 with (1,0,0,2)^-1 = (1,0,0,1/2)
    return Mat2._raw(m.a, _half(m.b), m.c, _half(m.d))


def _times_D_inv(m):
    # m @ (1,1,0,2)^-1 with (1,1,0,2)^-1 = (1,-1/2,0,1/2)
    return Mat2._raw(m.a, _half(m.b - m.a), m.c, _half(m.d - m.c))


def _times_two_one_inv(m):
    # m @ (2,0,0,1)^-1
    return Mat2._raw(_half(m.a), m.b, _half(m.c), m.d)


# --- base case --------------------------------------------------------------

def _fricke(ctx, epsilon):
    h = H(ctx)
    return h if epsilon == 1 else -h


def base_case_matrix(ctx, epsilon=1):
    """Run the base-case chain and return the derived matrix (M2).

    Raises ConsistencyError if any intermediate identity is off.
    """
    N = ctx.N
    t2 = hecke_T2()
    conj = conjugate_sum(t2, _fricke(ctx, epsilon))
    expected = {Mat2._raw(1, 0, 0, 2), Mat2._raw(2, 0, 0, 1), Mat2._raw(2, 0, -N, 1)}
    if set(conj.matrices()) != expected or any(c != 1 for _, c in conj.items()):
        raise ConsistencyError(f"Hecke conjugation identity fails at N={N}")
    lhs, rhs = cancel_common(conj, t2)
    if len(lhs) != 1 or len(rhs) != 1:
        raise ConsistencyError("base-case cancellation did not leave one term per side")
    (left, _), = lhs.items()
    (right, _), = rhs.items()
    if left != Mat2._raw(2, 0, -N, 1) or right != D_MAT:
        raise ConsistencyError("base-case cancellation left unexpected terms")
    m2 = left @ right.inverse()
    if m2 != M2(ctx):
        raise ConsistencyError(f"base case produced {m2}, expected M2")
    return m2


@dataclass
class BaseCase:
    m2: Certificate
    variants: list


def derive_base_case(kb, epsilon=None):
    """Certify M2 and the three variants W*M2, M2*T and W*M2*T."""
    ctx = kb.ctx
    eps = ctx.epsilon if epsilon is None else epsilon
    m2 = base_case_matrix(ctx, eps)
    cert = kb.add(Certificate(m2, BaseM2Reason(eps), 1))
    c = cert_token(m2)
    variants = []
    for w in (word("W", c), word(c, "T"), word("W", c, "T")):
        m = replay(w, ctx, kb.lookup)
        variants.append(kb.add(Certificate(m, WordReason(w), 1)))
    expected = [Mat2._raw(2, -1, ctx.N, (1 - ctx.N) // 2), Mat2._raw(2, 1, -ctx.N, (1 - ctx.N) // 2),
                Mat2._raw(2, 1, ctx.N, (ctx.N + 1) // 2)]
    if [v.matrix for v in variants] != expected:
        raise ConsistencyError("base-case variants differ from the expected matrices")
    return BaseCase(cert, variants)


# --- pairing and reduction --------------------------------------------------

def pairing_candidates(A, B, ctx):
    """P1 = (A C^-1, M2 B D^-1), P2 = (A D^-1, M2 B C^-1)."""
    m2 = M2(ctx)
    p1 = (_times_C_inv(A), m2 @ _times_D_inv(B))
    p2 = (_times_D_inv(A), m2 @ _times_C_inv(B))
    return p1, p2


def select_integral_pairing(p1, p2, parity_even=None):
    """Return "P1" or "P2", whichever pair is entirely integral.

    ``parity_even`` (whether the parent's corner (alpha*beta*N+1)/2^n is
    even) is cross-checked against the direct test when given.
    """
    i1 = p1[0].is_integral() and p1[1].is_integral()
    i2 = p2[0].is_integral() and p2[1].is_integral()
    if i1 == i2:
        raise PairingUniquenessError(
            f"{'both' if i1 else 'neither'} pairing candidates integral",
            candidates=(p1, p2))
    choice = "P1" if i1 else "P2"
    if parity_even is not None and parity_even != i1:
        raise PairingUniquenessError(
            f"parity rule predicts {'P1' if parity_even else 'P2'} but {choice} is integral",
            candidates=(p1, p2))
    return choice


@dataclass(frozen=True)
class Reduction:
    """``reduced = W^k * m * T^l`` with off-diagonals brought into range."""
    k: int
    l: int
    reduced: Mat2

    @property
    def pre(self):
        return gen_token("W", self.k)

    @property
    def post(self):
        return gen_token("T", self.l)

    def word(self):
        """Word replaying to the original m: W^-k * reduced * T^-l."""
        return word(gen_token("W", -self.k), cert_token(self.reduced), gen_token("T", -self.l))


def _centering_shift(x, mod):
    # t with x + t*mod in [-mod/2, mod/2)
    return -((x + (mod >> 1)) // mod)


def reduce_to_L(m, ctx):
    """Bring (2^L, alpha, beta*N, *) into |alpha|, |beta| <= 2^(L-1) using
    only T on the right and W_N on the left."""
    L = power_of_two_exponent(m.a)
    if L is None or not (m.is_integral() and m.c % ctx.N == 0):
        raise ValueError(f"{m} is not in G_0,2({ctx.N})")
    mod = 1 << L
    a, b, c, d = m.entries
    l = _centering_shift(b, mod) if L else -b
    k = _centering_shift(c // ctx.N, mod) if L else -(c // ctx.N)
    # W^k (a, b, c, d) T^l, multiplied out
    b2, d2 = b + a * l, d + c * l
    kN = k * ctx.N
    return Reduction(k, l, Mat2._raw(a, b2, c + kN * a, d2 + kN * b2))


# --- process step ----------------------------------------------------------

@dataclass
class ProcessStepOutcome:
    parent: Certificate
    lhs_after_cancel: object
    rhs_after_cancel: object
    chosen_pairing: str
    gamma1: Certificate
    gamma2: Certificate
    rejected_pairing_matrices: tuple
    cancel_word: GeneratorWord
    half_adjusted: bool = False


def _t2_terms(x):
    # (2,0,0,1)x, (1,0,0,2)x, (1,1,0,2)x
    a, b, c, d = x.entries
    return (Mat2._raw(2 * a, 2 * b, c, d), Mat2._raw(a, b, 2 * c, 2 * d),
            Mat2._raw(a + c, b + d, 2 * c, 2 * d))


def _cancel_word(kb, mid):
    """Word u with u*(2,0,0,1) == mid, built from the half-level matrix.

    Direct normalization first; bounded search as the fallback.  Returns
    (word, adjusted) where adjusted says the half-level matrix was outside
    L_0,2 and needed T/W_N adjustment.
    """
    ctx = kb.ctx
    half = _times_two_one_inv(mid)
    if half.is_integral() and half.det() == 1 and half.c % ctx.N == 0:
        if half.a == 1:
            beta, alpha = half.c // ctx.N, half.b
            u = word(gen_token("W", beta), gen_token("T", alpha))
            if replay(u, ctx) == half:
                return u, False
        elif power_of_two_exponent(half.a):
            red = reduce_to_L(half, ctx)
            if red.reduced in kb:
                adjusted = red.k != 0 or red.l != 0
                u = red.word() if adjusted else word(cert_token(half))
                return u, adjusted
    u = equivalent_to(kb, mid, TWO_ONE)
    if u is None:
        raise MissingCertificateError(
            f"half-level matrix {half} is not certified (needed to cancel {mid})")
    return u, True


def process_step(kb, parent):
    ctx = kb.ctx
    X = parent.matrix
    desc = descriptor_of(X, ctx)
    A, mid, B = _t2_terms(X)  # the three terms of T2 * X
    u, adjusted = _cancel_word(kb, mid)
    if adjusted:
        kb.events.append(("half-level-adjusted", X.key_str()))
    lhs2, rhs2 = cancel_common(FormalSum.of(A, TWO_ONE, B), _T2)
    if len(lhs2) != 2 or len(rhs2) != 2:
        raise ConsistencyError(f"cancellation at {X} left {len(lhs2)}+{len(rhs2)} terms")
    p1, p2 = pairing_candidates(A, B, ctx)
    choice = select_integral_pairing(p1, p2, parity_even=(X.d % 2 == 0))
    chosen, rejected = (p1, p2) if choice == "P1" else (p2, p1)
    outs = []
    for idx, Y in enumerate(chosen):
        if Y.det() != 1 or power_of_two_exponent(Y.a) != desc.n + 1 or Y.c % ctx.N:
            raise ConsistencyError(f"pairing output {Y} is not in G_0,2 at level {desc.n + 1}")
        red = reduce_to_L(Y, ctx)
        if not in_L02(red.reduced, ctx):
            raise ConsistencyError(f"reduced output {red.reduced} is not in L_0,2")
        reason = ProcessStepReason(parent=X.key_str(), cancel=u, pairing=choice, output=idx,
                                   pre=red.pre, post=red.post, rejected=rejected)
        outs.append(kb.add(Certificate(red.reduced, reason, parent.depth + 1)))
    return ProcessStepOutcome(parent, lhs2, rhs2, choice, outs[0], outs[1], rejected, u, adjusted)


# --- enumeration -------------------------------------------------------------

@dataclass
class EnumerationStats:
    steps: int = 0
    pairing_counts: dict = field(default_factory=lambda: {"P1": 0, "P2": 0})
    uniqueness_violations: int = 0
    half_level_adjustments: int = 0


def enumerate_certified_L(kb, n_max, stats=None):
    """Certify every L-descriptor up to level n_max by forward stepping.

    Level-synchronous: all steps of level n read certificates of levels
    n and n-1 only, so each level could be farmed out over snapshots.
    """
    ctx = kb.ctx
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    if M2(ctx) not in kb:
        derive_base_case(kb)
    stats = stats if stats is not None else EnumerationStats()
    for n in range(1, n_max):
        for desc in level_descriptors(ctx, n):
            cert = kb.get(desc.matrix())
            if cert is None:
                continue  # reported by the coverage check below
            out = process_step(kb, cert)
            stats.steps += 1
            stats.pairing_counts[out.chosen_pairing] += 1
            stats.half_level_adjustments += out.half_adjusted
    result, missing = {}, []
    for desc in enumerate_L_descriptors(ctx, n_max):
        cert = kb.get(desc.matrix())
        if cert is None:
            missing.append(desc.key)
        else:
            result[desc.key] = cert
    if missing:
        raise CoverageGapError(f"{len(missing)} admissible descriptors not certified", missing)
    return result


def _parent_descriptor(desc):
    n = desc.n - 1
    ctx = desc.ctx
    mod = 1 << n
    alpha = desc.alpha + _centering_shift(desc.alpha, mod) * mod
    if n == 1:
        return LElementDescriptor(1, alpha, 1 if desc.beta % 4 == 1 else -1, ctx)
    beta = (-pow(alpha * ctx.N, -1, mod)) % mod
    beta += _centering_shift(beta, mod) * mod
    return LElementDescriptor(n, alpha, beta, ctx)


def ensure_L_certificate(kb, m):
    """Certify an L-element on demand by walking its ancestor chain.

    The chain has one element per level, so the cost is linear in the
    level of m (times the big-integer cost at that size).
    """
    ctx = kb.ctx
    cert = kb.get(m)
    if cert is not None:
        return cert
    desc = descriptor_of(m, ctx)
    if M2(ctx) not in kb:
        derive_base_case(kb)
    chain = [desc]
    while chain[-1].n > 1 and chain[-1].matrix() not in kb:
        chain.append(_parent_descriptor(chain[-1]))
    if chain[-1].matrix() not in kb:
        raise CoverageGapError(f"level-1 ancestor {chain[-1].key} of {m} is not certified",
                               [chain[-1].key])
    for parent_desc, child_desc in zip(reversed(chain[1:]), reversed(chain[:-1])):
        child = child_desc.matrix()
        if child in kb:
            continue
        process_step(kb, kb.get(parent_desc.matrix()))
        if child not in kb:
            raise CoverageGapError(f"{child} not produced by its parent {parent_desc.key}",
                                   [child_desc.key])
    return kb.get(m)


# --- replay / audit ------------------------------------------------------------

def replay_certificate(kb, cert):
    """Recompute a certificate's matrix from its recorded reason."""
    ctx = kb.ctx
    r = cert.reason
    if isinstance(r, SeedReason):
        return {"T": T(), "W": W(ctx)}[r.name]
    if isinstance(r, BaseM2Reason):
        return base_case_matrix(ctx, r.epsilon)
    if isinstance(r, WordReason):
        return replay(r.word, ctx, kb.lookup)
    if isinstance(r, ProcessStepReason):
        X = kb.lookup(r.parent)
        if not in_L02(X, ctx):
            raise VerificationError(f"parent {r.parent} is not in L_0,2", cert.key)
        A, mid, B = _t2_terms(X)
        if replay(r.cancel, ctx, kb.lookup) @ TWO_ONE != mid:
            raise VerificationError("cancel word does not reproduce the middle term", cert.key)
        p1, p2 = pairing_candidates(A, B, ctx)
        choice = select_integral_pairing(p1, p2, parity_even=(X.d % 2 == 0))
        if choice != r.pairing:
            raise VerificationError(f"recorded pairing {r.pairing} but {choice} is integral", cert.key)
        chosen, rejected = (p1, p2) if choice == "P1" else (p2, p1)
        if r.rejected and tuple(r.rejected) != rejected:
            raise VerificationError("recorded rejected candidates differ", cert.key)
        return replay(GeneratorWord(r.pre), ctx) @ chosen[r.output] @ replay(GeneratorWord(r.post), ctx)
    raise VerificationError(f"unknown reason {r!r}", cert.key)


@dataclass
class AuditReport:
    checked: int = 0
    passed: int = 0
    failures: list = field(default_factory=list)

    @property
    def ok(self):
        return not self.failures


def audit(kb):
    """Replay every certificate; collect (key, message) for each failure."""
    report = AuditReport()
    for cert in kb.certificates():
        report.checked += 1
        try:
            m = replay_certificate(kb, cert)
            if m != cert.matrix:
                raise VerificationError(f"replay gives {m}", cert.key)
            if not (m.is_integral() and m.det() == 1 and m.c % kb.ctx.N == 0):
                raise VerificationError("certified matrix is not in Gamma_0(N)", cert.key)
        except (VerificationError, PairingUniquenessError, ConsistencyError,
                UnknownKeyError, ValueError, KeyError) as exc:
            report.failures.append((cert.key, str(exc)))
        else:
            report.passed += 1
    return report
