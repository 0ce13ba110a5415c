"""Witness constructions: integer pairs (Q, R) with small products.

Every construction takes traces Q = Tr(gamma * z), R = Tr(beta * gamma * z) of
a suitable element z of a quadratic field, so Q and R are integers and the
p-adic factor Q*beta - R factors exactly through the conjugate of z.
Records carry exact valuations and certified real enclosures.

When the height of a record is too large to write the integers down, Q and R
are kept as residues mod p^K and every real quantity comes from a closed
form evaluated in ball arithmetic.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction

from .errors import (
    DegenerateDenominator,
    DomainError,
    EKError,
    InadmissibleInput,
    InertProjectionFailure,
    InsufficientPrecision,
)
from .exact import (
    QuadElem,
    RealBall,
    RealSpec,
    Undecided,
    adaptive,
    check_not_root,
)
from .ostrowski import ostrowski_find
from .padic import (
    EmbeddingData,
    PAdic,
    PAdicQuad,
    PAdicSpec,
    embed_field,
    padic_log,
)
from .units import (
    DEFAULT_COEFF_BOUND,
    DEFAULT_K_MAX,
    make_omega1_imaginary,
    normalize_zeta,
    real_unit_system,
)

# bits of relative accuracy demanded from real enclosures in records
REL_BITS = 60
# Q and R are written out exactly while their size stays below this many bits
EXACT_HEIGHT_BITS = 20_000
PADIC_SLACK = 8
# p-adic digits used to cross-check implicit records
CHECK_DIGITS = 64


# ---------------------------------------------------------------------------
# records
# ---------------------------------------------------------------------------

@dataclass
class ApproxRecord:
    """A witness pair with certified sizes.

    ``Q``/``R`` are None when the integers are too large to write down; then
    ``residues`` holds (Q mod p^K, R mod p^K, K) and the real quantities come
    from closed forms.
    """

    Q: int | None
    R: int | None
    n_params: tuple
    p: int
    real_part: RealBall
    padic_val: int | None  # None stands for +infinity
    height: RealBall
    residues: tuple | None = None
    extra: dict = field(default_factory=dict)

    @property
    def is_exact(self) -> bool:
        return self.Q is not None

    @property
    def padic_abs(self) -> Fraction:
        if self.padic_val is None:
            return Fraction(0)
        if self.padic_val >= 0:
            return Fraction(1, self.p**self.padic_val)
        return Fraction(self.p**-self.padic_val)

    @property
    def ek_plus_product(self) -> RealBall:
        if self.padic_val is None:
            return RealBall.from_int(0, self.height.prec)
        return self.height * self.real_part * _padic_factor_ball(self.p, self.padic_val, self.height.prec)

    @property
    def log_product(self) -> RealBall:
        return self.ek_plus_product * self.height.log()

    def to_dict(self) -> dict:
        prod = self.ek_plus_product
        out = {
            "q": self.Q,
            "r": self.R,
            "n_params": list(self.n_params),
            "real_lo": self.real_part.lo_str(),
            "real_hi": self.real_part.hi_str(),
            "vp": self.padic_val if self.padic_val is not None else "inf",
            "product_lo": prod.lo_str(),
            "product_hi": prod.hi_str(),
            "log_product_hi": self.log_product.hi_str(),
        }
        if self.residues is not None:
            qm, rm, K = self.residues
            out["q_mod"] = str(qm)
            out["r_mod"] = str(rm)
            out["modulus"] = f"{self.p}^{K}"
            out["height_lo"] = self.height.lo_str()
            out["height_hi"] = self.height.hi_str()
        return out


def _padic_factor_ball(p: int, v: int, prec: int) -> RealBall:
    if abs(v) < 4096:
        return RealBall.from_rational(Fraction(1, p**v) if v >= 0 else Fraction(p**-v), prec)
    return RealBall.from_int(p, prec + 64) ** (-v)


@dataclass(frozen=True)
class GammaChoice:
    gamma: QuadElem
    parity_i: int
    scale_G: int


def _relative_ball(fn, start: int, bits: int = REL_BITS) -> RealBall:
    """Adaptive evaluation until the ball has ``bits`` of relative accuracy."""

    def attempt(prec):
        b = fn(prec)
        if not b.relative_accuracy(bits):
            raise Undecided
        return b

    return adaptive(attempt, start=start)


def linear_form_ball(Q: int, R: int, alpha: RealSpec) -> RealBall:
    """Certified |Q*alpha - R| with relative accuracy (exact zero allowed)."""
    a = alpha.exact_rational()
    if a is not None:
        v = abs(Q * a - R)
        return RealBall.from_rational(v, 64 + v.numerator.bit_length())
    if Q == 0:
        return RealBall.from_int(abs(R), 64)
    bits = max(abs(Q).bit_length(), abs(R).bit_length())
    return _relative_ball(lambda prec: abs(alpha.ball(prec) * Q - R), bits + REL_BITS + 64)


def _height_ball(Q: int, R: int) -> RealBall:
    return RealBall.from_int(max(abs(Q), abs(R)), 64)


def padic_difference(Q, R, beta):
    """Q*beta - R for a p-adic beta."""
    return beta * Q - R


def valuation_or_none(x) -> int | None:
    return None if x.is_zero() else x.valuation()


def _integral_multiplier(*elems: QuadElem) -> int:
    """Least positive integer G making every G*x an algebraic integer."""
    bound = 1
    for x in elems:
        bound *= 2 * x.a.denominator * x.b.denominator
    for G in range(1, bound + 1):
        if all((x * G).is_integral() for x in elems):
            return G
    raise AssertionError("unreachable: the product of denominators always works")


def _beta_quad(beta) -> tuple[QuadElem, int | None]:
    if isinstance(beta, PAdicSpec):
        if beta.is_rational:
            raise DomainError("beta must be an irrational quadratic number here")
        return beta.quad, beta.branch
    return beta, None


# -- modular trace arithmetic -------------------------------------------------

def _coords_mod(x: QuadElem, M: int) -> tuple[int, int]:
    a = x.a.numerator * pow(x.a.denominator, -1, M) % M
    b = x.b.numerator * pow(x.b.denominator, -1, M) % M
    return a, b


def _mul_mod(u, v, d: int, M: int):
    return (u[0] * v[0] + d * u[1] * v[1]) % M, (u[0] * v[1] + u[1] * v[0]) % M


def _pow_mod(x: QuadElem, n: int, M: int):
    if n < 0:
        x, n = x.inverse(), -n
    d = x.field.d
    result, base = (1, 0), _coords_mod(x, M)
    while n:
        if n & 1:
            result = _mul_mod(result, base, d, M)
        n >>= 1
        if n:
            base = _mul_mod(base, base, d, M)
    return result


def trace_residues(gamma: QuadElem, beta: QuadElem, factors, p: int, K: int) -> tuple[int, int]:
    """(Tr(gamma z) mod p^K, Tr(beta gamma z) mod p^K) for z = prod x^e over ``factors``."""
    M = p**K
    d = gamma.field.d
    w = (1, 0)
    for x, e in factors:
        w = _mul_mod(w, _pow_mod(x, e, M), d, M)
    z = _mul_mod(_coords_mod(gamma, M), w, d, M)
    zb = _mul_mod(_coords_mod(gamma * beta, M), w, d, M)
    return 2 * z[0] % M, 2 * zb[0] % M


def _check_implicit(qm: int, rm: int, K: int, beta_p, expected: int) -> None:
    p = beta_p.p
    Qp = PAdic._scaled(p, K, 0, qm)
    Rp = PAdic._scaled(p, K, 0, rm)
    x = beta_p * Qp - Rp
    if x.is_zero():
        if expected < x.prec:
            raise EKError(f"residues vanish mod p^{x.prec} but the closed form gives v = {expected}")
    elif x.valuation() != expected:
        raise EKError(f"closed-form valuation {expected} disagrees with residues ({x.valuation()})")


def _implicit_record(n_params, p, closed, start_prec, vp, residues, extra=None) -> ApproxRecord:
    """Record from closed forms closed(prec) -> (Q ball, R ball, signed Q*alpha - R ball)."""

    def attempt(prec):
        Qb, Rb, Lb = closed(prec)
        h = abs(Qb).max(abs(Rb))
        real = abs(Lb)
        if not (h.relative_accuracy(REL_BITS) and real.relative_accuracy(REL_BITS)):
            raise Undecided
        return h, real

    h, real = adaptive(attempt, start=start_prec)
    return ApproxRecord(None, None, tuple(n_params), p, real, vp, h, residues, dict(extra or {}))


# -- complex balls for the imaginary closed form ------------------------------

def _map_ordered(fn, items, threads: int = 1) -> list:
    """fn over items, in input order; records are independent of each other."""
    if threads <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(threads) as pool:
        return list(pool.map(fn, items))


def _cmul(u, v):
    return u[0] * v[0] - u[1] * v[1], u[0] * v[1] + u[1] * v[0]


def _cpow(u, n: int):
    result, base = None, u
    while n:
        if n & 1:
            result = base if result is None else _cmul(result, base)
        n >>= 1
        if n:
            base = _cmul(base, base)
    return result


# ---------------------------------------------------------------------------
# imaginary case
# ---------------------------------------------------------------------------

@dataclass
class ImaginarySetup:
    alpha: RealSpec
    beta: QuadElem
    p: int
    embedding: EmbeddingData
    omega1: QuadElem
    t: int
    gamma: int
    offset: int  # v_p of (beta - conj beta) * conj(gamma) under the embedding

    @property
    def c0(self) -> int:
        return max(0, -self.offset)

    def theta(self, prec: int) -> RealBall:
        re, im = self.omega1.complex_embed(prec)
        return RealBall.atan2(im, re) / RealBall.pi(prec)

    def xi(self, prec: int) -> RealBall:
        re, im = self.beta.complex_embed(prec)
        a = self.alpha.ball(prec)
        # xi = 1/2 - arg(alpha - psi(beta)) / pi
        return Fraction(1, 2) - RealBall.atan2(-im, a - re) / RealBall.pi(prec)

    def height_bracket(self, prec: int = 128) -> tuple[RealBall, RealBall]:
        """Enclosures L, U with L <= max(|q_n|,|r_n|) / p^(n t) <= U for all n."""
        re, im = self.beta.complex_embed(prec)
        two_g = 2 * self.gamma
        lo = RealBall.from_int(two_g, prec) / (1 + ((abs(re) + 1) / abs(im)) ** 2).sqrt()
        mod = (re * re + im * im).sqrt()
        hi = mod.max(RealBall.from_int(1, prec)) * two_g
        return lo, hi

    def height_bits(self, n: int) -> float:
        return n * self.t * math.log2(self.p) + 4 + math.log2(self.gamma)

    def closed_forms(self, n: int, prec: int):
        """Balls for q_n, r_n and q_n*alpha - r_n from psi(omega1) = p^t e^(i pi theta)."""
        pt = RealBall.from_int(self.p, prec) ** self.t
        re, im = self.omega1.complex_embed(prec)
        c, s = _cpow((re / pt, im / pt), n)
        scale = RealBall.from_int(self.p, prec) ** (n * self.t) * (2 * self.gamma)
        a, b = self.beta.complex_embed(prec)
        x = self.alpha.ball(prec)
        Q = scale * c
        R = scale * (a * c - b * s)
        L = scale * ((x - a) * c + b * s)
        return Q, R, L

    def record(self, n: int) -> ApproxRecord:
        expected = self.offset + 2 * n * self.t
        if self.height_bits(n) > EXACT_HEIGHT_BITS:
            K = CHECK_DIGITS + abs(self.offset)
            qm, rm = trace_residues(self.beta.field(self.gamma), self.beta, [(self.omega1, n)], self.p, K)
            _check_implicit(qm, rm, K, self.embedding.with_precision(K + PADIC_SLACK).embed(self.beta), expected)
            start = 2 * n.bit_length() + REL_BITS + 64
            return _implicit_record((n,), self.p, lambda prec: self.closed_forms(n, prec), start,
                                    expected, (qm, rm, K))
        z = self.omega1**n * self.gamma
        Q = int(z.trace())
        R = int((self.beta * z).trace())
        K = expected + PADIC_SLACK
        x = padic_difference(Q, R, self.embedding.with_precision(K).embed(self.beta))
        vp = valuation_or_none(x)
        if vp != expected:
            raise EKError(f"closed-form valuation {expected} disagrees with direct value {vp}")
        return ApproxRecord(Q, R, (n,), self.p, linear_form_ball(Q, R, self.alpha), vp,
                            _height_ball(Q, R))


def imaginary_setup(alpha: RealSpec, beta, p: int, k_max: int = DEFAULT_K_MAX,
                    coeff_bound: int = DEFAULT_COEFF_BOUND) -> ImaginarySetup:
    b, branch = _beta_quad(beta)
    F = b.field
    if F.is_real or b.b == 0:
        raise DomainError("beta must generate an imaginary quadratic field")
    emb = embed_field(F, p, 2 * k_max + 8, branch)
    omega1, t = make_omega1_imaginary(F, emb, k_max, coeff_bound)
    gamma = _integral_multiplier(b)
    delta = (b - b.conj()) * gamma
    offset = emb.with_precision(64).embed(delta).valuation()
    return ImaginarySetup(alpha, b, p, emb, omega1, t, gamma, offset)


def thm1_imaginary(alpha: RealSpec, beta, p: int, count: int, k_max: int = DEFAULT_K_MAX,
                   coeff_bound: int = DEFAULT_COEFF_BOUND, threads: int = 1) -> list[ApproxRecord]:
    """Records (q_n, r_n) = (Tr(gamma omega1^n), Tr(beta gamma omega1^n)) for imaginary beta.

    n runs over the record minima of ||n theta - xi|| with n ||n theta - xi|| <= 3.
    """
    setup = imaginary_setup(alpha, beta, p, k_max, coeff_bound)
    ns = ostrowski_find(setup.theta, setup.xi, count=count)
    return _map_ordered(setup.record, ns, threads)


# ---------------------------------------------------------------------------
# real case
# ---------------------------------------------------------------------------

def _exact_sign_of_minpoly(alpha: RealSpec, beta: QuadElem) -> int | None:
    """Sign of (alpha - beta)(alpha - conj beta) when alpha is exact in Q or Q(beta)."""
    if alpha.kind == "rat":
        a = alpha.rational
        v = a * a - beta.trace() * a + beta.norm()
        if v == 0:
            raise InadmissibleInput("alpha is a root of the minimal polynomial of beta")
        return 1 if v > 0 else -1
    q = alpha.exact_quad()
    if q is not None and q.field == beta.field:
        v = (q - beta) * (q - beta.conj())
        if v.is_zero():
            raise InadmissibleInput("alpha is a root of the minimal polynomial of beta")
        return v.sign()
    return None


def choose_gamma_sign(alpha: RealSpec, beta) -> GammaChoice:
    """gamma with conj(gamma) = (-1)^i gamma so that the two terms of Q*alpha - R cancel."""
    b, _ = _beta_quad(beta)
    s = _exact_sign_of_minpoly(alpha, b)
    if s is None:
        s = adaptive(lambda prec: check_not_root(alpha, b, prec).require_sign())
    i = 0 if s < 0 else 1
    F = b.field
    base = F(1, 0) if i == 0 else F(0, 1)
    G = _integral_multiplier(base, base * b)
    return GammaChoice(base * G, i, G)


@dataclass
class RealSetup:
    alpha: RealSpec
    beta: QuadElem
    p: int
    embedding: EmbeddingData
    omega1: QuadElem
    omega2: QuadElem
    t: int
    gamma: GammaChoice
    offset: int

    @property
    def c0(self) -> int:
        return max(0, -self.offset)

    def logs(self, prec: int):
        L1 = self.omega1.embed(prec).log()
        L2 = self.omega2.embed(prec).log() - RealBall.from_int(self.p, prec).log() * self.t
        a = self.alpha.ball(prec)
        T = abs(a - self.beta.embed(prec, -1)).log() - abs(a - self.beta.embed(prec)).log()
        return L1, L2, T

    def theta(self, prec: int) -> RealBall:
        L1, L2, _ = self.logs(prec)
        return L2 / L1

    def xi(self, prec: int) -> RealBall:
        L1, _, T = self.logs(prec)
        return T / (L1 * 2)

    def nearest_n1(self, n2: int) -> int:
        def attempt(prec):
            L1, L2, T = self.logs(prec + n2.bit_length())
            return ((T / 2 - L2 * n2) / L1 + Fraction(1, 2)).floor()

        return adaptive(attempt, start=128)

    def bracket_value(self, n1: int, n2: int, prec: int = 128) -> RealBall:
        """n1*L1 + n2*L2 - T/2; the construction keeps it in [-1/2, 1/2]."""
        L1, L2, T = self.logs(prec + 2 * (abs(n1) + abs(n2)).bit_length())
        return L1 * n1 + L2 * n2 - T / 2

    def bracket_ok(self, n1: int, n2: int) -> bool:
        def attempt(prec):
            v = self.bracket_value(n1, n2, prec)
            above, below = v.le(Fraction(1, 2)), (-v).le(Fraction(1, 2))
            if above is None or below is None:
                raise Undecided
            return above and below

        return adaptive(attempt, start=128)

    def height_bracket(self, prec: int = 128) -> tuple[RealBall, RealBall]:
        """L, U with L <= max(|q|,|r|) / p^(n2 t) <= U for every bracketed (n1, n2)."""
        a = self.alpha.ball(prec)
        bp, bm = self.beta.embed(prec), self.beta.embed(prec, -1)
        rho = (abs(a - bm) / abs(a - bp)).sqrt()
        e = RealBall.from_int(1, prec).exp().sqrt()
        g = self.gamma.gamma.embed(prec)
        one = RealBall.from_int(1, prec)
        lo = g * rho / e * abs(bp - bm) / (abs(bm) + 1)
        hi = g * one.max(abs(bp)).max(abs(bm)) * (rho + one / rho) * e
        return lo, hi

    def height_bits(self, n1: int, n2: int) -> float:
        return n2 * self.t * math.log2(self.p) + 8 + math.log2(float(self.gamma.scale_G) + 2)

    def closed_forms(self, n1: int, n2: int, prec: int):
        z = self.omega1.embed(prec) ** n1 * self.omega2.embed(prec) ** n2
        zc = RealBall.from_int(self.p, prec) ** (2 * n2 * self.t) / z
        g = self.gamma.gamma.embed(prec)
        sgn = -1 if self.gamma.parity_i else 1
        bp, bm = self.beta.embed(prec), self.beta.embed(prec, -1)
        x = self.alpha.ball(prec)
        Q = g * (z + zc * sgn)
        R = g * (bp * z + bm * zc * sgn)
        L = g * (z * (x - bp) + zc * (x - bm) * sgn)
        return Q, R, L

    def record(self, n1: int, n2: int) -> ApproxRecord:
        expected = self.offset + 2 * n2 * self.t
        factors = [(self.omega1, n1), (self.omega2, n2)]
        if self.height_bits(n1, n2) > EXACT_HEIGHT_BITS:
            K = CHECK_DIGITS + abs(self.offset)
            qm, rm = trace_residues(self.gamma.gamma, self.beta, factors, self.p, K)
            _check_implicit(qm, rm, K, self.embedding.with_precision(K + PADIC_SLACK).embed(self.beta), expected)
            start = 2 * (abs(n1) + n2).bit_length() + REL_BITS + 64
            return _implicit_record((n1, n2), self.p, lambda prec: self.closed_forms(n1, n2, prec),
                                    start, expected, (qm, rm, K))
        z = self.omega1**n1 * self.omega2**n2 * self.gamma.gamma
        Q = int(z.trace())
        R = int((self.beta * z).trace())
        K = expected + PADIC_SLACK
        vp = valuation_or_none(padic_difference(Q, R, self.embedding.with_precision(K).embed(self.beta)))
        if vp != expected:
            raise EKError(f"closed-form valuation {expected} disagrees with direct value {vp}")
        return ApproxRecord(Q, R, (n1, n2), self.p, linear_form_ball(Q, R, self.alpha), vp,
                            _height_ball(Q, R))


def real_setup(alpha: RealSpec, beta, p: int, k_max: int = DEFAULT_K_MAX,
               coeff_bound: int = DEFAULT_COEFF_BOUND) -> RealSetup:
    b, branch = _beta_quad(beta)
    F = b.field
    if not F.is_real or b.b == 0:
        raise DomainError("beta must generate a real quadratic field")
    gamma = choose_gamma_sign(alpha, b)
    units = real_unit_system(F.d, p, branch, k_max, coeff_bound)
    emb = embed_field(F, p, 2 * k_max + 8, branch)
    delta = (b - b.conj()) * gamma.gamma.conj()
    offset = emb.with_precision(64).embed(delta).valuation()
    return RealSetup(alpha, b, p, emb, units.omega1, units.omega2, units.t, gamma, offset)


def thm1_real(alpha: RealSpec, beta, p: int, count: int | None = None, epsilon=None,
              k_max: int = DEFAULT_K_MAX, coeff_bound: int = DEFAULT_COEFF_BOUND,
              threads: int = 1) -> list[ApproxRecord]:
    """Records for real quadratic beta from z = omega1^n1 * omega2^n2.

    n2 comes from the inhomogeneous approximation of T/(2 L1) by multiples of
    L2/L1 and n1 is the matching nearest integer; candidates outside the
    bracket |n1 L1 + n2 L2 - T/2| <= 1/2 are skipped.
    """
    setup = real_setup(alpha, beta, p, k_max, coeff_bound)
    if epsilon is not None:
        n2 = ostrowski_find(setup.theta, setup.xi, epsilon=epsilon)
        pairs = [(setup.nearest_n1(n2), n2)]
    else:
        if count is None:
            raise ValueError("give count or epsilon")
        pairs = []
        ask = count
        while len(pairs) < count:
            chosen = ostrowski_find(setup.theta, setup.xi, count=ask)
            pairs = [(n1, n2) for n2 in chosen for n1 in [setup.nearest_n1(n2)]
                     if setup.bracket_ok(n1, n2)][:count]
            ask *= 2
    return _map_ordered(lambda pair: setup.record(*pair), pairs, threads)


# ---------------------------------------------------------------------------
# unit-power construction for quadratic alpha
# ---------------------------------------------------------------------------

def _as_padic_like(x, like):
    if isinstance(like, PAdicQuad) and isinstance(x, PAdic):
        return PAdicQuad(like.d, x, PAdic.zero(x.p, 0, exact=True))
    return x


def _lambda(beta_p, phi_alpha, phi_alpha_c, phi_gamma, phi_gamma_c):
    num = (phi_alpha_c * -1 + beta_p) * phi_gamma_c
    den = (phi_alpha * -1 + beta_p) * phi_gamma
    return -(num / den)


def _positive(gamma: QuadElem) -> QuadElem:
    return gamma if gamma.sign() > 0 else -gamma


def lemma31_gamma(alpha: QuadElem, embedding: EmbeddingData, beta_p, zeta: QuadElem,
                  beta_rational: Fraction | None = None, max_digits: int = 400) -> GammaChoice:
    """gamma in Q(alpha), gamma and gamma*alpha integral, gamma > 0, with |lambda - 1|_p < |zeta - 1|_p.

    lambda = -(beta - conj phi(alpha)) conj phi(gamma) / ((beta - phi(alpha)) phi(gamma)).
    For rational beta the root t1 of the homography is rational and gives
    lambda = 1 exactly; otherwise x/y approximates t1 p-adically and the
    approximation is refined until the inequality is verified.
    """
    F = alpha.field
    tr, tr2 = alpha.trace(), (alpha * alpha).trace()
    vz = (embedding.embed(zeta) - 1).valuation()
    if beta_rational is not None:
        if 2 * beta_rational == tr:
            return GammaChoice(F(1, 0), 0, 1)
        t1 = (-beta_rational * tr + tr2) / (2 * beta_rational - tr)
        g0 = alpha + t1
        G = _integral_multiplier(g0, g0 * alpha)
        return GammaChoice(_positive(g0 * G), 0, G)
    den = beta_p * 2 - tr
    if den.is_zero():
        raise DegenerateDenominator("2*beta - Tr(alpha) vanishes to working precision")
    t1 = (beta_p * (-tr) + tr2) / den
    p = embedding.p
    phi_a, phi_ac = embedding.embed(alpha), embedding.embed_conj(alpha)
    bp = _as_padic_like(beta_p, phi_a)
    for M in range(max(1, vz + 1), max_digits):
        if t1.is_zero() or t1.valuation() >= 0:
            y = 1
            x = t1.residue(M) if not t1.is_zero() else 0
        else:
            y = p ** (-t1.valuation())
            x = (t1 * y).residue(M)
        if x > p**M // 2:
            x -= p**M
        g0 = alpha * y + x
        if g0.is_zero():
            continue
        lam = _lambda(bp, phi_a, phi_ac, embedding.embed(g0), embedding.embed_conj(g0))
        diff = lam - 1
        if diff.is_zero() and diff.prec > vz or not diff.is_zero() and diff.valuation() > vz:
            G = _integral_multiplier(g0, g0 * alpha)
            return GammaChoice(_positive(g0 * G), 0, G)
    raise InsufficientPrecision("could not verify |lambda - 1|_p < |zeta - 1|_p at the working precision")


@dataclass
class UnitPowerSetup:
    alpha: QuadElem
    alpha_spec: RealSpec
    beta: PAdicSpec
    p: int
    embedding: EmbeddingData
    zeta: QuadElem
    nu: int
    gamma: GammaChoice
    work: int  # p-adic working precision
    beta_p: object
    lam: object
    log_zeta_val: int
    offset: int  # v_p((beta - phi alpha) phi gamma)
    c: PAdic
    c_sqrt_coord_val: int | None = None  # inert case: valuation of the sqrt(d) coordinate

    @property
    def splitting(self) -> str:
        return self.embedding.splitting

    def phi(self, x: QuadElem):
        return self.embedding.embed(x)

    def n0(self) -> int:
        """Least n >= 1 with |tau gamma| zeta^(-2n) <= psi(gamma)/2, which forces q_n > 0."""

        def attempt(prec):
            g, gc = self.gamma.gamma.embed(prec), abs(self.gamma.gamma.embed(prec, -1))
            z = self.zeta.embed(prec)
            n = 1
            while True:
                ok = (gc / z ** (2 * n)).le(g / 2)
                if ok is None:
                    raise Undecided
                if ok:
                    return n
                n += 1

        return adaptive(attempt, start=128)

    def bracket(self, prec: int = 128) -> tuple[RealBall, RealBall]:
        """[L, U] containing q_n |q_n alpha - r_n| for every n >= n0."""
        a = self.alpha
        base = abs((a - a.conj()).embed(prec)) * abs(self.gamma.gamma.embed(prec, -1)) * self.gamma.gamma.embed(prec)
        return base / 2, base * Fraction(3, 2)

    def residue_class(self, N: int) -> tuple[int, int]:
        """(n mod p^M, M) with M >= N chosen so that v_p(q_n beta - r_n) >= N."""
        M = max(N, N - self.offset - self.log_zeta_val)
        if self.c.prec < M:
            raise InsufficientPrecision(f"c known to {self.c.prec} digits, {M} needed")
        return self.c.residue(M), M

    def index_for(self, N: int) -> int:
        res, M = self.residue_class(N)
        mod = self.p**M
        lo = max(1, self.n0())
        if res >= lo:
            return res
        return res + ((lo - res + mod - 1) // mod) * mod

    def height_bits(self, n: int) -> float:
        return n * math.log2(self.zeta.embed(64).to_float()) + 8 + math.log2(self.gamma.gamma.embed(64).to_float() + 2)

    def exact_valuation(self, n: int) -> int:
        """v_p(q_n beta - r_n) = offset + v_p(phi(zeta)^(2n) - lambda), raising precision as needed."""
        setup = self
        while True:
            x = setup.phi(self.zeta) ** (2 * n) - setup.lam
            if not x.is_zero():
                return self.offset + x.valuation()
            setup = _unit_power_setup(self.alpha, self.alpha_spec, self.beta, self.p, 2 * setup.work,
                                      self.embedding.branch, self.gamma, (self.zeta, self.nu))

    def closed_forms(self, n: int, prec: int):
        g, gc = self.gamma.gamma.embed(prec), self.gamma.gamma.embed(prec, -1)
        ag = self.alpha * self.gamma.gamma
        agp, agc = ag.embed(prec), ag.embed(prec, -1)
        z = self.zeta.embed(prec) ** n
        Q = g * z + gc / z
        R = agp * z + agc / z
        L = (self.alpha - self.alpha.conj()).embed(prec) * gc / z
        return Q, R, L

    def record(self, n: int, N: int | None = None) -> ApproxRecord:
        vp = self.exact_valuation(n)
        extra = {"N": N} if N is not None else {}
        params = (n, N) if N is not None else (n,)
        if self.height_bits(n) > EXACT_HEIGHT_BITS:
            K = max(CHECK_DIGITS, (N or 0) + PADIC_SLACK) + abs(self.offset)
            qm, rm = trace_residues(self.gamma.gamma, self.alpha, [(self.zeta, n)], self.p, K)
            bp = self.beta.to_padic(self.p, K + PADIC_SLACK)
            _check_implicit(qm, rm, K, bp, vp)
            start = 2 * n.bit_length() + REL_BITS + 64
            return _implicit_record(params, self.p, lambda prec: self.closed_forms(n, prec), start, vp,
                                    (qm, rm, K), extra)
        z = self.zeta**n * self.gamma.gamma
        Q = int(z.trace())
        R = int((self.alpha * z).trace())
        direct = valuation_or_none(padic_difference(Q, R, self.beta.to_padic(self.p, max(vp + PADIC_SLACK, 1))))
        if direct != vp:
            raise EKError(f"closed-form valuation {vp} disagrees with direct value {direct}")
        return ApproxRecord(Q, R, params, self.p, linear_form_ball(Q, R, self.alpha_spec), vp,
                            _height_ball(Q, R), extra=extra)


def _check_beta_not_root(alpha: QuadElem, beta: PAdicSpec, beta_p) -> None:
    if beta.is_rational:
        return  # alpha is irrational, so its minimal polynomial has no rational root
    if beta.quad.field == alpha.field and beta.quad in (alpha, alpha.conj()):
        raise InadmissibleInput("beta is a root of the minimal polynomial of alpha")
    f = beta_p * beta_p - beta_p * alpha.trace() + alpha.norm()
    if f.is_zero():
        raise InadmissibleInput("beta is a root of the minimal polynomial of alpha to working precision")


def _unit_power_setup(alpha: QuadElem, alpha_spec: RealSpec, beta: PAdicSpec, p: int, work: int,
                      branch: int | None, gamma: GammaChoice | None = None,
                      zeta_nu: tuple | None = None) -> UnitPowerSetup:
    F = alpha.field
    emb = embed_field(F, p, work, branch)
    beta_p = beta.to_padic(p, work)
    _check_beta_not_root(alpha, beta, beta_p)
    zeta, nu = zeta_nu if zeta_nu is not None else normalize_zeta(F.d, p, work, branch)
    if gamma is None:
        gamma = lemma31_gamma(alpha, emb, beta_p, zeta, beta.rational if beta.is_rational else None)
    phi_a, phi_ac = emb.embed(alpha), emb.embed_conj(alpha)
    bp = _as_padic_like(beta_p, phi_a)
    lam = _lambda(bp, phi_a, phi_ac, emb.embed(gamma.gamma), emb.embed_conj(gamma.gamma))
    offset = ((phi_a * -1 + bp) * emb.embed(gamma.gamma)).valuation()
    log_zeta = padic_log(emb.embed(zeta))
    log_lam = padic_log(lam)
    c = log_lam / (log_zeta * 2)
    sqrt_val = None
    if isinstance(c, PAdicQuad):
        sqrt_val = None if c.x1.is_zero() else c.x1.valuation()
        c = c.x0
    return UnitPowerSetup(alpha, alpha_spec, beta, p, emb, zeta, nu, gamma, work, beta_p, lam,
                          log_zeta.valuation(), offset, c, sqrt_val)


def unit_power_setup(alpha: RealSpec, beta: PAdicSpec, p: int, N_max: int = 16,
                     branch: int | None = None) -> UnitPowerSetup:
    a = alpha.exact_quad()
    if a is None or not a.field.is_real:
        raise DomainError("alpha must be a real quadratic irrational")
    work = 2 * N_max + 40
    setup = _unit_power_setup(a, alpha, beta, p, work, branch)
    if setup.c_sqrt_coord_val is not None and setup.c_sqrt_coord_val < N_max - 2:
        raise InertProjectionFailure(
            f"sqrt-coordinate of the exponent has valuation {setup.c_sqrt_coord_val} < {N_max - 2}")
    return setup


def thm2_construct(alpha: RealSpec, beta: PAdicSpec, p: int, N_list, branch: int | None = None,
                   threads: int = 1) -> list[ApproxRecord]:
    """Records (q_n, r_n) = (Tr(gamma zeta^n), Tr(alpha gamma zeta^n)) with v_p(q_n beta - r_n) >= N.

    For each N the index n is the least member of the residue class of
    log(lambda) / (2 log zeta) mod p^N that is at least max(1, n0).
    """
    N_list = sorted(set(int(N) for N in N_list))
    if not N_list or N_list[0] < 1:
        raise DomainError("N values must be positive")
    setup = unit_power_setup(alpha, beta, p, N_list[-1], branch)
    return _map_ordered(lambda N: setup.record(setup.index_for(N), N), N_list, threads)
