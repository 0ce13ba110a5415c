"""Independent evaluation of the conjecture products, record scans and lower bounds.

Everything here is computed from (q, r) directly, without reference to how a
pair was constructed, so it serves as the oracle for the constructions.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import EKError, InvalidPair, NoPAdicRoots, NoRealRoots, NotIrreducible
from .exact import (
    QuadElem,
    QuadField,
    RealBall,
    RealSpec,
    abs_p,
    is_prime,
    v_int,
)
from .padic import PAdicSpec, embed_field, legendre

VARIANTS = ("EK", "EK+", "M", "MU1", "MU2")
BALL_PREC = 96
# p-adic digits tried first when |q beta - r|_p is evaluated
START_DIGITS = 32


# ---------------------------------------------------------------------------
# single products
# ---------------------------------------------------------------------------

def padic_abs_difference(q: int, r: int, beta: PAdicSpec, p: int) -> Fraction:
    """Exact |q beta - r|_p; precision is raised until the difference is nonzero."""
    if beta.is_rational:
        return abs_p(q * beta.rational - r, p)
    N = START_DIGITS
    while True:
        x = beta.to_padic(p, N) * q - r
        if not x.is_zero():
            v = x.valuation()
            return Fraction(1, p**v) if v >= 0 else Fraction(p**-v)
        N *= 2


def real_abs_difference(q: int, r: int, alpha: RealSpec, prec: int = BALL_PREC) -> RealBall:
    """Ball for |q alpha - r|; exact when alpha is rational."""
    a = alpha.exact_rational()
    if a is not None:
        v = abs(q * a - r)
        return RealBall.from_rational(v, prec + v.numerator.bit_length())
    bits = max(abs(q).bit_length(), abs(r).bit_length())
    return abs(alpha.ball(prec + bits) * q - r)


def _check_pair(q: int, r: int, variant: str) -> None:
    if variant not in VARIANTS:
        raise EKError(f"unknown variant {variant!r}; choose from {', '.join(VARIANTS)}")
    if q == 0 and r == 0:
        raise InvalidPair("(q, r) = (0, 0) is excluded")
    if variant in ("EK", "MU1", "MU2") and q * r == 0:
        raise InvalidPair(f"{variant} needs q*r != 0")
    if variant == "M" and r == 0:
        raise InvalidPair("M needs r != 0")
    if variant == "MU1" and abs(q) > abs(r):
        raise InvalidPair("MU1 is restricted to |q| <= |r|")
    if variant == "MU2" and abs(r) > abs(q):
        raise InvalidPair("MU2 is restricted to |r| <= |q|")


def ek_product(q: int, r: int, alpha: RealSpec | None, beta: PAdicSpec, p: int,
               variant: str = "EK+", prec: int = BALL_PREC) -> RealBall:
    """The product of the chosen conjecture at (q, r).

    EK:  |q| |q alpha - r| |q beta - r|_p
    EK+: max(|q|, |r|) |q alpha - r| |q beta - r|_p
    M:   |r| |r|_p |r alpha - q|             (beta unused)
    MU1, MU2: |q r| |q beta - r|_p          (alpha unused)
    """
    _check_pair(q, r, variant)
    if variant == "M":
        return real_abs_difference(r, q, alpha, prec) * (abs(r) * abs_p(r, p))
    pa = padic_abs_difference(q, r, beta, p)
    if variant in ("MU1", "MU2"):
        return RealBall.from_rational(abs(q * r) * pa, prec)
    size = abs(q) if variant == "EK" else max(abs(q), abs(r))
    return real_abs_difference(q, r, alpha, prec) * (size * pa)


def exact_ek_plus(q: int, r: int, alpha: QuadElem, beta: PAdicSpec, p: int) -> QuadElem:
    """EK+ product as an exact element of Q(alpha), for real quadratic alpha."""
    diff = alpha * q - r
    if not diff.is_zero() and diff.sign() < 0:
        diff = -diff
    return diff * (max(abs(q), abs(r)) * padic_abs_difference(q, r, beta, p))


# -- conversion between the mixed and the two-sided products ------------------

def m_pair_to_ek(q: int, r: int) -> tuple[int, int]:
    """An M-pair (q, r) for alpha is the EK pair (q, r) for (1/alpha, 0)."""
    return q, r


def m_to_ek_factor(q: int, r: int, alpha: RealSpec, prec: int = BALL_PREC) -> RealBall:
    """EK(q, r; 1/alpha, 0) = factor * M(q, r; alpha) with factor = |q| / (|alpha| |r|)."""
    return RealBall.from_int(abs(q), prec) / (abs(alpha.ball(prec)) * abs(r))


def reciprocal_spec(alpha: RealSpec) -> RealSpec:
    """1/alpha as an exact input when alpha is exact."""
    a = alpha.exact_rational()
    if a is not None:
        if a == 0:
            raise EKError("alpha = 0 has no reciprocal")
        return RealSpec.rat(1 / a)
    q = alpha.exact_quad()
    if q is not None:
        return RealSpec.from_quad(q.inverse())
    raise EKError("reciprocal needs an exact alpha")


# ---------------------------------------------------------------------------
# lower bound for conjugate pairs
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BoundCertificate:
    f: tuple[int, int, int]
    p: int
    alpha: QuadElem  # larger real root
    beta: PAdicSpec  # p-adic root
    c0: RealBall
    c0_exact: QuadElem
    components: tuple  # |a|, |a|_p, |alpha'| + 1, max(1, |beta'|_p)

    def to_dict(self) -> dict:
        a_abs, a_p, conj_ball, bp = self.components
        return {
            "f": list(self.f),
            "p": self.p,
            "alpha": f"quad:d={self.alpha.field.d},a={self.alpha.a},b={self.alpha.b}",
            "beta": str(self.beta),
            "abs_a": a_abs,
            "abs_a_p": str(a_p),
            "conj_alpha_plus_1_lo": conj_ball.lo_str(),
            "conj_alpha_plus_1_hi": conj_ball.hi_str(),
            "max_1_abs_conj_beta_p": str(bp),
            "c0_exact": str(self.c0_exact),
            "c0_lo": self.c0.lo_str(),
            "c0_hi": self.c0.hi_str(),
        }


def _squarefree_part(n: int) -> tuple[int, int]:
    """n = s^2 * m with m squarefree; returns (s, m)."""
    sign = -1 if n < 0 else 1
    n = abs(n)
    s, m = 1, 1
    k = 2
    while k * k <= n:
        while n % (k * k) == 0:
            n //= k * k
            s *= k
        if n % k == 0:
            n //= k
            m *= k
        k += 1
    return s, sign * m * n


def conjugate_lower_bound(f, p: int, prec: int = BALL_PREC) -> BoundCertificate:
    """Certificate c0 <= max(|q|,|r|) |q alpha - r| |q beta - r|_p for all q r != 0.

    alpha, beta are roots of f = aX^2 + bX + c in R and Q_p; with alpha',
    beta' the other roots, c0 = 1/(|a| |a|_p (|alpha'| + 1) max(1, |beta'|_p)).
    """
    a, b, c = (int(x) for x in f)
    if a == 0:
        raise NotIrreducible("f must have degree 2")
    if not is_prime(p) or p == 2:
        raise EKError(f"p={p} must be an odd prime")
    disc = b * b - 4 * a * c
    if disc < 0:
        raise NoRealRoots(f"discriminant {disc} < 0")
    if math.isqrt(disc) ** 2 == disc:
        raise NotIrreducible(f"discriminant {disc} is a square")
    if disc % p == 0:
        raise NoPAdicRoots(f"p={p} divides the discriminant {disc}")
    if legendre(disc, p) != 1:
        raise NoPAdicRoots(f"discriminant {disc} is not a square mod {p}")
    s, m = _squarefree_part(disc)
    F = QuadField(m)
    # roots (-b +- s sqrt m) / 2a; alpha is the larger one
    sgn = 1 if a > 0 else -1
    alpha = F(Fraction(-b, 2 * a), Fraction(sgn * s, 2 * a))
    alpha_c = alpha.conj()
    # branch: sqrt(m) with residue in (0, p/2)
    root = embed_field(F, p, 4).embed(F.sqrt_d).residue(1)
    branch = root if root < p - root else p - root
    emb = embed_field(F, p, 64, branch)
    beta = PAdicSpec(quad=alpha, branch=branch)
    bc = emb.embed_conj(alpha)
    bc_abs = Fraction(1) if bc.is_zero() or bc.valuation() >= 0 else Fraction(p**-bc.valuation())
    a_p = abs_p(a, p)
    conj_plus = (alpha_c if alpha_c.sign() > 0 else -alpha_c) + 1
    c0_exact = (conj_plus * (abs(a) * a_p * bc_abs)).inverse()
    return BoundCertificate((a, b, c), p, alpha, beta, c0_exact.embed(prec), c0_exact,
                            (abs(a), a_p, conj_plus.embed(prec), bc_abs))


# ---------------------------------------------------------------------------
# record scans
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ScanRecord:
    q: int
    r: int
    product: RealBall
    strategy: str

    def to_row(self) -> tuple[int, int, str, str]:
        return self.q, self.r, self.product.lo_str(), self.product.hi_str()


STRATEGIES = ("exhaustive", "residue_window")
# float64 relative rounding slack, far above the true error of the kernel
FLOAT_SLACK = 2.0**-40


def r_bound(q: int, alpha_abs_hi: float, p: int, k_max: int) -> int:
    """|r| range of the exhaustive scan: ceil((|alpha| + 1) q) + p^k_max."""
    return math.ceil((alpha_abs_hi + 1) * q) + p**k_max


class _Kernel:
    """Float screening of |q alpha - r| |q beta - r|_p max(|q|,|r|) with a certified error bound.

    Only pairs whose float lower estimate can be at most a threshold survive;
    survivors are recomputed exactly by the caller.
    """

    def __init__(self, alpha: RealSpec, beta: PAdicSpec, p: int):
        self.alpha, self.beta, self.p = alpha, beta, p
        ball = alpha.ball(128)
        self.alpha_f = ball.to_float()
        self.alpha_rad = float(ball.hi_float() - ball.lo_float()) + abs(self.alpha_f) * 2.0**-52
        if alpha.kind == "dec":
            self.alpha_rad += float(alpha.error)
        # q beta - r = p^-m (q u - p^m r) with u in Z_p
        self.K = max(1, int(40 / math.log2(p)))
        if beta.is_rational:
            vb = 0 if beta.rational == 0 else v_int(beta.rational.numerator, p) - v_int(beta.rational.denominator, p)
        else:
            x = beta.to_padic(p, START_DIGITS)
            vb = x.valuation()
        self.m = max(0, -vb)
        self.mod = p**self.K
        scaled = beta.to_padic(p, self.K + self.m + 2) * p**self.m if not beta.is_rational else None
        if beta.is_rational:
            br = beta.rational * p**self.m
            self.u = br.numerator * pow(br.denominator, -1, self.mod) % self.mod
        else:
            self.u = scaled.residue(self.K)
        self.pm = p**self.m % self.mod

    def lower_estimates(self, q: int, r: np.ndarray) -> np.ndarray:
        """Float lower bounds of the EK+ product (np.inf never appears; saturated valuations give 0)."""
        p = self.p
        x = (q * self.u - (r % self.mod) * self.pm) % self.mod
        v = np.zeros(r.shape, dtype=np.int64)
        y = x.copy()
        for _ in range(self.K):
            hit = (y % p == 0)
            if not hit.any():
                break
            v += hit
            y = np.where(hit, y // p, y)
        real = np.abs(q * self.alpha_f - r.astype(np.float64))
        err = (q * abs(self.alpha_f) + np.abs(r) + 1.0) * 2.0**-50 + q * self.alpha_rad
        size = np.maximum(abs(q), np.abs(r)).astype(np.float64)
        pf = np.power(float(p), (self.m - v).astype(np.float64))
        lo = size * np.maximum(real - err, 0.0) * pf * (1 - FLOAT_SLACK)
        # v == K means "at least K": the true product can be anything below the estimate
        return np.where(v >= self.K, 0.0, lo)


def _window_candidates(q: int, kernel: _Kernel, bound: int, k_max: int) -> np.ndarray:
    """r values of the residue-window strategy for one q, within |r| <= bound.

    For k < k_max: the r = q beta mod p^k nearest to q alpha and its two
    neighbours in the class; for k = k_max every class member in range.
    """
    p, qa = kernel.p, q * kernel.alpha_f
    out = []
    for k in range(k_max + 1):
        mod = p**k
        if k == 0:
            c = 0
        else:
            # class of q beta mod p^k; empty when v(q beta) < 0 (then v(q beta - r) < 0 for all r)
            if kernel.m and v_int(q, p) < kernel.m:
                break
            qq = q // p**kernel.m if kernel.m else q
            if k > kernel.K:
                raise EKError("k_max exceeds the kernel's p-adic precision")
            c = qq * kernel.u % mod
        if k < k_max:
            base = c + mod * round((qa - c) / mod)
            out.extend(base + j * mod for j in (-2, -1, 0, 1, 2))
        else:
            lo = c + mod * math.ceil((-bound - c) / mod)
            out.extend(range(lo, bound + 1, mod))
    arr = np.unique(np.array([r for r in out if r != 0 and abs(r) <= bound], dtype=np.int64))
    return arr


def _screen(q: int, kernel: _Kernel, strategy: str, k_max: int, alpha_abs: float,
            threshold: float) -> list[int]:
    """r values (in chain order) whose float lower estimate is <= threshold."""
    bound = r_bound(q, alpha_abs, kernel.p, k_max)
    if strategy == "exhaustive":
        r = np.arange(-bound, bound + 1, dtype=np.int64)
        r = r[r != 0]
    else:
        r = _window_candidates(q, kernel, bound, k_max)
    if r.size == 0:
        return []
    keep = r[kernel.lower_estimates(q, r) <= threshold]
    return sorted(keep.tolist(), key=lambda x: (abs(x), x))


def scan_records(alpha: RealSpec, beta: PAdicSpec, p: int, q_max: int, k_max: int = 2,
                 strategy: str = "exhaustive", threads: int = 1) -> list[ScanRecord]:
    """Descending chain of EK+ products over 1 <= q <= q_max, r != 0.

    Pairs are visited by ascending q, then |r|, then r; the first record has
    product at most 1 and each later one has a strictly smaller upper bound.
    """
    if strategy not in STRATEGIES:
        raise EKError(f"unknown strategy {strategy!r}")
    if q_max < 1:
        raise EKError("q_max must be positive")
    kernel = _Kernel(alpha, beta, p)
    alpha_abs = abs(alpha.ball(64)).hi_float() + kernel.alpha_rad

    def screen(q):
        return _screen(q, kernel, strategy, k_max, alpha_abs, 1.0)

    qs = range(1, q_max + 1)
    if threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            candidates = list(pool.map(screen, qs, chunksize=16))
    else:
        candidates = [screen(q) for q in qs]
    chain: list[ScanRecord] = []
    best_hi = None
    for q, rs in zip(qs, candidates):
        if not rs:
            continue
        lows = kernel.lower_estimates(q, np.array(rs, dtype=np.int64))
        for r, lo in zip(rs, lows):
            if best_hi is not None and lo >= best_hi:
                continue
            prod = ek_product(q, r, alpha, beta, p, "EK+")
            if chain and not prod.upper < chain[-1].product.upper:
                continue
            if not chain and prod.upper > 1:
                continue
            chain.append(ScanRecord(q, r, prod, strategy))
            best_hi = prod.hi_float()
    return chain


@dataclass(frozen=True)
class LowerBoundCheck:
    ok: bool
    pairs: int
    exact_checks: int
    worst: tuple | None  # (q, r, product ball) of the smallest product checked exactly


def check_lower_bound(alpha: RealSpec, beta: PAdicSpec, p: int, q_max: int, bound: BoundCertificate,
                      k_max: int = 2) -> LowerBoundCheck:
    """Verify lower(product) >= lower(c0) for every pair of the exhaustive window.

    Pairs the float screen cannot clear are recomputed as balls; when a ball
    comparison is inconclusive and alpha is quadratic the comparison is made
    exactly in Q(alpha).
    """
    kernel = _Kernel(alpha, beta, p)
    alpha_abs = abs(alpha.ball(64)).hi_float() + kernel.alpha_rad
    c0_lo = bound.c0.lower
    screen_at = bound.c0.hi_float() * (1 + 2.0**-30)
    aq = alpha.exact_quad()
    pairs = exact = 0
    ok = True
    worst = None
    for q in range(1, q_max + 1):
        b = r_bound(q, alpha_abs, p, k_max)
        pairs += 2 * b
        for r in _screen(q, kernel, "exhaustive", k_max, alpha_abs, screen_at):
            exact += 1
            prod = ek_product(q, r, alpha, beta, p, "EK+")
            if worst is None or prod.upper < worst[2].upper:
                worst = (q, r, prod)
            if prod.lower >= c0_lo:
                continue
            if aq is not None and (exact_ek_plus(q, r, aq, beta, p) - bound.c0_exact).sign() >= 0:
                continue
            ok = False
    return LowerBoundCheck(ok, pairs, exact, worst)
