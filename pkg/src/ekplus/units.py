"""Units and p-units of quadratic fields.

Fundamental units come from the continued fraction of the integral-basis
generator.  p-units are found by enumerating solutions of the norm equation
|N(eta)| = p^k and keeping one that is a p-adic unit under the chosen
embedding.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

from .errors import InertUnsupported, PTwoUnsupported, SearchExhausted, EKError
from .exact import QuadElem, QuadField, is_squarefree, v_int
from .padic import EmbeddingData, embed_field

DEFAULT_K_MAX = 8
DEFAULT_COEFF_BOUND = 10**6


@dataclass(frozen=True)
class UnitSystem:
    kind: str
    field: QuadField
    p: int
    omega1: QuadElem | None = None
    omega2: QuadElem | None = None
    t: int | None = None
    zeta: QuadElem | None = None
    nu: int | None = None
    eta: QuadElem | None = None
    extra: dict = field(default_factory=dict, compare=False)

    def to_dict(self) -> dict:
        out = {"kind": self.kind, "d": self.field.d, "p": self.p}
        for name in ("eta", "omega1", "omega2", "zeta"):
            x = getattr(self, name)
            if x is not None:
                out[name] = _elem_dict(x, self.p)
        if self.t is not None:
            out["t"] = self.t
        if self.nu is not None:
            out["nu"] = self.nu
        out.update(self.extra)
        return out


def _elem_dict(x: QuadElem, p: int) -> dict:
    n = x.norm()
    out = {"a": str(x.a), "b": str(x.b), "trace": str(x.trace()), "norm": str(n)}
    if n != 0:
        out["vp_norm"] = v_int(n.numerator, p) - v_int(n.denominator, p)
    return out


def _continued_fraction_convergents(field: QuadField):
    """Yield convergents (h, k) of the continued fraction of w = sqrt(d) or (1+sqrt d)/2."""
    d = field.d
    # w = (P + sqrt d) / Q with Q | d - P^2
    if field.ring_shift:
        P, Q = 1, 2
    else:
        P, Q = 0, 1
    r = math.isqrt(d)
    h0, h1 = 1, 0
    k0, k1 = 0, 1
    while True:
        a = (P + r) // Q
        h0, h1 = a * h0 + h1, h0
        k0, k1 = a * k0 + k1, k0
        yield h0, k0
        P = a * Q - P
        Q = (d - P * P) // Q


def fundamental_unit(d: int) -> QuadElem:
    """Fundamental unit > 1 of the ring of integers of Q(sqrt d), d > 1 squarefree."""
    if d <= 1 or not is_squarefree(d):
        raise EKError(f"d={d} must be a squarefree integer > 1")
    F = QuadField(d)
    w = F.integral_basis()
    wbar = w.conj()
    for h, k in _continued_fraction_convergents(F):
        if abs((h - k * w).norm()) == 1:
            # h - k*w is small; its partner h - k*wbar exceeds 1
            return h - k * wbar
    raise AssertionError("unreachable")


def make_omega1_real(d: int) -> QuadElem:
    """Square of the fundamental unit: norm 1 and real embedding > 1."""
    eps = fundamental_unit(d)
    return eps * eps


def _split_embedding(field: QuadField, embedding: EmbeddingData) -> EmbeddingData:
    if embedding.p == 2:
        raise PTwoUnsupported("p = 2 is outside the supported scope")
    if embedding.splitting != "split":
        raise InertUnsupported(
            f"p={embedding.p} is inert in Q(sqrt {field.d}); the construction needs a split prime"
        )
    return embedding


def _norm_candidates(field: QuadField, target: int, coeff_bound: int):
    """Algebraic integers with |N| = target: first a + b sqrt d, then half-integral ones.

    Within each pass elements are ordered by b = 1, 2, ... and for each b the
    positive a before the negative one; b = 0 is skipped (rational elements
    cannot be multiplicatively independent of p).
    """
    d = field.d
    signs = (1, -1) if d > 0 else (1,)
    passes = [(1, 1)]
    if field.ring_shift:
        passes.append((2, 4))
    for den, scale in passes:
        for b in range(1, coeff_bound + 1):
            if den == 2 and b % 2 == 0:
                continue
            for s in signs:
                sq = d * b * b + s * scale * target
                if sq < 0:
                    continue
                a = math.isqrt(sq)
                if a * a != sq or (den == 2 and a % 2 == 0):
                    continue
                for x in ((a, -a) if a else (0,)):
                    yield field(Fraction(x, den), Fraction(b, den))


def _p_adic_unit(x: QuadElem, embedding: EmbeddingData) -> bool:
    y = embedding.embed(x)
    return not y.is_zero() and y.valuation() == 0


def find_p_unit(field: QuadField, embedding: EmbeddingData, k_max: int = DEFAULT_K_MAX,
                coeff_bound: int = DEFAULT_COEFF_BOUND) -> tuple[QuadElem, int]:
    """First algebraic integer eta with |N(eta)| = p^k and |eta|_p = 1; returns (eta, k)."""
    _split_embedding(field, embedding)
    p = embedding.p
    emb = embedding.with_precision(max(embedding.N, 2 * k_max + 4))
    for k in range(1, k_max + 1):
        for eta in _norm_candidates(field, p**k, coeff_bound):
            if _p_adic_unit(eta, emb):
                return eta, k
            # -sigma(eta) has the same norm up to sign and swaps the two p-adic places
            if _p_adic_unit(-eta.conj(), emb):
                return -eta.conj(), k
    raise SearchExhausted(f"no p-unit with |N| = {p}^k, k <= {k_max}, coefficients <= {coeff_bound}")


def p_unit_search(field: QuadField, embedding: EmbeddingData, k_max: int = DEFAULT_K_MAX,
                  coeff_bound: int = DEFAULT_COEFF_BOUND) -> tuple[QuadElem, int]:
    """The p-unit omega2 = eta^2 of the real construction and its exponent t."""
    eta, k = find_p_unit(field, embedding, k_max, coeff_bound)
    omega2 = eta * eta
    return omega2, k


def make_omega1_imaginary(field: QuadField, embedding: EmbeddingData, k_max: int = DEFAULT_K_MAX,
                          coeff_bound: int = DEFAULT_COEFF_BOUND) -> tuple[QuadElem, int]:
    """omega1 = p^t * eta / sigma(eta) for an imaginary field; equals eta^2 when N(eta) = p^t."""
    if field.is_real:
        raise EKError("make_omega1_imaginary needs d < 0")
    eta, k = find_p_unit(field, embedding, k_max, coeff_bound)
    n = eta.norm()
    omega = eta * eta / n
    omega1 = omega * (embedding.p**k)
    return omega1, k


def real_unit_system(d: int, p: int, branch: int | None = None, k_max: int = DEFAULT_K_MAX,
                     coeff_bound: int = DEFAULT_COEFF_BOUND) -> UnitSystem:
    F = QuadField(d)
    emb = embed_field(F, p, 2 * k_max + 4, branch)
    omega1 = make_omega1_real(d)
    eta, k = find_p_unit(F, emb, k_max, coeff_bound)
    return UnitSystem("real_thm1", F, p, omega1=omega1, omega2=eta * eta, t=k, eta=eta,
                      extra={"branch": emb.branch})


def imaginary_unit_system(d: int, p: int, branch: int | None = None, k_max: int = DEFAULT_K_MAX,
                          coeff_bound: int = DEFAULT_COEFF_BOUND) -> UnitSystem:
    F = QuadField(d)
    emb = embed_field(F, p, 2 * k_max + 4, branch)
    omega1, t = make_omega1_imaginary(F, emb, k_max, coeff_bound)
    return UnitSystem("imaginary_thm1", F, p, omega1=omega1, t=t, extra={"branch": emb.branch})


def default_nu(p: int) -> int:
    if p == 2:
        raise PTwoUnsupported("p = 2 (nu = 12) is outside the supported scope")
    return 24 if p == 3 else p * p - 1


def zeta_is_close_to_one(zeta: QuadElem, embedding: EmbeddingData) -> bool:
    """Exact check of |phi(zeta) - 1|_p <= 1/p at the embedding's precision."""
    z = embedding.embed(zeta) - 1
    return z.is_zero() or z.valuation() >= 1


def normalize_zeta(d: int, p: int, N: int = 20, branch: int | None = None) -> tuple[QuadElem, int]:
    """zeta = (fundamental unit)^(2 nu) with |phi(zeta) - 1|_p <= 1/p."""
    nu = default_nu(p)
    F = QuadField(d)
    emb = embed_field(F, p, N, branch)
    zeta0 = make_omega1_real(d)
    while True:
        zeta = zeta0**nu
        if zeta_is_close_to_one(zeta, emb):
            return zeta, nu
        nu *= p


def zeta_system(d: int, p: int, N: int = 20, branch: int | None = None) -> UnitSystem:
    zeta, nu = normalize_zeta(d, p, N, branch)
    F = QuadField(d)
    emb = embed_field(F, p, N, branch)
    y = emb.embed(zeta) - 1
    return UnitSystem("thm2", F, p, zeta=zeta, nu=nu,
                      extra={"splitting": emb.splitting, "vp_zeta_minus_1": y.valuation()})


def unit_system(d: int, p: int, branch: int | None = None, k_max: int = DEFAULT_K_MAX,
                coeff_bound: int = DEFAULT_COEFF_BOUND) -> UnitSystem:
    """Unit system of the two-sided construction for Q(sqrt d) at p (real or imaginary by sign of d)."""
    if d > 0:
        return real_unit_system(d, p, branch, k_max, coeff_bound)
    return imaginary_unit_system(d, p, branch, k_max, coeff_bound)
