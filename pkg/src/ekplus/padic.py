"""Truncated p-adic numbers with pessimistic precision tracking.

A :class:`PAdic` is ``p**val * unit`` known modulo ``p**prec`` (absolute
precision).  Elements of the unramified quadratic extension ``Q_p(sqrt d)``
are pairs of such numbers (:class:`PAdicQuad`).  Only odd primes are
supported, and embeddings of quadratic fields are restricted to the split
and inert cases.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Union

from .errors import (
    DomainError,
    EKError,
    InsufficientPrecision,
    NonResidue,
    NotIntegral,
    ParseError,
    PTwoUnsupported,
    RamifiedUnsupported,
)
from .exact import QuadElem, QuadField, RatLike, is_prime, parse_kv, parse_rat, v_int


def _check_prime(p: int) -> None:
    if not is_prime(p):
        raise EKError(f"{p} is not prime")
    if p == 2:
        raise PTwoUnsupported("p = 2 is outside the supported scope")


@dataclass(frozen=True)
class PAdic:
    p: int
    prec: int
    val: int
    unit: int
    exact: bool = False

    # -- construction -----------------------------------------------------
    @classmethod
    def _scaled(cls, p: int, prec: int, m: int, s: int) -> "PAdic":
        """The number p**m * s known modulo p**prec."""
        if m >= prec:
            return cls(p, prec, prec, 0)
        s %= p ** (prec - m)
        if s == 0:
            return cls(p, prec, prec, 0)
        e = v_int(s, p)
        v = m + e
        return cls(p, prec, v, (s // p**e) % p ** (prec - v))

    @classmethod
    def zero(cls, p: int, prec: int, exact: bool = False) -> "PAdic":
        return cls(p, prec, prec, 0, exact)

    @classmethod
    def from_rational(cls, x: RatLike, p: int, prec: int) -> "PAdic":
        x = Fraction(x)
        if x == 0:
            return cls.zero(p, prec, exact=True)
        num, den = x.numerator, x.denominator
        vd = v_int(den, p)
        den //= p**vd
        vn = v_int(num, p)
        num //= p**vn
        v = vn - vd
        if v >= prec:
            return cls.zero(p, prec)
        mod = p ** (prec - v)
        return cls(p, prec, v, num * pow(den, -1, mod) % mod)

    # -- inspection -------------------------------------------------------
    def is_zero(self) -> bool:
        return self.unit == 0

    def valuation(self) -> int:
        """Exact valuation; for a zero known mod p^N this is the lower bound N."""
        return self.val

    def residue(self, n: int | None = None) -> int:
        """Integer representative in [0, p^n) (n defaults to the precision)."""
        n = self.prec if n is None else n
        if self.exact:
            return 0
        if n > self.prec:
            raise InsufficientPrecision(f"need {n} digits, have {self.prec}")
        if self.unit == 0:
            return 0
        if self.val < 0:
            raise NotIntegral("not a p-adic integer")
        return (self.unit * self.p**self.val) % self.p**n

    def digits(self) -> list[int]:
        """Base-p digits from p^min(val,0) up to p^(prec-1)."""
        start = min(self.val, 0)
        n = self.unit * self.p ** (self.val - start) if self.unit else 0
        out = []
        for _ in range(self.prec - start):
            n, r = divmod(n, self.p)
            out.append(r)
        return out

    def __str__(self) -> str:
        if self.exact:
            return "0 (exact)"
        return f"{self.p}^{self.val} * {self.unit} mod {self.p}^{self.prec}"

    # -- arithmetic -------------------------------------------------------
    def _coerce(self, other) -> "PAdic":
        if isinstance(other, PAdic):
            if other.p != self.p:
                raise EKError("p-adic numbers for different primes")
            return other
        if isinstance(other, (int, Fraction)):
            return PAdic.from_rational(other, self.p, max(self.prec, 1) + max(0, -self.val) + 64)
        return NotImplemented

    def __add__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        if self.exact:
            return o
        if o.exact:
            return self
        prec = min(self.prec, o.prec)
        m = min(self.val, o.val)
        s = self.unit * self.p ** (self.val - m) + o.unit * self.p ** (o.val - m)
        return PAdic._scaled(self.p, prec, m, s)

    __radd__ = __add__

    def __neg__(self):
        if self.unit == 0:
            return self
        return PAdic(self.p, self.prec, self.val, (-self.unit) % self.p ** (self.prec - self.val))

    def __sub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return self + (-o)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        if self.exact:
            return self
        if o.exact:
            return o
        prec = min(self.prec + o.val, o.prec + self.val)
        return PAdic._scaled(self.p, prec, self.val + o.val, self.unit * o.unit)

    __rmul__ = __mul__

    def inverse(self) -> "PAdic":
        if self.unit == 0:
            raise ZeroDivisionError("inverse of a p-adic zero")
        rel = self.prec - self.val
        return PAdic(self.p, -self.val + rel, -self.val, pow(self.unit, -1, self.p**rel))

    def __truediv__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return self * o.inverse()

    def __rtruediv__(self, other):
        return self._coerce(other) * self.inverse()

    def __pow__(self, n: int) -> "PAdic":
        if n < 0:
            return self.inverse() ** (-n)
        if n == 0:
            return PAdic.from_rational(1, self.p, self.prec - self.val if self.unit else self.prec)
        if self.unit == 0:
            return self * self ** (n - 1) if n > 1 else self
        rel = self.prec - self.val
        return PAdic(self.p, n * self.val + rel, n * self.val, pow(self.unit, n, self.p**rel))

    def sigma(self) -> "PAdic":
        return self


@dataclass(frozen=True)
class PAdicQuad:
    """x0 + x1*sqrt(d) in the unramified extension Q_p(sqrt d), d a non-residue."""

    d: int
    x0: PAdic
    x1: PAdic

    @property
    def p(self) -> int:
        return self.x0.p

    @property
    def prec(self) -> int:
        precs = [x.prec for x in (self.x0, self.x1) if not x.exact]
        return min(precs) if precs else self.x0.prec

    def valuation(self) -> int:
        vals = [x.val for x in (self.x0, self.x1) if not x.exact]
        return min(vals) if vals else self.x0.val

    def is_zero(self) -> bool:
        return self.x0.is_zero() and self.x1.is_zero()

    def _coerce(self, other) -> "PAdicQuad":
        if isinstance(other, PAdicQuad):
            return other
        if isinstance(other, (int, Fraction, PAdic)):
            x0 = other if isinstance(other, PAdic) else self.x0._coerce(other)
            return PAdicQuad(self.d, x0, PAdic.zero(self.p, 0, exact=True))
        return NotImplemented

    def __add__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return PAdicQuad(self.d, self.x0 + o.x0, self.x1 + o.x1)

    __radd__ = __add__

    def __neg__(self):
        return PAdicQuad(self.d, -self.x0, -self.x1)

    def __sub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return self + (-o)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return PAdicQuad(
            self.d,
            self.x0 * o.x0 + self.x1 * o.x1 * self.d,
            self.x0 * o.x1 + self.x1 * o.x0,
        )

    __rmul__ = __mul__

    def sigma(self) -> "PAdicQuad":
        return PAdicQuad(self.d, self.x0, -self.x1)

    def norm(self) -> PAdic:
        return self.x0 * self.x0 - self.x1 * self.x1 * self.d

    def inverse(self) -> "PAdicQuad":
        n = self.norm()
        if n.is_zero():
            raise ZeroDivisionError("inverse of a p-adic zero")
        c = self.sigma()
        return PAdicQuad(self.d, c.x0 / n, c.x1 / n)

    def __truediv__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return self * o.inverse()

    def __rtruediv__(self, other):
        return self._coerce(other) * self.inverse()

    def __pow__(self, n: int) -> "PAdicQuad":
        if n < 0:
            return self.inverse() ** (-n)
        result = PAdicQuad(self.d, PAdic.from_rational(1, self.p, self.prec), PAdic.zero(self.p, 0, exact=True))
        base = self
        while n:
            if n & 1:
                result = result * base
            n >>= 1
            if n:
                base = base * base
        return result

    def __str__(self) -> str:
        return f"({self.x0}) + ({self.x1})*sqrt({self.d})"


PAdicLike = Union[PAdic, PAdicQuad]


# ---------------------------------------------------------------------------
# square roots and embeddings
# ---------------------------------------------------------------------------

def legendre(d: int, p: int) -> int:
    r = pow(d % p, (p - 1) // 2, p)
    return -1 if r == p - 1 else r


def hensel_sqrt(d: int, p: int, N: int, branch: int | None = None) -> PAdic:
    """Square root of d in Z_p to absolute precision N, congruent to ``branch`` mod p."""
    _check_prime(p)
    if d % p == 0:
        raise RamifiedUnsupported(f"p={p} divides d={d}")
    if legendre(d, p) != 1:
        raise NonResidue(f"{d} is not a square modulo {p}")
    if branch is None:
        r = next(x for x in range(1, (p + 1) // 2) if (x * x - d) % p == 0)
    else:
        r = branch % p
        if (r * r - d) % p:
            raise NonResidue(f"{branch}^2 is not congruent to {d} modulo {p}")
    k = 1
    while k < N:
        k = min(2 * k, N)
        mod = p**k
        r = (r - (r * r - d) * pow(2 * r, -1, mod)) % mod
    return PAdic(p, N, 0, r % p**N)


@dataclass(frozen=True)
class EmbeddingData:
    field: QuadField
    p: int
    splitting: str
    branch: int | None
    N: int
    hensel_root: PAdic | None

    def embed(self, x: QuadElem, sign: int = 1) -> PAdicLike:
        """Image of x; ``sign=-1`` gives the conjugate embedding."""
        if x.field != self.field:
            raise EKError("element of a different field")
        a = PAdic.from_rational(x.a, self.p, self.N)
        b = PAdic.from_rational(x.b, self.p, self.N)
        if self.splitting == "split":
            return a + b * self.hensel_root * sign
        return PAdicQuad(self.field.d, a, b * sign)

    def embed_conj(self, x: QuadElem) -> PAdicLike:
        return self.embed(x, -1)

    def with_precision(self, N: int) -> "EmbeddingData":
        return embed_field(self.field, self.p, N, self.branch)


def embed_field(field: QuadField, p: int, N: int, branch: int | None = None) -> EmbeddingData:
    _check_prime(p)
    if field.d % p == 0:
        raise RamifiedUnsupported(f"p={p} ramifies in Q(sqrt {field.d})")
    if legendre(field.d, p) == 1:
        root = hensel_sqrt(field.d, p, N, branch)
        return EmbeddingData(field, p, "split", root.unit % p, N, root)
    return EmbeddingData(field, p, "inert", None, N, None)


# ---------------------------------------------------------------------------
# logarithm and Z_p quotients
# ---------------------------------------------------------------------------

def _ilog(n: int, p: int) -> int:
    e = 0
    while n >= p:
        n //= p
        e += 1
    return e


def log_truncation(v: int, N: int, p: int) -> int:
    """Smallest M with n*v - floor(log_p n) >= N for every n > M."""
    M = 0
    while (M + 1) * v - _ilog(M + 1, p) < N:
        M += 1
    return M


def padic_log(z: PAdicLike) -> PAdicLike:
    """p-adic logarithm on the disc |z - 1|_p <= 1/p (p odd)."""
    p = z.p
    if p == 2:
        raise PTwoUnsupported("p = 2 is outside the supported scope")
    quad = isinstance(z, PAdicQuad)
    y = z - 1
    N = y.prec
    if y.is_zero():
        if quad:
            return PAdicQuad(z.d, PAdic.zero(p, N, y.x0.exact), PAdic.zero(p, N, y.x1.exact))
        return PAdic.zero(p, N, y.exact)
    v = y.valuation()
    if v < 1:
        raise DomainError(f"|z - 1|_p = p^{-v} is outside the convergence disc; raise z to a power first")
    M = log_truncation(v, N, p)
    emax = _ilog(M, p)
    P = p ** (N + emax)
    mod = p**N
    if quad:
        d = z.d
        y0, y1 = y.x0.residue(N), y.x1.residue(N)
    else:
        d = 0
        y0, y1 = y.residue(N), 0
    c0, c1 = 1, 0
    s0 = s1 = 0
    for n in range(1, M + 1):
        c0, c1 = (c0 * y0 + d * c1 * y1) % P, (c0 * y1 + c1 * y0) % P
        e = v_int(n, p)
        inv = pow(n // p**e, -1, mod)
        sgn = 1 if n % 2 else -1
        s0 += sgn * (c0 // p**e) * inv
        s1 += sgn * (c1 // p**e) * inv
    if quad:
        return PAdicQuad(d, PAdic._scaled(p, N, 0, s0), PAdic._scaled(p, N, 0, s1))
    return PAdic._scaled(p, N, 0, s0)


def zp_ratio_residue(a: PAdic, b: PAdic, N: int) -> int:
    """The unique 0 <= n < p^N with |n - a/b|_p <= p^-N."""
    if b.is_zero():
        raise ZeroDivisionError("division by a p-adic zero")
    if not a.is_zero() and a.val < b.val:
        raise NotIntegral("|a|_p > |b|_p, the quotient is not in Z_p")
    c = a / b
    if c.prec < N:
        raise InsufficientPrecision(f"quotient known to {c.prec} digits, {N} requested")
    return c.residue(N)


# ---------------------------------------------------------------------------
# p-adic inputs
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PAdicSpec:
    """A p-adic input: a rational, or a quadratic number a + b*sqrt(d) with a chosen branch."""

    rational: Fraction | None = None
    quad: QuadElem | None = None
    branch: int | None = None

    @property
    def is_rational(self) -> bool:
        return self.quad is None

    def embedding(self, p: int, N: int) -> EmbeddingData:
        emb = embed_field(self.quad.field, p, N, self.branch)
        if emb.splitting != "split":
            raise NonResidue(f"{self.quad.field.d} is not a square in Q_{p}; beta must lie in Q_p")
        return emb

    def to_padic(self, p: int, N: int) -> PAdic:
        if self.is_rational:
            return PAdic.from_rational(self.rational, p, N)
        return self.embedding(p, N).embed(self.quad)

    def __str__(self) -> str:
        if self.is_rational:
            return f"rat:{self.rational}"
        q = self.quad
        br = "" if self.branch is None else f",branch={self.branch}"
        return f"quad:d={q.field.d},a={q.a},b={q.b}{br}"


def parse_padic_spec(text: str) -> PAdicSpec:
    kind, _, body = text.partition(":")
    if kind == "rat":
        return PAdicSpec(rational=parse_rat(body))
    if kind == "quad":
        kv = parse_kv(body)
        try:
            field = QuadField(int(kv["d"]))
            branch = int(kv["branch"]) if "branch" in kv else None
        except (KeyError, ValueError) as exc:
            raise ParseError(f"bad p-adic quadratic input {text!r}") from exc
        except EKError as exc:
            raise ParseError(str(exc)) from exc
        x = field(parse_rat(kv.get("a", "0")), parse_rat(kv.get("b", "0")))
        if x.b == 0:
            return PAdicSpec(rational=x.a)
        return PAdicSpec(quad=x, branch=branch)
    raise ParseError(f"unknown p-adic input kind {kind!r}")
