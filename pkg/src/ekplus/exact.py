"""Exact rationals, quadratic-field elements and rigorous real balls.

Rationals are :class:`fractions.Fraction`.  Quadratic-field elements keep
rational coordinates in the basis ``{1, sqrt(d)}``, so the fundamental unit of
``Q(sqrt 5)`` is simply ``QuadElem(F, 1/2, 1/2)``; integrality is decided by
the trace/norm criterion.

Real balls wrap the directed-rounding interval primitives of ``mpmath.libmp``.
Endpoints are binary floating-point numbers with unbounded exponent, so a
ball can enclose ``zeta**(-10**12)`` without underflow.
"""

from __future__ import annotations

import math
import numbers
import os
import re
from dataclasses import dataclass
from decimal import MAX_EMAX, MIN_EMIN, ROUND_CEILING, ROUND_FLOOR, Context, Decimal
from fractions import Fraction
from typing import Callable, TypeVar, Union

from mpmath.libmp import (
    from_int,
    from_man_exp,
    fzero,
    mpf_abs,
    mpf_add,
    mpf_cmp,
    mpf_div,
    mpf_lt,
    mpf_neg,
    mpf_shift,
    mpf_sign,
    mpf_sub,
    round_ceiling,
    round_floor,
    to_float,
    to_str,
)
from mpmath.libmp import libmpi
from mpmath.libmp.libintmath import isprime

from .errors import EKError, InadmissibleInput, ParseError, PrecisionExhausted, ZeroInput

RatLike = Union[int, Fraction]
T = TypeVar("T")

DEFAULT_PRECISION_CAP = 1 << 16
START_PRECISION = 64


def precision_cap() -> int:
    """Hard cap on working precision in bits (``EKPLUS_PRECISION_CAP``)."""
    return int(os.environ.get("EKPLUS_PRECISION_CAP", DEFAULT_PRECISION_CAP))


class Undecided(Exception):
    """Raised inside an adaptive computation when the current precision is too low."""


def adaptive(fn: Callable[[int], T], start: int = START_PRECISION, cap: int | None = None) -> T:
    """Call ``fn(prec)`` with doubling precision until it stops raising Undecided."""
    cap = precision_cap() if cap is None else cap
    prec = start
    while prec <= cap:
        try:
            return fn(prec)
        except Undecided:
            prec *= 2
    raise PrecisionExhausted(f"undecided at the precision cap of {cap} bits")


# ---------------------------------------------------------------------------
# integers and rationals
# ---------------------------------------------------------------------------

def is_prime(n: int) -> bool:
    return n >= 2 and bool(isprime(n))


def v_int(n: int, p: int) -> int:
    """p-adic valuation of a nonzero integer."""
    if n == 0:
        raise ZeroInput("valuation of 0 is +infinity")
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return v


def vp(x: RatLike, p: int) -> tuple[int, Fraction]:
    """Return ``(v_p(x), |x|_p)`` for a nonzero rational."""
    x = Fraction(x)
    if x == 0:
        raise ZeroInput("valuation of 0 is +infinity")
    v = v_int(x.numerator, p) - v_int(x.denominator, p)
    return v, Fraction(p) ** (-v)


def abs_p(x: RatLike, p: int) -> Fraction:
    """|x|_p with the convention |0|_p = 0."""
    return Fraction(0) if x == 0 else vp(x, p)[1]


def is_squarefree(n: int) -> bool:
    n = abs(n)
    if n == 0:
        return False
    f = 2
    while f * f <= n:
        if n % (f * f) == 0:
            return False
        if n % f == 0:
            n //= f
        f += 1
    return True


def parse_rat(text: str) -> Fraction:
    try:
        return Fraction(text.strip())
    except (ValueError, ZeroDivisionError) as exc:
        raise ParseError(f"not a rational number: {text!r}") from exc


# ---------------------------------------------------------------------------
# quadratic fields
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class QuadField:
    d: int

    def __post_init__(self):
        if self.d in (0, 1) or not is_squarefree(self.d):
            raise EKError(f"d={self.d} is not a squarefree non-square integer")

    @property
    def ring_shift(self) -> bool:
        """True when the integers are Z[(1+sqrt d)/2]."""
        return self.d % 4 == 1

    @property
    def is_real(self) -> bool:
        return self.d > 0

    def __call__(self, a: RatLike, b: RatLike = 0) -> "QuadElem":
        return QuadElem(self, Fraction(a), Fraction(b))

    @property
    def sqrt_d(self) -> "QuadElem":
        return QuadElem(self, Fraction(0), Fraction(1))

    def integral_basis(self) -> "QuadElem":
        """The generator w of the ring of integers Z[w]."""
        if self.ring_shift:
            return self(Fraction(1, 2), Fraction(1, 2))
        return self.sqrt_d


@dataclass(frozen=True)
class QuadElem:
    field: QuadField
    a: Fraction
    b: Fraction

    def _coerce(self, other) -> "QuadElem":
        if isinstance(other, QuadElem):
            if other.field != self.field:
                raise EKError("elements of different quadratic fields")
            return other
        if isinstance(other, (int, Fraction)):
            return QuadElem(self.field, Fraction(other), Fraction(0))
        return NotImplemented

    def __add__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return QuadElem(self.field, self.a + o.a, self.b + o.b)

    __radd__ = __add__

    def __neg__(self):
        return QuadElem(self.field, -self.a, -self.b)

    def __sub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return QuadElem(self.field, self.a - o.a, self.b - o.b)

    def __rsub__(self, other):
        return -(self - other)

    def __mul__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        d = self.field.d
        return QuadElem(self.field, self.a * o.a + d * self.b * o.b, self.a * o.b + self.b * o.a)

    __rmul__ = __mul__

    def inverse(self) -> "QuadElem":
        n = self.norm()
        if n == 0:
            raise ZeroDivisionError("inverse of zero")
        c = self.conj()
        return QuadElem(self.field, c.a / n, c.b / n)

    def __truediv__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return self * o.inverse()

    def __rtruediv__(self, other):
        return self._coerce(other) * self.inverse()

    def __pow__(self, n: int) -> "QuadElem":
        if n < 0:
            return self.inverse() ** (-n)
        result = QuadElem(self.field, Fraction(1), Fraction(0))
        base = self
        while n:
            if n & 1:
                result = result * base
            n >>= 1
            if n:
                base = base * base
        return result

    def conj(self) -> "QuadElem":
        return QuadElem(self.field, self.a, -self.b)

    def trace(self) -> Fraction:
        return 2 * self.a

    def norm(self) -> Fraction:
        return self.a * self.a - self.field.d * self.b * self.b

    def is_integral(self) -> bool:
        return self.trace().denominator == 1 and self.norm().denominator == 1

    def is_rational(self) -> bool:
        return self.b == 0

    def is_zero(self) -> bool:
        return self.a == 0 and self.b == 0

    def sign(self) -> int:
        """Exact sign of the real embedding sqrt(d) > 0 (real fields only)."""
        if not self.field.is_real:
            raise EKError("sign is only defined in real quadratic fields")
        sa = (self.a > 0) - (self.a < 0)
        sb = (self.b > 0) - (self.b < 0)
        if sb == 0 or sa == sb:
            return sa if sa else sb
        if sa == 0:
            return sb
        # opposite signs: compare a^2 with d b^2
        diff = self.a * self.a - self.field.d * self.b * self.b
        if diff == 0:
            return 0
        return sa if diff > 0 else sb

    def embed(self, prec: int, sign: int = 1) -> "RealBall":
        """Real embedding sending sqrt(d) to ``sign`` times the positive root."""
        if not self.field.is_real:
            raise EKError("real embedding of an imaginary quadratic field")
        a = RealBall.from_rational(self.a, prec)
        if self.b == 0:
            return a
        root = RealBall.from_int(self.field.d, prec).sqrt()
        return a + root * (self.b * sign)

    def complex_embed(self, prec: int) -> tuple["RealBall", "RealBall"]:
        """(real part, imaginary part) of the embedding sqrt(d) -> i sqrt(|d|)."""
        if self.field.is_real:
            return self.embed(prec), RealBall.from_int(0, prec)
        root = RealBall.from_int(-self.field.d, prec).sqrt()
        return RealBall.from_rational(self.a, prec), root * self.b

    def __str__(self) -> str:
        if self.b == 0:
            return str(self.a)
        s = "+" if self.b > 0 else "-"
        return f"{self.a} {s} {abs(self.b)}*sqrt({self.field.d})"


def quad_trace_norm(x: QuadElem) -> tuple[Fraction, Fraction, QuadElem]:
    return x.trace(), x.norm(), x.conj()


# ---------------------------------------------------------------------------
# real balls
# ---------------------------------------------------------------------------

def _mpf_from_fraction(x: Fraction, prec: int, rnd) -> tuple:
    num, den = x.numerator, x.denominator
    if den & (den - 1) == 0:
        return from_man_exp(num, -(den.bit_length() - 1))
    return mpf_div(from_int(num), from_int(den), prec, rnd)


def _mpf_to_fraction(x: tuple) -> Fraction:
    sign, man, exp, _ = x
    if not man:
        if exp:
            raise ValueError("non-finite endpoint")
        return Fraction(0)
    v = Fraction(int(man) << exp) if exp >= 0 else Fraction(int(man), 1 << -exp)
    return -v if sign else v


def _mpf_min(a, b):
    return a if mpf_cmp(a, b) <= 0 else b


def _mpf_max(a, b):
    return b if mpf_cmp(a, b) <= 0 else a


def _widen(lo: tuple, hi: tuple, prec: int) -> tuple[tuple, tuple]:
    # transcendental endpoints get a few extra ulps of outward slack
    slack = 6 - prec
    if lo != fzero:
        lo = mpf_sub(lo, mpf_shift(mpf_abs(lo), slack), prec, round_floor)
    if hi != fzero:
        hi = mpf_add(hi, mpf_shift(mpf_abs(hi), slack), prec, round_ceiling)
    return lo, hi


@dataclass(frozen=True)
class RealBall:
    """Closed interval ``[lo, hi]`` with binary floating-point endpoints."""

    lo: tuple
    hi: tuple
    prec: int

    # -- constructors -----------------------------------------------------
    @classmethod
    def from_int(cls, n: int, prec: int) -> "RealBall":
        x = from_int(n)
        return cls(x, x, prec)

    @classmethod
    def from_rational(cls, x: RatLike, prec: int) -> "RealBall":
        x = Fraction(x)
        if x.denominator == 1:
            return cls.from_int(x.numerator, prec)
        return cls(_mpf_from_fraction(x, prec, round_floor), _mpf_from_fraction(x, prec, round_ceiling), prec)

    @classmethod
    def from_bounds(cls, lo: RatLike, hi: RatLike, prec: int) -> "RealBall":
        return cls(_mpf_from_fraction(Fraction(lo), prec, round_floor),
                   _mpf_from_fraction(Fraction(hi), prec, round_ceiling), prec)

    @classmethod
    def pi(cls, prec: int) -> "RealBall":
        lo, hi = _widen(*libmpi.mpi_pi(prec), prec)
        return cls(lo, hi, prec)

    def _coerce(self, other) -> "RealBall":
        if isinstance(other, RealBall):
            return other
        if isinstance(other, (numbers.Integral, Fraction)):
            return RealBall.from_rational(Fraction(int(other)) if isinstance(other, numbers.Integral) else other,
                                          self.prec)
        raise TypeError(f"cannot combine RealBall with {type(other).__name__}")

    @property
    def _s(self):
        return (self.lo, self.hi)

    def _make(self, s, other=None) -> "RealBall":
        prec = self.prec if other is None else max(self.prec, other.prec)
        return RealBall(s[0], s[1], prec)

    # -- arithmetic -------------------------------------------------------
    def __add__(self, other):
        o = self._coerce(other)
        return self._make(libmpi.mpi_add(self._s, o._s, max(self.prec, o.prec)), o)

    __radd__ = __add__

    def __sub__(self, other):
        o = self._coerce(other)
        return self._make(libmpi.mpi_sub(self._s, o._s, max(self.prec, o.prec)), o)

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        o = self._coerce(other)
        return self._make(libmpi.mpi_mul(self._s, o._s, max(self.prec, o.prec)), o)

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._coerce(other)
        if o.contains_zero():
            raise Undecided("division by a ball containing zero")
        return self._make(libmpi.mpi_div(self._s, o._s, max(self.prec, o.prec)), o)

    def __rtruediv__(self, other):
        return self._coerce(other) / self

    def __neg__(self):
        return RealBall(mpf_neg(self.hi), mpf_neg(self.lo), self.prec)

    def __abs__(self):
        return self._make(libmpi.mpi_abs(self._s))

    def __pow__(self, n: int) -> "RealBall":
        if n < 0 and self.contains_zero():
            raise Undecided("negative power of a ball containing zero")
        return self._make(libmpi.mpi_pow_int(self._s, n, self.prec))

    def sqrt(self) -> "RealBall":
        if mpf_sign(self.lo) < 0:
            raise Undecided("square root of a ball reaching below zero")
        return self._make(libmpi.mpi_sqrt(self._s, self.prec))

    def log(self) -> "RealBall":
        if mpf_sign(self.lo) <= 0:
            raise Undecided("logarithm of a ball reaching zero")
        return self._make(_widen(*libmpi.mpi_log(self._s, self.prec), self.prec))

    def exp(self) -> "RealBall":
        return self._make(_widen(*libmpi.mpi_exp(self._s, self.prec), self.prec))

    @staticmethod
    def atan2(y: "RealBall", x: "RealBall") -> "RealBall":
        """Argument of x + iy in (-pi, pi]; undecided if the ball meets the branch cut."""
        prec = max(x.prec, y.prec)
        if mpf_sign(x.hi) <= 0 and y.contains_zero():
            raise Undecided("argument straddles the branch cut")
        lo, hi = libmpi.mpi_atan2(y._s, x._s, prec)
        lo, hi = _widen(lo, hi, prec)
        return RealBall(lo, hi, prec)

    def hull(self, other: "RealBall") -> "RealBall":
        return RealBall(_mpf_min(self.lo, other.lo), _mpf_max(self.hi, other.hi), max(self.prec, other.prec))

    def max(self, other: "RealBall") -> "RealBall":
        return RealBall(_mpf_max(self.lo, other.lo), _mpf_max(self.hi, other.hi), max(self.prec, other.prec))

    # -- inspection -------------------------------------------------------
    @property
    def lower(self) -> Fraction:
        return _mpf_to_fraction(self.lo)

    @property
    def upper(self) -> Fraction:
        return _mpf_to_fraction(self.hi)

    @property
    def midpoint(self) -> Fraction:
        return (self.lower + self.upper) / 2

    @property
    def radius(self) -> Fraction:
        return (self.upper - self.lower) / 2

    def rad_mpf(self) -> tuple:
        return mpf_shift(mpf_sub(self.hi, self.lo, 53, round_ceiling), -1)

    def radius_below(self, target: RatLike) -> bool:
        t = _mpf_from_fraction(Fraction(target), 64, round_floor)
        return mpf_cmp(self.rad_mpf(), t) <= 0

    def relative_accuracy(self, bits: int) -> bool:
        """True if the ball excludes zero and its width is below 2^-bits of its magnitude."""
        if self.sign() in (None, 0):
            return self.lo == self.hi
        small = mpf_abs(self.lo) if mpf_sign(self.lo) > 0 else mpf_abs(self.hi)
        width = mpf_sub(self.hi, self.lo, 64, round_ceiling)
        return mpf_cmp(width, mpf_shift(small, -bits)) <= 0

    def contains_zero(self) -> bool:
        return mpf_sign(self.lo) <= 0 <= mpf_sign(self.hi)

    def contains(self, x: RatLike) -> bool:
        x = Fraction(x)
        return self.lower <= x <= self.upper

    def contains_ball(self, other: "RealBall") -> bool:
        return mpf_cmp(self.lo, other.lo) <= 0 and mpf_cmp(other.hi, self.hi) <= 0

    def lt(self, other) -> bool | None:
        """Certified ``self < other``: True, False or None when undecided."""
        o = self._coerce(other)
        if mpf_lt(self.hi, o.lo):
            return True
        if mpf_cmp(self.lo, o.hi) >= 0:
            return False
        return None

    def le(self, other) -> bool | None:
        o = self._coerce(other)
        if mpf_cmp(self.hi, o.lo) <= 0:
            return True
        if mpf_lt(o.hi, self.lo):
            return False
        return None

    def sign(self) -> int | None:
        """Certified sign, or None if the ball contains zero but is not {0}."""
        if mpf_sign(self.lo) > 0:
            return 1
        if mpf_sign(self.hi) < 0:
            return -1
        if self.lo == fzero and self.hi == fzero:
            return 0
        return None

    def require_sign(self) -> int:
        s = self.sign()
        if s is None:
            raise Undecided("sign not separated from zero")
        return s

    def floor(self) -> int:
        """Certified floor; Undecided if the ball straddles an integer."""
        lo = int(math.floor(self.lower))
        if self.upper < lo + 1:
            return lo
        raise Undecided("floor not determined")

    def to_float(self) -> float:
        return to_float(mpf_shift(mpf_add(self.lo, self.hi, self.prec), -1))

    def lo_float(self) -> float:
        return to_float(self.lo, rnd=round_floor)

    def hi_float(self) -> float:
        return to_float(self.hi, rnd=round_ceiling)

    def lo_str(self, digits: int = 20) -> str:
        return _decimal_outward(self.lo, digits, ROUND_FLOOR)

    def hi_str(self, digits: int = 20) -> str:
        return _decimal_outward(self.hi, digits, ROUND_CEILING)

    def __repr__(self) -> str:
        return f"RealBall[{self.lo_str(12)}, {self.hi_str(12)}]"


def _decimal_outward(x: tuple, digits: int, rounding) -> str:
    if x == fzero:
        return "0"
    sign, man, exp, _ = x
    if abs(exp) < 4096:
        # correctly rounded: decimal division rounds once, in the requested direction
        ctx = Context(prec=digits, rounding=rounding, Emin=MIN_EMIN, Emax=MAX_EMAX)
        num = Decimal(-int(man) if sign else int(man))
        if exp >= 0:
            return str(ctx.multiply(num, Decimal(2**exp)))
        return str(ctx.divide(num, Decimal(2**-exp)))
    ctx = Context(prec=digits + 10, Emin=MIN_EMIN, Emax=MAX_EMAX)
    d = ctx.create_decimal(to_str(x, digits + 10))
    # nudge by 1e-(digits+5) relative so the conversion error cannot flip the rounding
    nudge = ctx.abs(d).scaleb(-(digits + 5), ctx)
    d = ctx.subtract(d, nudge) if rounding == ROUND_FLOOR else ctx.add(d, nudge)
    return str(Context(prec=digits, rounding=rounding, Emin=MIN_EMIN, Emax=MAX_EMAX).plus(d))


# ---------------------------------------------------------------------------
# real inputs
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RealSpec:
    """A real number given exactly (rational or quadratic) or as a decimal enclosure."""

    kind: str
    rational: Fraction | None = None
    quad: QuadElem | None = None
    embed_sign: int = 1
    center: Fraction | None = None
    error: Fraction | None = None

    @classmethod
    def rat(cls, x: RatLike) -> "RealSpec":
        return cls("rat", rational=Fraction(x))

    @classmethod
    def from_quad(cls, x: QuadElem, sign: int = 1) -> "RealSpec":
        if not x.field.is_real:
            raise EKError("a real number needs a real quadratic field")
        if x.b == 0:
            return cls.rat(x.a)
        return cls("quad", quad=x, embed_sign=sign)

    @classmethod
    def decimal(cls, center: RatLike, error: RatLike) -> "RealSpec":
        return cls("dec", center=Fraction(center), error=Fraction(error))

    def exact_quad(self) -> QuadElem | None:
        """The value as an element of its quadratic field with sqrt(d) > 0, if exact."""
        if self.kind == "quad":
            return self.quad if self.embed_sign == 1 else self.quad.conj()
        return None

    def exact_rational(self) -> Fraction | None:
        return self.rational if self.kind == "rat" else None

    def ball(self, prec: int) -> RealBall:
        if self.kind == "rat":
            return RealBall.from_rational(self.rational, prec)
        if self.kind == "quad":
            return self.quad.embed(prec, self.embed_sign)
        return RealBall.from_bounds(self.center - self.error, self.center + self.error, prec)

    def __str__(self) -> str:
        if self.kind == "rat":
            return f"rat:{self.rational}"
        if self.kind == "quad":
            q = self.quad
            return f"quad:d={q.field.d},a={q.a},b={q.b},sign={'+' if self.embed_sign > 0 else '-'}"
        return f"dec:{self.center}~{self.error}"


def real_embed(x: QuadElem | RealSpec, target_radius: RatLike, cap: int | None = None) -> RealBall:
    """Enclose the real value of ``x`` in a ball of radius at most ``target_radius``."""
    target = Fraction(target_radius)
    if target <= 0:
        raise ValueError("target radius must be positive")
    spec = x if isinstance(x, RealSpec) else RealSpec.from_quad(x)
    if spec.kind == "dec" and spec.error > target:
        raise PrecisionExhausted("decimal input is coarser than the requested radius")

    def attempt(prec: int) -> RealBall:
        b = spec.ball(prec)
        if not b.radius_below(target):
            raise Undecided
        return b

    return adaptive(attempt, cap=cap)


_KV = re.compile(r"^\s*(\w+)\s*=\s*(.+?)\s*$")


def parse_kv(body: str) -> dict[str, str]:
    out = {}
    for part in body.split(","):
        m = _KV.match(part)
        if not m:
            raise ParseError(f"expected key=value, got {part!r}")
        out[m.group(1)] = m.group(2)
    return out


def parse_real_spec(text: str) -> RealSpec:
    """Parse ``rat:n/d``, ``quad:d=..,a=..,b=..,sign=+|-`` or ``dec:digits~err``."""
    kind, _, body = text.partition(":")
    if kind == "rat":
        return RealSpec.rat(parse_rat(body))
    if kind == "quad":
        kv = parse_kv(body)
        try:
            field = QuadField(int(kv["d"]))
        except (KeyError, ValueError) as exc:
            raise ParseError(f"bad quadratic field in {text!r}") from exc
        except EKError as exc:
            raise ParseError(str(exc)) from exc
        sign = kv.get("sign", "+")
        if sign not in ("+", "-"):
            raise ParseError(f"sign must be + or -, got {sign!r}")
        if not field.is_real:
            raise ParseError("a real input needs d > 0")
        return RealSpec.from_quad(field(parse_rat(kv.get("a", "0")), parse_rat(kv.get("b", "0"))),
                                  1 if sign == "+" else -1)
    if kind == "dec":
        digits, sep, err = body.partition("~")
        if not sep:
            raise ParseError("decimal input needs an error bound: dec:<digits>~<err>")
        try:
            center, error = Fraction(Decimal(digits)), Fraction(Decimal(err))
        except Exception as exc:
            raise ParseError(f"bad decimal input {text!r}") from exc
        if error < 0:
            raise ParseError("error bound must be nonnegative")
        return RealSpec.decimal(center, error)
    raise ParseError(f"unknown real input kind {kind!r}")


def check_not_root(alpha: RealSpec, beta: QuadElem, prec: int) -> RealBall:
    """Return a ball for (alpha - beta)(alpha - conj beta), raising if alpha is a root."""
    q = alpha.exact_quad()
    if alpha.kind == "rat" or (q is not None and q.field == beta.field):
        x = beta.field(alpha.rational) if alpha.kind == "rat" else q
        value = (x - beta) * (x - beta.conj())
        if value.is_zero():
            raise InadmissibleInput("alpha is a root of the minimal polynomial of beta")
    a = alpha.ball(prec)
    tr, nm = beta.trace(), beta.norm()
    return a * a - a * tr + nm
