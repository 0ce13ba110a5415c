"""Inhomogeneous approximation ||n theta - xi|| for irrational theta.

The record minima of n -> ||n theta - xi|| are generated exactly: if n is a
record with signed residual delta = n theta - xi - P, the next record is
n + m where m is the least positive integer with m theta in
(-2 delta, 0) mod 1 (delta > 0) or in (0, 2|delta|) mod 1 (delta < 0).  Those
one-sided first-hit problems are solved by walking the intermediate
convergents of theta on the relevant side, whose residuals are exactly the
successive one-sided minima.  All comparisons are certified with real balls
and the whole computation restarts at doubled precision when one is not.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable

from .exact import RealBall, Undecided, adaptive

Oracle = Callable[[int], RealBall]

KHINTCHINE_BOUND = 3


def constant(x) -> Oracle:
    """Oracle for an exact rational."""
    return lambda prec: RealBall.from_rational(Fraction(x), prec)


@dataclass(frozen=True)
class Record:
    n: int
    P: int
    residual: RealBall  # n*theta - xi - P, |.| = ||n theta - xi||

    @property
    def distance(self) -> RealBall:
        return abs(self.residual)


class _Rotation:
    """Continued-fraction data of theta mod 1 at one working precision."""

    def __init__(self, theta: RealBall, xi: RealBall):
        self.theta_full = theta
        self.shift = theta.floor()
        self.theta = theta - self.shift
        self.xi = xi
        # index -1 and 0 of the convergent tables
        self.q = {-1: 0, 0: 1}
        self.p = {-1: 1, 0: 0}
        self.a = {}
        self.sides = {1: self._side(0), -1: self._side(-1)}
        self.current = {1: None, -1: None}

    def D(self, m: int, pm: int) -> RealBall:
        return self.theta * m - pm

    def partial_quotient(self, k: int) -> int:
        while k not in self.a:
            j = max(self.a) + 1 if self.a else 1
            Dprev = self.D(self.q[j - 2], self.p[j - 2])
            Dcur = self.D(self.q[j - 1], self.p[j - 1])
            if Dcur.contains_zero():
                raise Undecided("theta looks rational at this precision")
            aj = (-(Dprev / Dcur)).floor()
            if aj < 1:
                raise Undecided("inconsistent partial quotient")
            self.a[j] = aj
            self.q[j] = aj * self.q[j - 1] + self.q[j - 2]
            self.p[j] = aj * self.p[j - 1] + self.p[j - 2]
        return self.a[k]

    def _side(self, k: int):
        """Intermediate convergents (m, p_m) on one side of theta, one-sided residuals shrinking."""
        while True:
            start = 1 if k == -1 else 0
            top = self.partial_quotient(k + 2)
            for j in range(start, top):
                yield self.q[k] + j * self.q[k + 1], self.p[k] + j * self.p[k + 1]
            k += 2

    def first_hit(self, side: int, bound: RealBall) -> tuple[int, int, RealBall]:
        """Least m >= 1 with 0 < side*(m theta - p) < bound."""
        cur = self.current[side]
        while True:
            if cur is None:
                m, pm = next(self.sides[side])
                cur = (m, pm, self.D(m, pm))
            m, pm, Dm = cur
            hit = (abs(Dm)).lt(bound)
            if hit is None:
                raise Undecided("one-sided comparison")
            if hit:
                self.current[side] = cur
                return cur
            cur = None

    def residual(self, n: int, P: int) -> RealBall:
        return self.theta_full * n - self.xi - P


def _first_record(rot: _Rotation) -> Record:
    r = rot.theta_full - rot.xi
    P = (r + Fraction(1, 2)).floor()
    return Record(1, P, rot.residual(1, P))


def _next_record(rot: _Rotation, rec: Record) -> Record:
    s = rec.residual.require_sign()
    if s == 0:
        raise StopIteration
    bound = abs(rec.residual) * 2
    # delta > 0 needs m theta just below an integer, delta < 0 just above
    side = -1 if s > 0 else 1
    m, pm, _ = rot.first_hit(side, bound)
    # theta was reduced by its floor: m*theta_full - (pm + m*shift) = m*theta - pm
    n, P = rec.n + m, rec.P + pm + m * rot.shift
    return Record(n, P, rot.residual(n, P))


def _walk(theta: Oracle, xi: Oracle, prec: int, stop: Callable[[Record], bool],
          n_max: int | None) -> list[Record]:
    rot = _Rotation(theta(prec), xi(prec))
    rec = _first_record(rot)
    out = [rec]
    while not stop(rec):
        try:
            nxt = _next_record(rot, rec)
        except StopIteration:
            break
        if n_max is not None and nxt.n > n_max:
            break
        rec = nxt
        out.append(rec)
    return out


def record_minima(theta: Oracle, xi: Oracle, n_max: int | None = None, count: int | None = None,
                  start_prec: int = 128) -> list[Record]:
    """Record minima of ||n theta - xi|| for n = 1, 2, ... (up to n_max or count records)."""
    if n_max is None and count is None:
        raise ValueError("give n_max or count")

    def run(prec):
        seen = [0]

        def stop(rec):
            seen[0] += 1
            return count is not None and seen[0] >= count

        return _walk(theta, xi, prec, stop, n_max)

    return adaptive(run, start=start_prec)


def ostrowski_find(theta: Oracle, xi: Oracle, epsilon=None, count: int | None = None,
                   n_max: int | None = None, bound: int = KHINTCHINE_BOUND,
                   start_prec: int = 128):
    """Approximation indices for ||n theta - xi||.

    epsilon mode: the least n >= 1 with ||n theta - xi|| <= epsilon (an int).
    sequence mode (``count``): the first ``count`` record minima n with
    n * ||n theta - xi|| <= bound (a list of ints).  Infinitely many exist
    since by Minkowski ||n theta - xi|| < 1/(4n) holds infinitely often.
    """
    if epsilon is not None:
        eps = Fraction(epsilon)
        if eps <= 0:
            raise ValueError("epsilon must be positive")

        def run_eps(prec):
            def stop(rec):
                ok = rec.distance.le(eps)
                if ok is None:
                    raise Undecided("distance vs epsilon")
                return ok

            recs = _walk(theta, xi, prec, stop, n_max)
            last = recs[-1]
            if last.distance.le(eps):
                return last.n
            return None

        return adaptive(run_eps, start=start_prec)

    if count is None:
        raise ValueError("give epsilon or count")
    return [r.n for r in selected_records(theta, xi, count, bound, n_max, start_prec)]


def selected_records(theta: Oracle, xi: Oracle, count: int, bound: int = KHINTCHINE_BOUND,
                     n_max: int | None = None, start_prec: int = 128) -> list[Record]:
    """Record minima with n * ||n theta - xi|| <= bound, the first ``count`` of them."""

    def run(prec):
        chosen = []

        def stop(rec):
            ok = (rec.distance * rec.n).le(bound)
            if ok is None:
                raise Undecided("n * distance vs bound")
            if ok:
                chosen.append(rec)
            return len(chosen) >= count

        _walk(theta, xi, prec, stop, n_max)
        return chosen

    return adaptive(run, start=start_prec)
