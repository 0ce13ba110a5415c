"""Reduced versions of the acceptance checks, fast enough for the command line."""

from __future__ import annotations

from fractions import Fraction


def _check_bound():
    from .exact import RealSpec
    from .verify import check_lower_bound, conjugate_lower_bound

    cert = conjugate_lower_bound((1, 0, -2), 7)
    res = check_lower_bound(RealSpec.from_quad(cert.alpha), cert.beta, 7, 200, cert)
    return res.ok, f"X^2-2 at 7, q <= 200, c0 = {cert.c0.lo_str(8)}"


def _check_imaginary():
    from .construct import thm1_imaginary
    from .exact import QuadField, RealSpec
    from .padic import PAdicSpec

    rec = thm1_imaginary(RealSpec.rat(1), PAdicSpec(quad=QuadField(-1)(0, 1), branch=2), 5, 1)[0]
    return (rec.Q, rec.R, rec.padic_val) == (6, -8, 2), f"first record ({rec.Q}, {rec.R}), v_5 = {rec.padic_val}"


def _check_real_units():
    from .exact import QuadField
    from .units import real_unit_system

    u = real_unit_system(2, 7)
    F = QuadField(2)
    ok = (u.omega1, u.omega2, u.t) == (F(3, 2), F(11, 6), 1)
    return ok, f"omega1 = {u.omega1}, omega2 = {u.omega2}, t = {u.t}"


def _check_unit_power():
    from .construct import thm2_construct
    from .exact import QuadField, RealSpec
    from .padic import PAdicSpec

    recs = thm2_construct(RealSpec.from_quad(QuadField(2)(0, 1)), PAdicSpec(rational=Fraction(1, 3)), 7, [2, 4])
    ok = all(r.padic_val >= r.n_params[1] for r in recs)
    return ok, "valuations " + ", ".join(f"{r.padic_val} >= {r.n_params[1]}" for r in recs)


def _check_log():
    from .padic import PAdic, padic_log

    p, N = 7, 30
    worst = N
    for a, b in ((8, 15), (50, 99), (1 + 7 * 3, 1 - 49)):
        x, y = PAdic.from_rational(a, p, N), PAdic.from_rational(b, p, N)
        d = padic_log(x * y) - padic_log(x) - padic_log(y)
        worst = min(worst, d.prec if d.is_zero() else d.valuation())
    return worst >= N - 4, f"homomorphism defect valuation >= {worst}"


def _check_fundamental_units():
    from .units import fundamental_unit

    bad = []
    for d in (2, 3, 5, 6, 7, 10, 13):
        eps = fundamental_unit(d)
        if abs(eps.norm()) != 1 or not eps.is_integral():
            bad.append(d)
    return not bad, "norm +-1 for d in 2..13" if not bad else f"failed for {bad}"


def _check_ostrowski():
    from .ostrowski import constant, ostrowski_find
    from .exact import RealBall

    golden = lambda prec: (RealBall.from_int(5, prec).sqrt() - 1) / 2
    ns = ostrowski_find(golden, constant(0), count=8)
    fib = [1, 2, 3, 5, 8, 13, 21, 34]
    return ns == fib, f"golden ratio indices {ns}"


def _check_strategies():
    from .exact import QuadField, RealSpec
    from .padic import PAdicSpec
    from .verify import scan_records

    a = RealSpec.from_quad(QuadField(3)(0, 1))
    b = PAdicSpec(rational=Fraction(1, 3))
    chains = [[(x.q, x.r) for x in scan_records(a, b, 7, 100, 2, s)] for s in ("exhaustive", "residue_window")]
    return chains[0] == chains[1], f"chains of length {len(chains[0])} agree"


CHECKS = [
    ("conjugate lower bound", _check_bound),
    ("imaginary construction", _check_imaginary),
    ("real unit system", _check_real_units),
    ("unit-power construction", _check_unit_power),
    ("p-adic logarithm", _check_log),
    ("fundamental units", _check_fundamental_units),
    ("inhomogeneous approximation", _check_ostrowski),
    ("scan strategies", _check_strategies),
]


def run_selftest() -> list[tuple[str, bool, str]]:
    out = []
    for name, fn in CHECKS:
        try:
            ok, detail = fn()
        except Exception as exc:  # a crash is a failed check, reported with its cause
            ok, detail = False, f"{type(exc).__name__}: {exc}"
        out.append((name, bool(ok), detail))
    return out
