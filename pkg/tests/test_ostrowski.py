from fractions import Fraction

import mpmath
import pytest
from hypothesis import given, settings, strategies as st

from ekplus.exact import QuadField, RealBall
from ekplus.ostrowski import constant, ostrowski_find, record_minima, selected_records
from oracles import dist

mpmath.mp.dps = 60


def quad_oracle(d, a, b=1):
    x = QuadField(d)(a, b)
    return lambda prec: x.embed(prec)


def brute_records(theta, xi, n_max):
    best, out = None, []
    for n in range(1, n_max + 1):
        v = dist(n, theta, xi)
        if best is None or v < best:
            best = v
            out.append(n)
    return out


def test_golden_ratio_fibonacci():
    golden = lambda prec: (RealBall.from_int(5, prec).sqrt() - 1) / 2
    ns = [r.n for r in record_minima(golden, constant(0), n_max=100)]
    assert ns == [1, 2, 3, 5, 8, 13, 21, 34, 55, 89]
    g = (mpmath.sqrt(5) - 1) / 2
    assert abs(dist(13, g, 0) - mpmath.mpf("0.0344")) < 1e-3
    assert 13 * dist(13, g, 0) <= 3


def test_epsilon_examples():
    theta = quad_oracle(2, -1)
    n = ostrowski_find(theta, constant(Fraction(1, 2)), epsilon=Fraction(1, 20))
    t = mpmath.sqrt(2) - 1
    assert dist(n, t, 0.5) <= 0.05
    assert all(dist(m, t, 0.5) > 0.05 for m in range(1, n))
    assert ostrowski_find(theta, constant(Fraction(1, 3)), epsilon=Fraction(1, 2)) == 1


cases = st.tuples(st.sampled_from([2, 3, 5, 6, 7, 10, 11, 13, 14, 15, 17, 19, 21, 22, 23]),
                  st.integers(-3, 3), st.fractions(0, 1, max_denominator=97))


@settings(max_examples=30)
@given(cases)
def test_record_minima_match_brute_force(case):
    d, a, xi = case
    recs = record_minima(quad_oracle(d, a), constant(xi), n_max=3000)
    theta = mpmath.sqrt(d) + a
    assert [r.n for r in recs] == brute_records(theta, mpmath.mpf(xi.numerator) / xi.denominator, 3000)


@settings(max_examples=20)
@given(cases)
def test_selected_records_are_certified(case):
    d, a, xi = case
    for rec in selected_records(quad_oracle(d, a), constant(xi), 12):
        assert (rec.distance * rec.n).le(3) is True


@settings(max_examples=15)
@given(cases, st.integers(1, 400))
def test_epsilon_mode_is_minimal(case, k):
    d, a, xi = case
    eps = Fraction(1, k + 2)
    n = ostrowski_find(quad_oracle(d, a), constant(xi), epsilon=eps)
    theta, x = mpmath.sqrt(d) + a, mpmath.mpf(xi.numerator) / xi.denominator
    e = mpmath.mpf(eps.numerator) / eps.denominator
    assert dist(n, theta, x) <= e
    assert all(dist(m, theta, x) > e for m in range(1, n))


def test_count_or_epsilon_required():
    with pytest.raises(ValueError):
        ostrowski_find(quad_oracle(2, 0), constant(0))
    with pytest.raises(ValueError):
        ostrowski_find(quad_oracle(2, 0), constant(0), epsilon=0)
