from fractions import Fraction

import pytest
from hypothesis import assume, given, strategies as st

from ekplus.errors import DomainError, NonResidue, NotIntegral, PTwoUnsupported, RamifiedUnsupported
from ekplus.exact import QuadField
from ekplus.padic import (
    PAdic,
    PAdicQuad,
    PAdicSpec,
    embed_field,
    hensel_sqrt,
    legendre,
    padic_log,
    parse_padic_spec,
    zp_ratio_residue,
)

odd_primes = st.sampled_from([3, 5, 7, 11, 13, 17])


def brute_sqrt(d, p, N, branch):
    mod = p**N
    return [r for r in range(mod) if (r * r - d) % mod == 0 and r % p == branch % p]


# -- arithmetic against rationals ----------------------------------------------

@given(st.fractions(max_denominator=200), st.fractions(max_denominator=200), odd_primes)
def test_field_operations_match_rationals(x, y, p):
    N = 12
    X, Y = PAdic.from_rational(x, p, N), PAdic.from_rational(y, p, N)
    for got, want in ((X + Y, x + y), (X * Y, x * y), (X - Y, x - y)):
        diff = got - PAdic.from_rational(want, p, N + 10)
        assert diff.is_zero() or diff.valuation() >= min(got.prec, N - 4)
    if y != 0:
        q = X / Y
        diff = q - PAdic.from_rational(x / y, p, N + 10)
        assert diff.is_zero() or diff.valuation() >= q.prec


def test_valuation_is_exact_below_precision():
    x = PAdic.from_rational(Fraction(50, 3), 5, 10)
    assert x.valuation() == 2
    assert PAdic.from_rational(Fraction(1, 25), 5, 10).valuation() == -2


# -- square roots ----------------------------------------------------------------

def test_hensel_examples():
    assert hensel_sqrt(2, 7, 2, 3).residue() == 10
    assert hensel_sqrt(-1, 5, 3, 2).residue() == 57
    with pytest.raises(NonResidue):
        hensel_sqrt(5, 7, 4)
    with pytest.raises(RamifiedUnsupported):
        hensel_sqrt(7, 7, 4)
    with pytest.raises(PTwoUnsupported):
        hensel_sqrt(7, 2, 4)


@given(st.integers(-200, 200), odd_primes, st.integers(1, 3))
def test_hensel_matches_brute_force(d, p, N):
    assume(d % p != 0 and legendre(d, p) == 1)
    r = hensel_sqrt(d, p, N)
    assert [r.residue()] == brute_sqrt(d, p, N, r.residue() % p)
    assert 0 < r.residue() % p < p / 2


@given(st.integers(-500, 500), odd_primes, st.integers(5, 60))
def test_hensel_square_property(d, p, N):
    assume(d % p != 0 and legendre(d, p) == 1)
    r = hensel_sqrt(d, p, N)
    x = r * r - d
    assert x.is_zero() or x.valuation() >= N


def test_embedding_classification():
    e = embed_field(QuadField(2), 7, 10)
    assert (e.splitting, e.branch) == ("split", 3)
    assert embed_field(QuadField(5), 7, 10).splitting == "inert"
    e = embed_field(QuadField(-1), 5, 10)
    assert (e.splitting, e.branch) == ("split", 2)


@given(st.integers(-30, 30), st.integers(-30, 30), st.sampled_from([(2, 7), (-1, 5), (5, 11), (3, 13)]))
def test_split_embeddings_give_trace_and_norm(a, b, dp):
    d, p = dp
    F = QuadField(d)
    x = F(Fraction(a, 2), Fraction(b, 2)) if d % 4 == 1 else F(a, b)
    emb = embed_field(F, p, 20)
    s, c = emb.embed(x), emb.embed_conj(x)
    for got, want in ((s + c, x.trace()), (s * c, x.norm())):
        diff = got - want
        assert diff.is_zero() or diff.valuation() >= 18


# -- logarithm ----------------------------------------------------------------

def test_log_examples():
    assert padic_log(PAdic.from_rational(1, 5, 10)).is_zero()
    x = PAdic.from_rational(6, 5, 10)
    diff = padic_log(x * x) - padic_log(x) * 2
    assert diff.is_zero() or diff.valuation() >= 10 - 3
    with pytest.raises(DomainError):
        padic_log(PAdic.from_rational(2, 5, 10))


def _near_one(p, N, a):
    return PAdic.from_rational(1 + p * a, p, N)


@given(odd_primes, st.integers(-10**6, 10**6), st.integers(-10**6, 10**6))
def test_log_homomorphism(p, a, b):
    N = 50
    z, w = _near_one(p, N, a), _near_one(p, N, b)
    diff = padic_log(z * w) - padic_log(z) - padic_log(w)
    assert diff.is_zero() or diff.valuation() >= N - 4


@given(odd_primes, st.integers(-10**6, 10**6))
def test_log_of_inverse(p, a):
    N = 50
    z = _near_one(p, N, a)
    s = padic_log(z.inverse()) + padic_log(z)
    assert s.is_zero() or s.valuation() >= N - 4


@given(st.sampled_from([(5, 7), (2, 5), (3, 7), (-1, 7)]), st.integers(-10**4, 10**4), st.integers(-10**4, 10**4))
def test_log_sigma_equivariant_in_inert_extension(dp, a, b):
    d, p = dp
    N = 40
    Z = PAdicQuad(d, PAdic.from_rational(1 + p * a, p, N), PAdic.from_rational(p * b, p, N))
    lhs = padic_log(Z).sigma()
    rhs = padic_log(Z.sigma())
    diff = lhs - rhs
    assert diff.is_zero() or diff.valuation() >= N - 4
    inv = padic_log(Z.inverse()) + padic_log(Z)
    assert inv.is_zero() or inv.valuation() >= N - 4


# -- quotients -----------------------------------------------------------------

def test_zp_ratio_examples():
    P = lambda x: PAdic.from_rational(x, 5, 10)
    assert zp_ratio_residue(P(6), P(3), 3) == 2
    assert zp_ratio_residue(P(1), P(3), 2) == 17
    with pytest.raises(NotIntegral):
        zp_ratio_residue(P(1), P(5), 2)


@given(st.integers(1, 10**6), st.integers(1, 10**6), odd_primes)
def test_zp_ratio_congruence(a, b, p):
    assume(b % p != 0)
    n = zp_ratio_residue(PAdic.from_rational(a, p, 20), PAdic.from_rational(b, p, 20), 6)
    assert 0 <= n < p**6 and (n * b - a) % p**6 == 0


def test_parse_padic_specs():
    assert parse_padic_spec("rat:1/3") == PAdicSpec(rational=Fraction(1, 3))
    s = parse_padic_spec("quad:d=-1,a=0,b=1,branch=2")
    assert s.quad == QuadField(-1)(0, 1) and s.branch == 2
    assert parse_padic_spec("quad:d=2,a=5,b=0").is_rational
    with pytest.raises(NonResidue):
        parse_padic_spec("quad:d=5,a=0,b=1").to_padic(7, 10)
