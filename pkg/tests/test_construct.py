from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

import ekplus.construct as construct
from ekplus.construct import (
    choose_gamma_sign,
    imaginary_setup,
    lemma31_gamma,
    real_setup,
    thm1_imaginary,
    thm1_real,
    thm2_construct,
    unit_power_setup,
)
from ekplus.errors import DomainError, InadmissibleInput
from ekplus.exact import QuadField, RealSpec
from ekplus.padic import PAdic, PAdicSpec, embed_field
from ekplus.units import normalize_zeta
from ekplus.verify import padic_abs_difference
from oracles import residues_by_hand

I = QuadField(-1)(0, 1)
SQRT2 = QuadField(2)(0, 1)
GOLDEN = QuadField(5)(Fraction(1, 2), Fraction(1, 2))


def padic_val_of_residues(qm, rm, beta, p, K):
    x = beta.to_padic(p, K + 8) * PAdic._scaled(p, K, 0, qm) - PAdic._scaled(p, K, 0, rm)
    return x.prec if x.is_zero() else x.valuation()


# -- imaginary case -------------------------------------------------------------

def test_imaginary_first_records():
    beta = PAdicSpec(quad=I, branch=2)
    recs = thm1_imaginary(RealSpec.rat(1), beta, 5, 3)
    assert (recs[0].Q, recs[0].R, recs[0].padic_val) == (6, -8, 2)
    assert (6 * 57 + 8) % 125 == 100  # i = 57 mod 125 gives v_5(6i + 8) = 2
    setup = imaginary_setup(RealSpec.rat(1), beta, 5)
    r2 = setup.record(2)
    assert (r2.Q, r2.R, r2.padic_val) == (-14, -48, 4)
    assert setup.omega1 == QuadField(-1)(3, 4) and setup.t == 1 and setup.gamma == 1


@pytest.mark.parametrize("alpha,beta,p", [
    (RealSpec.rat(1), PAdicSpec(quad=I, branch=2), 5),
    (RealSpec.from_quad(SQRT2), PAdicSpec(quad=QuadField(-2)(Fraction(1, 2), 1)), 3),
    (RealSpec.rat(Fraction(-7, 3)), PAdicSpec(quad=QuadField(-3)(Fraction(1, 2), Fraction(1, 2))), 7),
])
def test_imaginary_trace_and_valuation_consistency(alpha, beta, p):
    setup = imaginary_setup(alpha, beta, p)
    lo, hi = setup.height_bracket()
    for n in range(1, 25):
        rec = setup.record(n)
        K = 40 + abs(setup.offset)
        assert rec.Q % p**K == residues_by_hand(beta.quad.field(setup.gamma), [(setup.omega1, n)], p, K)
        assert rec.R % p**K == residues_by_hand(beta.quad * setup.gamma, [(setup.omega1, n)], p, K)
        # closed form valuation equals the independent one
        assert Fraction(1, p**rec.padic_val) == padic_abs_difference(rec.Q, rec.R, beta, p)
        assert rec.padic_val >= 2 * n * setup.t - setup.c0
        Qb, Rb, Lb = setup.closed_forms(n, 200)
        assert Qb.contains(rec.Q) and Rb.contains(rec.R)
        ratio = rec.height / (rec.p ** (n * setup.t))
        assert lo.le(ratio.lower) is not False and ratio.le(hi.upper) is not False


def test_implicit_records_agree_with_exact(monkeypatch):
    beta = PAdicSpec(quad=I, branch=2)
    setup = imaginary_setup(RealSpec.rat(1), beta, 5)
    exact = [setup.record(n) for n in (6, 33, 50)]
    monkeypatch.setattr(construct, "EXACT_HEIGHT_BITS", 0)
    for ex in exact:
        im = setup.record(ex.n_params[0])
        assert not im.is_exact and im.padic_val == ex.padic_val
        qm, rm, K = im.residues
        assert (qm, rm) == (ex.Q % 5**K, ex.R % 5**K)
        assert im.height.contains(max(abs(ex.Q), abs(ex.R)))
        assert not (im.real_part.upper < ex.real_part.lower or ex.real_part.upper < im.real_part.lower)


# -- real case -------------------------------------------------------------------

def test_gamma_sign_examples():
    g = choose_gamma_sign(RealSpec.rat(0), SQRT2)
    assert (g.parity_i, g.gamma) == (0, QuadField(2)(1))
    g = choose_gamma_sign(RealSpec.rat(2), SQRT2)
    assert (g.parity_i, g.gamma) == (1, SQRT2)
    with pytest.raises(InadmissibleInput):
        choose_gamma_sign(RealSpec.from_quad(SQRT2), SQRT2)


@given(st.fractions(-20, 20, max_denominator=30), st.sampled_from([2, 3, 5, 7]))
def test_gamma_choice_invariants(a, d):
    beta = QuadField(d)(Fraction(1, 3), 1)
    if (QuadField(d)(a) - beta).is_zero():
        return
    g = choose_gamma_sign(RealSpec.rat(a), beta)
    assert g.gamma.conj() == g.gamma * (-1) ** g.parity_i
    assert g.gamma.is_integral() and (g.gamma * beta).is_integral()
    s = (a - beta.embed(80)) * (a - beta.embed(80, -1)) * (-1) ** g.parity_i
    assert s.upper < 0


def test_real_example_units_and_bracket():
    setup = real_setup(RealSpec.rat(0), SQRT2, 7)
    F = QuadField(2)
    assert (setup.omega1, setup.omega2, setup.t) == (F(3, 2), F(11, 6), 1)
    v = setup.bracket_value(-2, 3)
    assert v.contains_ball(v) and abs(v.to_float() + 0.454) < 1e-3
    assert setup.bracket_ok(-2, 3)
    _, _, T = setup.logs(128)
    assert T.contains(0)
    rec = setup.record(-2, 3)
    assert rec.padic_val >= 6 - setup.c0


@pytest.mark.parametrize("alpha", [RealSpec.rat(0), RealSpec.rat(1), RealSpec.rat(Fraction(-5, 2)),
                                   RealSpec.from_quad(QuadField(3)(0, 1))])
def test_real_records(alpha):
    setup = real_setup(alpha, SQRT2, 7)
    lo, hi = setup.height_bracket()
    beta = PAdicSpec(quad=SQRT2)
    for rec in thm1_real(alpha, SQRT2, 7, count=8):
        n1, n2 = rec.n_params
        assert setup.bracket_ok(n1, n2)
        assert rec.padic_val == setup.offset + 2 * n2 * setup.t
        assert rec.padic_val >= 2 * n2 * setup.t - setup.c0
        ratio = rec.height / RealSpec.rat(7).ball(64) ** (n2 * setup.t)
        assert lo.lower <= ratio.upper and ratio.lower <= hi.upper
        if rec.is_exact:
            assert Fraction(1, 7**rec.padic_val) == padic_abs_difference(rec.Q, rec.R, beta, 7)
            K = 30
            g = setup.gamma.gamma
            assert rec.Q % 7**K == residues_by_hand(g, [(setup.omega1, n1), (setup.omega2, n2)], 7, K)


def test_real_epsilon_mode():
    (rec,) = thm1_real(RealSpec.rat(0), SQRT2, 7, epsilon=Fraction(1, 100))
    assert rec.n_params[1] > 0


def test_field_type_errors():
    with pytest.raises(DomainError):
        thm1_imaginary(RealSpec.rat(0), SQRT2, 7, 1)
    with pytest.raises(DomainError):
        real_setup(RealSpec.rat(0), I, 5)


# -- unit-power construction -------------------------------------------------------

def test_lemma31_examples():
    emb = embed_field(QuadField(2), 7, 40)
    zeta, _ = normalize_zeta(2, 7, 40)
    g = lemma31_gamma(SQRT2, emb, PAdic.from_rational(Fraction(1, 3), 7, 40), zeta, Fraction(1, 3))
    assert g.gamma == QuadField(2)(6, 1)
    setup = unit_power_setup(RealSpec.from_quad(SQRT2), PAdicSpec(rational=Fraction(1, 3)), 7, 8)
    lam = setup.lam - 1
    assert lam.is_zero()  # lambda = 1 exactly up to the working precision
    assert setup.c.is_zero()
    g1 = lemma31_gamma(GOLDEN, embed_field(QuadField(5), 11, 40), PAdic.from_rational(Fraction(1, 2), 11, 40),
                       normalize_zeta(5, 11, 40)[0], Fraction(1, 2))
    assert g1.gamma == QuadField(5)(1)


def test_unit_power_rejects_root():
    with pytest.raises(InadmissibleInput):
        unit_power_setup(RealSpec.from_quad(SQRT2), PAdicSpec(quad=SQRT2, branch=3), 7, 4)


def _check_thm2(alpha, beta, p, Ns, branch=None):
    setup = unit_power_setup(alpha, beta, p, max(Ns), branch)
    lo, hi = setup.bracket()
    for rec in thm2_construct(alpha, beta, p, Ns, branch):
        n, N = rec.n_params
        assert n >= max(1, setup.n0())
        assert rec.padic_val >= N
        if rec.is_exact:
            assert Fraction(1, p**rec.padic_val) == padic_abs_difference(rec.Q, rec.R, beta, p)
            assert rec.Q > 0
        else:
            qm, rm, K = rec.residues
            a = alpha.exact_quad()
            assert qm == residues_by_hand(setup.gamma.gamma, [(setup.zeta, n)], p, K)
            assert rm == residues_by_hand(a * setup.gamma.gamma, [(setup.zeta, n)], p, K)
            assert padic_val_of_residues(qm, rm, beta, p, K) == rec.padic_val
        Qb, _, Lb = setup.closed_forms(n, 200)
        bound = Qb * abs(Lb)
        assert lo.lower <= bound.upper and bound.lower <= hi.upper
    return setup


def test_thm2_split_rational_beta():
    _check_thm2(RealSpec.from_quad(SQRT2), PAdicSpec(rational=Fraction(1, 3)), 7, [1, 2, 4, 8])


def test_thm2_inert_and_mixed():
    setup = _check_thm2(RealSpec.from_quad(GOLDEN), PAdicSpec(rational=Fraction(1, 3)), 7, [2, 4, 8])
    assert setup.splitting == "inert"
    assert setup.c_sqrt_coord_val is None or setup.c_sqrt_coord_val >= 8 - 2
    _check_thm2(RealSpec.from_quad(SQRT2), PAdicSpec(rational=Fraction(0)), 7, [1, 3, 6])


def test_thm2_quadratic_beta():
    beta = PAdicSpec(quad=QuadField(5)(0, 1), branch=4)
    _check_thm2(RealSpec.from_quad(GOLDEN), beta, 11, [1, 4, 8])
