from fractions import Fraction

import pytest

from ekplus.errors import InertUnsupported, PTwoUnsupported
from ekplus.exact import QuadField, is_squarefree
from ekplus.padic import embed_field
from ekplus.units import (
    find_p_unit,
    fundamental_unit,
    make_omega1_imaginary,
    make_omega1_real,
    normalize_zeta,
    p_unit_search,
    real_unit_system,
    unit_system,
    zeta_is_close_to_one,
)
from oracles import brute_fundamental_unit


def vp_embedded(x, emb):
    y = emb.embed(x)
    return y.valuation()


@pytest.mark.parametrize("d", [d for d in range(2, 51) if is_squarefree(d)])
def test_fundamental_unit_matches_brute_force(d):
    eps = fundamental_unit(d)
    assert eps == brute_fundamental_unit(d)
    assert abs(eps.norm()) == 1 and eps.is_integral()


def test_fundamental_unit_examples():
    assert fundamental_unit(2) == QuadField(2)(1, 1)
    assert fundamental_unit(5) == QuadField(5)(Fraction(1, 2), Fraction(1, 2))
    assert fundamental_unit(13) == QuadField(13)(Fraction(3, 2), Fraction(1, 2))


def test_omega1_real_examples():
    assert make_omega1_real(2) == QuadField(2)(3, 2)
    assert make_omega1_real(5) == QuadField(5)(Fraction(3, 2), Fraction(1, 2))
    assert make_omega1_real(13) == QuadField(13)(Fraction(11, 2), Fraction(3, 2))


def test_p_unit_search_examples():
    F = QuadField(2)
    emb = embed_field(F, 7, 20, 3)
    assert find_p_unit(F, emb)[0] == F(3, 1)
    assert p_unit_search(F, emb) == (F(11, 6), 1)
    G = QuadField(5)
    omega2, t = p_unit_search(G, embed_field(G, 11, 20, 4))
    assert (omega2, t) == (G(4, 1) ** 2, 1)
    with pytest.raises(InertUnsupported):
        real_unit_system(2, 5)


def test_omega1_imaginary_examples():
    F = QuadField(-1)
    assert make_omega1_imaginary(F, embed_field(F, 5, 20, 2)) == (F(3, 4), 1)
    G = QuadField(-2)
    assert make_omega1_imaginary(G, embed_field(G, 3, 20)) == (G(-1, 2), 1)
    with pytest.raises(InertUnsupported):
        unit_system(-1, 7)


@pytest.mark.parametrize("d,p", [(2, 7), (3, 11), (5, 11), (6, 5), (7, 3), (10, 3), (13, 3)])
def test_real_system_invariants(d, p):
    u = real_unit_system(d, p)
    emb = embed_field(QuadField(d), p, 40, u.extra["branch"])
    w1, w2, t = u.omega1, u.omega2, u.t
    assert w1.norm() == 1 and w1.embed(64).lower > 1
    assert 0 < w1.conj().embed(64).lower and w1.conj().embed(64).upper < 1
    assert w2.is_integral() and w2.norm() == p ** (2 * t) and w2.embed(64).lower > 0
    assert vp_embedded(w2, emb) == 0
    assert vp_embedded(w2.conj(), emb) == 2 * t


@pytest.mark.parametrize("d,p", [(-1, 5), (-1, 13), (-2, 3), (-3, 7), (-5, 7), (-7, 11)])
def test_imaginary_system_invariants(d, p):
    u = unit_system(d, p)
    emb = embed_field(QuadField(d), p, 40, u.extra["branch"])
    w, t = u.omega1, u.t
    assert w.is_integral() and w.norm() == p ** (2 * t)
    assert vp_embedded(w, emb) == 0 and vp_embedded(w.conj(), emb) == 2 * t
    re, im = w.complex_embed(64)
    assert (re * re + im * im).contains(p ** (2 * t))


@pytest.mark.parametrize("p,nu", [(3, 24), (5, 24), (7, 48), (11, 120)])
def test_normalize_zeta(p, nu):
    for d in (2, 3, 13):
        if d % p == 0:
            continue
        zeta, got = normalize_zeta(d, p, 20)
        assert got == nu
        assert zeta.norm() == 1 and zeta.embed(64).lower > 1
        assert zeta_is_close_to_one(zeta, embed_field(QuadField(d), p, 20))


def test_normalize_zeta_rejects_two():
    with pytest.raises(PTwoUnsupported):
        normalize_zeta(3, 2)
