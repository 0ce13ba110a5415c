"""Independent brute-force oracles shared by the test modules."""

from fractions import Fraction

import mpmath

from ekplus.exact import QuadField


def residues_by_hand(coeff_elem, units, p, K):
    """Tr(coeff * prod u^e) mod p^K by plain modular arithmetic in (Z/p^K)[sqrt d]."""
    M = p**K
    d = coeff_elem.field.d

    def coords(x):
        return (x.a.numerator * pow(x.a.denominator, -1, M) % M, x.b.numerator * pow(x.b.denominator, -1, M) % M)

    def mul(u, v):
        return ((u[0] * v[0] + d * u[1] * v[1]) % M, (u[0] * v[1] + u[1] * v[0]) % M)

    acc = coords(coeff_elem)
    for u, e in units:
        base = coords(u if e >= 0 else u.inverse())
        r = (1, 0)
        for bit in bin(abs(e))[2:]:
            r = mul(r, r)
            if bit == "1":
                r = mul(r, base)
        acc = mul(acc, r)
    return 2 * acc[0] % M


def residue_valuation(x, p, K):
    """v_p of an integer known mod p^K (K when it vanishes)."""
    x %= p**K
    if x == 0:
        return K
    v = 0
    while x % p == 0:
        x //= p
        v += 1
    return v


def brute_fundamental_unit(d):
    """Smallest unit > 1: scan y = 1, 2, ... over x + y sqrt d (or halves when d = 1 mod 4)."""
    den = 2 if d % 4 == 1 else 1
    F = QuadField(d)
    y = 1
    while True:
        for sign in (-1, 1):  # smaller x first
            x2 = d * y * y + sign * den * den
            x = int(round(x2**0.5))
            for xx in (x - 1, x, x + 1):
                if xx > 0 and xx * xx == x2 and (den == 1 or (xx - y) % 2 == 0):
                    return F(Fraction(xx, den), Fraction(y, den))
        y += 1


def dist(n, theta, xi):
    y = n * theta - xi
    return abs(y - mpmath.nint(y))


def sqrt_mod(d, p, K, branch):
    """The root of x^2 = d mod p^K that is congruent to branch mod p, by Newton steps."""
    M = p**K
    r = branch % p
    for _ in range(K.bit_length() + 1):
        r = (r - (r * r - d) * pow(2 * r, -1, M)) % M
    assert (r * r - d) % M == 0 and r % p == branch % p
    return r
