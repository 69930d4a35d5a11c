from fractions import Fraction

import pytest

from conftest import fp_pow, schoolbook_mulmod
from robba import INF, CoeffElem, CoeffRing, PrecisionError, RingMismatchError
from robba.coeff import first_irreducible, is_irreducible_mod_p


def test_inverse_of_two():
    R = CoeffRing(5)
    x = R(2).inverse()
    assert (R(2) * x).equals(R.one())
    assert x.unit[0] * 2 % 5**12 == 1


def test_add_negative_is_zero(R25, rng):
    for _ in range(20):
        x = R25.random_element(rng, 0, 3)
        z = x + (-x)
        assert z.is_zero()
        assert z.vp() == INF


def test_zero_not_invertible(R5):
    with pytest.raises(PrecisionError, match="not invertible at precision"):
        R5.zero().inverse()


def test_mixed_rings_rejected():
    with pytest.raises(RingMismatchError):
        CoeffRing(5)(1) + CoeffRing(7)(1)


def test_bad_parameters():
    with pytest.raises(ValueError):
        CoeffRing(6)
    with pytest.raises(ValueError):
        CoeffRing(5, m=2, modulus=(1, 0, 1))  # x^2 + 1 splits mod 5


def test_modulus_is_irreducible():
    for p, m in [(2, 3), (3, 4), (5, 4), (7, 2)]:
        f = first_irreducible(p, m)
        assert len(f) == m + 1 and f[-1] == 1
        assert is_irreducible_mod_p(f, p)


def test_mul_matches_schoolbook(rng):
    R = CoeffRing(5, m=4)
    pk = 5**R.N
    for _ in range(30):
        a = [rng.randrange(pk) for _ in range(4)]
        b = [rng.randrange(pk) for _ in range(4)]
        if not any(x % 5 for x in a) or not any(x % 5 for x in b):
            continue
        got = R.from_poly(a) * R.from_poly(b)
        want = schoolbook_mulmod(a, b, R.modulus, pk)
        assert got.equals(R.from_poly(want))


def test_inverse_round_trip(rng):
    R = CoeffRing(7, m=3)
    for _ in range(20):
        x = R.random_element(rng, 0, 2)
        assert (x * x.inverse()).equals(R.one())


def test_frobenius_identity_on_zp(rng):
    R = CoeffRing(5)
    for _ in range(10):
        x = R.random_element(rng)
        for k in range(4):
            assert x.frobenius(k).equals(x)


def test_frobenius_image_satisfies_modulus():
    for p, m in [(5, 2), (3, 3), (2, 4)]:
        R = CoeffRing(p, m=m)
        img = R.from_poly(list(R.frobenius_image))
        # f(phi(x)) = 0 to working precision
        acc = R.zero()
        for c in reversed(R.modulus):
            acc = acc * img + R(c)
        assert acc.is_zero() or acc.vp() >= R.N


def test_frobenius_reduces_to_pth_power(rng):
    for p, m in [(5, 2), (3, 4), (2, 3)]:
        R = CoeffRing(p, m=m)
        g = R.gen()
        assert list(g.frobenius(1).residue()) == fp_pow([0, 1], p, R.modulus, p)
        for _ in range(5):
            x = R.random_unit(rng)
            assert list(x.frobenius(1).residue()) == fp_pow(list(x.residue()), p, R.modulus, p)


def test_frobenius_order_mod_p(rng):
    R = CoeffRing(5, m=2)
    for _ in range(10):
        x = R.random_unit(rng)
        assert x.frobenius(2).residue() == x.residue()
    R3 = CoeffRing(3, m=3)
    x = R3.random_unit(rng)
    assert x.frobenius(3).residue() == x.residue()


def test_frobenius_is_ring_homomorphism(rng):
    R = CoeffRing(5, m=3)
    for _ in range(15):
        x, y = R.random_element(rng, 0, 2), R.random_element(rng, 0, 2)
        assert (x + y).frobenius(1).equals(x.frobenius(1) + y.frobenius(1))
        assert (x * y).frobenius(1).equals(x.frobenius(1) * y.frobenius(1))


def test_sigma_is_q_power_frobenius():
    R = CoeffRing(3, a=2, m=4)
    x = R.gen() + R(1)
    assert x.sigma().equals(x.frobenius(2))


def test_vp_examples(R5):
    assert R5(125).vp() == 3
    assert R5(0).vp() == INF
    assert R5(Fraction(7, 25)).vp() == -2


def test_vp_of_products_counts_factors(rng, R5):
    for _ in range(50):
        a = rng.randrange(1, 10**6) * 5 ** rng.randrange(4)
        b = rng.randrange(1, 10**6) * 5 ** rng.randrange(4)
        # count factors of 5 in the integer product directly
        n, k = a * b, 0
        while n % 5 == 0:
            n //= 5
            k += 1
        assert (R5(a) * R5(b)).vp() == k == R5(a).vp() + R5(b).vp()


def test_vp_sum_at_least_min(rng):
    R = CoeffRing(5, m=2)
    for _ in range(50):
        x, y = R.random_element(rng, 0, 4), R.random_element(rng, 0, 4)
        s = x + y
        assert s.vp() >= min(x.vp(), y.vp())


def test_precision_not_overstated(R5):
    x = CoeffElem.from_integers(R5, 0, [1], 3)
    y = R5(1)
    assert (x + y).absprec == 3
    # a cancellation leaves only what is really known
    assert (x - y).is_zero() and (x - y).absprec == 3
