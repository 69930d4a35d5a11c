from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from robba import (INF, CoeffRing, ErrorBound, Floor, LaurentSeries, NotAUnitError, NotCertifiedError,
                   SeriesMatrix)

HALF = Fraction(1, 2)
R = CoeffRing(5)


def poly(terms, window=(-40, 40)):
    return LaurentSeries.from_dict(R, terms, window)


def random_poly(rng, lo=-10, hi=10, vmax=8, count=None):
    count = rng.randint(1, 6) if count is None else count
    terms = {}
    for _ in range(count):
        c = rng.randrange(1, 5**4)
        terms[rng.randint(lo, hi)] = c * 5 ** rng.randint(0, vmax)
    return poly(terms)


def naive_w(terms, s):
    """min s*vp(c) + i straight from the dictionary."""
    out = INF
    for i, c in terms.items():
        if c == 0:
            continue
        v = 0
        while c % 5 == 0:
            c //= 5
            v += 1
        out = min(out, s * v + i)
    return out


def test_geometric_series():
    f = poly({0: 1, 1: -1}, window=(-5, 5))
    g = f.inverse()
    assert sorted(g.exponents()) == [0, 1, 2, 3, 4, 5]
    assert all(g.coeff(i).equals(R.one()) for i in range(6))
    assert g.tail_hi == "truncated"
    assert g.tail_lo == "exact"


def test_monomial_product():
    f = poly({-2: 1}) * poly({3: 1})
    assert sorted(f.exponents()) == [1]
    assert f.is_exact()


def test_multiply_back_inverse():
    f = poly({0: 1, -1: 5})
    g = f.inverse(HALF)
    assert (f * g - LaurentSeries.one(R)).gauss_norm(HALF).w >= R.N - 1
    g2 = f.inverse(2)
    assert g2.tail_lo == "truncated"
    assert (f * g2 - LaurentSeries.one(R)).gauss_norm(2).w >= R.N


def test_inverse_of_non_unit():
    # at s = 1 the terms 1 and 5/u tie, so neither dominates
    with pytest.raises(NotAUnitError, match="not a unit"):
        poly({0: 1, -1: 5}).inverse(Fraction(1))
    with pytest.raises(NotAUnitError):
        LaurentSeries.zero(R).inverse(HALF)


def test_gauss_norm_examples():
    for s in (Fraction(1, 3), HALF, Fraction(3)):
        assert poly({1: 1}).gauss_norm(s).w == 1
    assert poly({-3: 5}).gauss_norm(2).w == -1
    assert poly({-1: 5, 1: 1}).gauss_norm(HALF).w == Fraction(-1, 2)
    assert LaurentSeries.zero(R).gauss_norm(HALF).w == INF


def test_gauss_norm_matches_naive(rng):
    for _ in range(50):
        terms = {rng.randint(-10, 10): rng.randrange(1, 10**6) for _ in range(4)}
        f = poly(terms)
        for s in (Fraction(1, 3), HALF, 1, 2):
            assert f.gauss_norm(s).w == naive_w(terms, s)


def test_gauss_norm_rejects_nonpositive_s():
    with pytest.raises(ValueError):
        poly({0: 1}).gauss_norm(0)


def test_uncertified_norm():
    # expanded around the dominant 5/u, the inverse only converges for s < 1
    g = poly({0: 1, -1: 5}).inverse(HALF)
    assert g.gauss_norm(Fraction(3, 4)).w >= -1
    with pytest.raises(NotCertifiedError, match="not certified"):
        g.gauss_norm(2)


@settings(max_examples=60, deadline=None)
@given(st.dictionaries(st.integers(-10, 10), st.integers(1, 5**8), min_size=1, max_size=5),
       st.dictionaries(st.integers(-10, 10), st.integers(1, 5**8), min_size=1, max_size=5),
       st.sampled_from([Fraction(1, 3), HALF, Fraction(1), Fraction(2)]))
def test_valuation_laws(a, b, s):
    f, g = poly(a), poly(b)
    assert (f * g).gauss_norm(s).w == f.gauss_norm(s).w + g.gauss_norm(s).w
    assert (f + g).gauss_norm(s).w >= min(f.gauss_norm(s).w, g.gauss_norm(s).w)


def test_theta_examples():
    t = poly({-3: 1}).theta()
    assert t.coeff(-3).equals(R(-3))
    assert poly({0: 7}).theta().body_is_zero()
    assert poly({1: 1}).theta().coeff(1).equals(R.one())


def test_theta_leibniz(rng):
    for _ in range(50):
        f, g = random_poly(rng), random_poly(rng)
        lhs = (f * g).theta()
        rhs = f.theta() * g + f * g.theta()
        assert (lhs - rhs).body_is_zero()


def test_sigma_examples():
    assert sorted(poly({2: 1}).sigma().exponents()) == [10]
    R2 = CoeffRing(5, m=2)
    c = R2.gen() + R2(3)
    f = LaurentSeries.from_dict(R2, {0: c})
    assert f.sigma().coeff(0).equals(c.sigma())


def test_sigma_homomorphism(rng):
    for _ in range(30):
        f, g = random_poly(rng, -4, 4), random_poly(rng, -4, 4)
        assert ((f * g).sigma() - f.sigma() * g.sigma()).body_is_zero()
        assert ((f + g).sigma() - f.sigma() - g.sigma()).body_is_zero()


def test_sigma_scales_leading_exponent(rng):
    for _ in range(20):
        f = random_poly(rng, -4, 4, vmax=0, count=3)
        # w_1 after sigma is q times the lowest exponent when coefficients are units
        assert min(f.sigma().exponents()) == 5 * min(f.exponents())


def test_split_example():
    minus, plus = poly({-1: 5, 0: 3, 1: 1}).split()
    assert sorted(minus.exponents()) == [-1]
    assert sorted(plus.exponents()) == [0, 1]
    assert minus.is_strict_minus() and plus.is_plus()


def test_split_of_plus_series():
    f = poly({0: 2, 3: 5})
    minus, plus = f.split()
    assert minus.body_is_zero()
    assert (plus - f).body_is_zero()


def test_split_recombines(rng):
    for _ in range(100):
        f = random_poly(rng)
        minus, plus = f.split()
        assert (minus + plus - f).body_is_zero()
        m2, p2 = plus.split()
        assert m2.body_is_zero() and (p2 - plus).body_is_zero()


def test_floor_threshold():
    fl = Floor.at(12, HALF, Fraction(1, 10))
    assert fl.threshold(0) == 120      # s1 binds when more digits are needed
    assert fl.threshold(20) == -16     # s2 binds above the floor


def test_error_bound_bound():
    e = ErrorBound([(6, 0)], elo=6, ehi=INF)
    assert e.bound(HALF) == 6


def test_matrix_identity_inverse():
    I = SeriesMatrix.identity(R, 3)
    Iinv = I.inverse(HALF)
    assert (Iinv - I).gauss_norm(HALF).w == INF


def test_matrix_unipotent_inverse():
    M = SeriesMatrix.from_dicts(R, [[{0: 1}, {-1: 5}], [{}, {0: 1}]])
    Minv = M.inverse(HALF)
    want = SeriesMatrix.from_dicts(R, [[{0: 1}, {-1: -5}], [{}, {0: 1}]])
    assert (Minv - want).gauss_norm(HALF).w >= R.N


def test_matrix_inverse_multiply_back(rng):
    from robba.fixtures import near_identity
    for _ in range(10):
        n = rng.randint(1, 3)
        M = near_identity(rng, R, n)
        assert (M - M.identity_like()).gauss_norm(HALF).w >= HALF
        fl = Floor.at(16, HALF)
        Minv = M.inverse_near_identity(HALF, fl)
        assert (M.mul(Minv) - M.identity_like()).gauss_norm(HALF).w >= R.N


def test_matrix_det_and_gauss_norm():
    M = SeriesMatrix.from_dicts(R, [[{0: 2}, {1: 1}], [{-1: 5}, {0: 3}]])
    d = M.det()
    assert d.coeff(0).equals(R(1))    # 6 - 5
    assert M.gauss_norm(HALF).w == min(0, 1, Fraction(-1, 2), 0)
