import random
from fractions import Fraction

import pytest

from robba import (INF, CoeffRing, FactorizationError, SeriesMatrix, approximate_inverse, birkhoff_factor,
                   factor_full, is_plus_unit)
from robba.fixtures import laurent_times_plus, near_identity

HALF = Fraction(1, 2)
R = CoeffRing(5)


def mat(rows):
    return SeriesMatrix.from_dicts(R, rows)


def w(A, s=HALF):
    return A.gauss_norm(s).w


def test_approximate_inverse_identity():
    I = SeriesMatrix.identity(R, 2)
    X = approximate_inverse(I, HALF)
    assert w(X - I) == INF
    assert w(X.mul(I) - I) == INF


def test_approximate_inverse_nilpotent():
    U = mat([[{0: 1}, {-1: 5}], [{}, {0: 1}]])
    X = approximate_inverse(U, HALF)
    assert w(X - mat([[{0: 1}, {-1: -5}], [{}, {0: 1}]])) == INF
    assert w(X.mul(U) - U.identity_like()) == INF


def test_approximate_inverse_diagonal():
    U = mat([[{0: 1, -1: 5}, {}], [{}, {0: 1, 1: -5}]])
    X = approximate_inverse(U, HALF)
    assert X.is_exact()
    assert w(X.mul(U) - U.identity_like()) > 0
    assert not X.det().body_is_zero()


def test_birkhoff_identity():
    I = SeriesMatrix.identity(R, 2)
    bf = birkhoff_factor(I, HALF)
    assert w(bf.Y - I) == INF and w(bf.Z - I) == INF
    assert bf.achieved_floor == INF


def test_birkhoff_commuting_nilpotent():
    # w_2(5/u) = 1 > 0, so the split is legal at r = 2
    M = mat([[{0: 1}, {-1: 5, 1: 5}], [{}, {0: 1}]])
    bf = birkhoff_factor(M, 2)
    assert w(bf.Y - mat([[{0: 1}, {-1: 5}], [{}, {0: 1}]]), 2) == INF
    assert w(bf.Z - mat([[{0: 1}, {1: 5}], [{}, {0: 1}]]), 2) == INF


def test_birkhoff_precondition():
    M = mat([[{0: 1}, {-1: 5}], [{}, {0: 1}]])
    with pytest.raises(FactorizationError, match="precondition"):
        birkhoff_factor(M, HALF)


def test_birkhoff_random():
    rng = random.Random(3)
    for _ in range(15):
        n = rng.randint(1, 3)
        M = near_identity(rng, R, n)
        bf = birkhoff_factor(M, HALF, max_iters=20)
        assert bf.iterations <= 20
        assert bf.achieved_floor >= 10
        assert (bf.Y - bf.Y.identity_like()).is_strict_minus()
        assert bf.Z.is_plus()
        assert bf.contraction_monotone()


def test_birkhoff_iteration_cap():
    M = near_identity(random.Random(1), R, 2)
    bf = birkhoff_factor(M, HALF, max_iters=1)
    assert len(bf.deltas) <= 2


def test_factor_full_identity():
    I = SeriesMatrix.identity(R, 2)
    ff = factor_full(I, HALF)
    assert w(ff.V - I) == INF and w(ff.W - I) == INF


def test_factor_full_plus_input():
    U = mat([[{0: 2, 1: 1}, {2: 3}], [{1: 1}, {0: 1}]])
    ff = factor_full(U, HALF)
    assert ff.achieved_floor >= R.N
    assert ff.W.is_plus()
    # V is a plus unit, so W agrees with U up to one
    assert is_plus_unit(ff.V, HALF, R.N)


def test_factor_full_constructed():
    rng = random.Random(4)
    for _ in range(8):
        n = rng.randint(1, 3)
        U, V0, W0 = laurent_times_plus(rng, R, n)
        ff = factor_full(U, HALF)
        assert ff.achieved_floor >= R.N
        assert ff.W.is_plus()
        # X is a Laurent polynomial; V = X^-1 Y carries a certified truncation error
        assert ff.X.is_exact()
        assert w(ff.V) > -INF
        assert is_plus_unit(ff.V_inverse().mul(V0), HALF, R.N)


def test_factor_full_determinants():
    rng = random.Random(5)
    U, _, _ = laurent_times_plus(rng, R, 2)
    ff = factor_full(U, HALF)
    assert w(ff.V.mul(ff.W).det() - U.det()) >= R.N
