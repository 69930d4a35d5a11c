import random
from fractions import Fraction

import pytest

from robba import CoeffRing, LaurentSeries, SeriesMatrix
from robba.fixtures import compatible_module
from robba.residue import ResidueField, ResidueMatrix
from robba.serialize import (DocumentError, coeff_from_json, coeff_to_json, dumps, loads, matrix_from_json,
                             matrix_to_json, module_from_json, module_to_json, parse_frac, parse_int,
                             residue_from_json, residue_to_json, ring_from_json, ring_to_json,
                             series_from_json, series_to_json)

R = CoeffRing(5)


def test_scalars():
    assert parse_int("-17") == -17
    assert parse_frac("3/25") == Fraction(3, 25)
    with pytest.raises(DocumentError, match="boolean"):
        parse_int(True)
    with pytest.raises(DocumentError):
        parse_frac("1/0")


def test_ring_round_trip():
    for ring in (CoeffRing(5), CoeffRing(3, a=2, m=4), CoeffRing(7, N=20)):
        assert ring_from_json(ring_to_json(ring)) == ring


def test_coeff_round_trip():
    R2 = CoeffRing(5, m=2)
    rng = random.Random(31)
    for _ in range(20):
        x = R2.random_element(rng, -2, 3)
        assert coeff_from_json(R2, coeff_to_json(x)).equals(x)


def test_series_round_trip_exact():
    f = LaurentSeries.from_dict(R, {-3: 5, 0: Fraction(2, 25), 4: -1})
    g = series_from_json(R, series_to_json(f))
    assert (f - g).body_is_zero()
    assert g.is_exact()


def test_series_round_trip_keeps_error():
    g = LaurentSeries.from_dict(R, {0: 1, -1: 5}).inverse(Fraction(1, 2))
    doc = series_to_json(g)
    h = series_from_json(R, doc)
    assert series_to_json(h) == doc
    assert h.gauss_norm(Fraction(1, 2)).w == g.gauss_norm(Fraction(1, 2)).w


def test_series_shorthand():
    f = series_from_json(R, {"-1": "5", "0": "1"})
    assert sorted(f.exponents()) == [-1, 0]


def test_series_rejects_non_p_power_denominator():
    with pytest.raises(DocumentError, match="not in Z"):
        series_from_json(R, {"0": "1/2"})


def test_matrix_and_module_round_trip():
    M = compatible_module(random.Random(32), R, 2)
    text = dumps(module_to_json(M))
    M2 = module_from_json(R, loads(text))
    assert dumps(module_to_json(M2)) == text
    A = SeriesMatrix.identity(R, 3)
    assert dumps(matrix_to_json(matrix_from_json(R, matrix_to_json(A)))) == dumps(matrix_to_json(A))


def test_matrix_must_be_square():
    with pytest.raises(DocumentError, match="square"):
        matrix_from_json(R, [[{}, {}]])


def test_residue_round_trip():
    K = ResidueField(5, [2, 4, 1])  # x^2 + 4x + 2
    D = ResidueMatrix.from_entries(K, [[{0: K(1), 3: K.from_coords([0, 1])}]], 10)
    doc = residue_to_json(D)
    assert residue_from_json(5, doc) == D


def test_residue_negative_exponent_rejected():
    with pytest.raises(DocumentError, match="negative"):
        residue_from_json(5, {"m": "1", "T": "5", "entries": [[{"-1": "1"}]]})


def test_loads_reports_position():
    with pytest.raises(DocumentError, match=r"line 2 column \d+"):
        loads('{"a": 1,\n  "b": }')


def test_dumps_canonical():
    text = dumps({"b": "1", "a": ["2"]})
    assert text == dumps(loads(text))
    assert text.endswith("\n") and text.index('"a"') < text.index('"b"')
