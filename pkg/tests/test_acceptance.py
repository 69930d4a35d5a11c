"""Acceptance criteria 1 to 7, one test each, each printing a PASS/FAIL line.

The lines are also repeated in the terminal summary so that a plain
``pytest -v`` run shows them.
"""
import random
import time
from fractions import Fraction

from conftest import brute_as_degree, brute_lang_degree, check_descent, record_criterion
from robba import (CoeffRing, LaurentSeries, ResidueMatrix, SeriesMatrix, UnipotenceWitness, base_change,
                   birkhoff_factor, check_compatibility, factor_full, is_plus_unit, semistable_reduce,
                   solve_artin_schreier, solve_lang_mult, unit_root_reduce)
from robba.cli import selfcheck
from robba.coeff import first_irreducible
from robba.fixtures import (compatible_module, laurent_times_plus, near_identity, random_base, twisted_unipotent,
                            unit_root_phi)
from robba.residue import ResidueField
from robba.serialize import dumps

HALF = Fraction(1, 2)
R5 = CoeffRing(5, N=12)


def matrix(rows, ring=R5):
    return SeriesMatrix.from_dicts(ring, rows)


def finish(number, failures, t0, limit, detail):
    elapsed = time.perf_counter() - t0
    ok = not failures and elapsed < limit
    extra = f"; first failure: {failures[0]}" if failures else ""
    record_criterion(number, ok, f"{detail}; {elapsed:.1f} s (limit {limit} s){extra}")
    assert not failures, failures
    assert elapsed < limit


def test_criterion_1_valuation_laws():
    rng = random.Random(101)
    t0 = time.perf_counter()
    failures = []

    def rand_poly():
        terms = {}
        for _ in range(rng.randint(1, 6)):
            c = rng.randrange(1, 5**4) * 5 ** rng.randint(0, 8)
            if c % 5**9 == 0:
                continue
            terms[rng.randint(-10, 10)] = c
        return LaurentSeries.from_dict(R5, terms)

    for case in range(200):
        f, g = rand_poly(), rand_poly()
        for s in (Fraction(1, 3), HALF, Fraction(1), Fraction(2)):
            wf, wg = f.gauss_norm(s).w, g.gauss_norm(s).w
            if (f * g).gauss_norm(s).w != wf + wg:
                failures.append((case, s, "product"))
            if (f + g).gauss_norm(s).w < min(wf, wg):
                failures.append((case, s, "sum"))
    finish(1, failures, t0, 5, "200 pairs, s in {1/3, 1/2, 1, 2}, exact equality")


def test_criterion_2_birkhoff_reconstruction():
    rng = random.Random(102)
    t0 = time.perf_counter()
    failures, worst = [], None
    for case in range(100):
        n = rng.randint(1, 3)
        M = near_identity(rng, R5, n)
        if (M - M.identity_like()).gauss_norm(HALF).w < HALF:
            failures.append((case, "input"))
            continue
        bf = birkhoff_factor(M, HALF)
        recon = (bf.Y.mul(bf.Z) - M).gauss_norm(HALF).w
        worst = recon if worst is None else min(worst, recon)
        if not ((bf.Y - bf.Y.identity_like()).is_strict_minus() and bf.Z.is_plus()):
            failures.append((case, "shape"))
        if bf.achieved_floor < 10 or recon < 10:
            failures.append((case, "floor", bf.achieved_floor, recon))
        if not bf.contraction_monotone():
            failures.append((case, "contraction", bf.deltas))
    finish(2, failures, t0, 30, f"100 matrices, n <= 3, worst w_1/2(YZ - M) = {worst} (need >= 10)")


def test_criterion_3_full_factorization():
    rng = random.Random(103)
    t0 = time.perf_counter()
    failures = []
    for case in range(50):
        n = rng.randint(1, 3)
        U, V0, W0 = laurent_times_plus(rng, R5, n)
        ff = factor_full(U, HALF)
        recon = (ff.V.mul(ff.W) - U).gauss_norm(HALF).w
        if ff.achieved_floor < R5.N or recon < R5.N:
            failures.append((case, "reconstruction", ff.achieved_floor, recon))
        if not ff.W.is_plus():
            failures.append((case, "W not plus"))
        if not is_plus_unit(ff.V_inverse().mul(V0), HALF, R5.N):
            failures.append((case, "V^-1 V0 not a plus unit"))
    finish(3, failures, t0, 30, f"50 inputs, reconstruction floor {R5.N}")


def test_criterion_4_reduction_pipeline():
    rng = random.Random(104)
    t0 = time.perf_counter()
    failures = []
    for case in range(20):
        n = rng.randint(1, 3)
        M, U, C = twisted_unipotent(rng, R5, n)
        red = semistable_reduce(M, UnipotenceWitness(U), HALF)
        ch, va = red.checks, red.values
        if not ch["output_plus_only"]:
            failures.append((case, "poles"))
        if not ch["paths_agree"] or min(va["path_agreement_phi"], va["path_agreement_n"]) < R5.N:
            failures.append((case, "paths"))
        if not (ch["compatible_before"] and ch["compatible_after"]):
            failures.append((case, "compatibility", va["compatibility_before"], va["compatibility_after"]))
        if va["residue_power"] < R5.N:
            failures.append((case, "residue", va["residue_power"]))
    finish(4, failures, t0, 60, "20 twisted modules, n <= 3, pole depth <= 5")


def test_criterion_5_compatibility_preserved():
    rng = random.Random(105)
    t0 = time.perf_counter()
    failures, worst = [], None
    for case in range(100):
        n = rng.randint(1, 3)
        M = compatible_module(rng, R5, n)
        V = random_base(rng, R5, n)
        before = check_compatibility(M)
        after = check_compatibility(base_change(M, V))
        worst = after.residual.w if worst is None else min(worst, after.residual.w)
        if not (before.holds and after.holds):
            failures.append((case, before.residual.w, after.residual.w))
    finish(5, failures, t0, 30, f"100 pairs, worst residual w_1/2 = {worst} (need >= {R5.N})")


def test_criterion_6_unit_root_descent():
    t0 = time.perf_counter()
    failures = []
    K5 = ResidueField(5, first_irreducible(5, 1))

    # (a) Phi_0 = 2: Lang needs F_625, confirmed by enumerating fields
    sol = solve_lang_mult(ResidueMatrix.constant(K5, [[K5(2)]], 30))
    brute = brute_lang_degree(5, 2, 4)
    descent = unit_root_reduce(matrix([[{0: 2}]])).m
    if not (sol.m == brute == descent == 4):
        failures.append(("a", sol.m, brute, descent))

    # (b) x^5 - x = 1 has no root below degree 5
    sol = solve_artin_schreier(ResidueMatrix.constant(K5, [[K5(1)]], 30))
    if not (sol.m == 5 == brute_as_degree(5, 1, 5)):
        failures.append(("b", sol.m))

    # (c) random unit-root matrices, verified coefficientwise to t-degree 30
    rng = random.Random(106)
    for case in range(50):
        p = rng.choice((5, 7))
        Phi = unit_root_phi(rng, CoeffRing(p), rng.randint(1, 2))
        res = unit_root_reduce(Phi, T=30)
        try:
            assert res.d == 1
            check_descent(Phi, res)
        except AssertionError as exc:
            failures.append(("c", case, p, str(exc)))

    # (d) p = 2 needs the second step and a congruence modulo 4
    R2 = CoeffRing(2)
    for rows in ([[{0: 1, 1: 2}]], [[{0: 1, 1: 1}, {2: 1}], [{1: 1}, {0: 1, 3: 2}]]):
        Phi = matrix(rows, R2)
        res = unit_root_reduce(Phi, T=30)
        try:
            assert res.d == 2 and any(s["step"] == 2 for s in res.transcript)
            check_descent(Phi, res)
        except AssertionError as exc:
            failures.append(("d", rows, str(exc)))
    finish(6, failures, t0, 60, "(a) m = 4, (b) m = 5, (c) 50 random p in {5, 7}, T = 30, (d) p = 2 mod 4")


def test_criterion_7_determinism():
    t0 = time.perf_counter()
    a = dumps(selfcheck(0))
    b = dumps(selfcheck(0))
    failures = [] if a == b else ["reports differ"]
    finish(7, failures, t0, 600, f"selfcheck twice, {len(a)} bytes each, byte-identical = {a == b}")
