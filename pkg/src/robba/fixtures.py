"""Random input generators and the bundled fixture corpus.

The generators build inputs whose answers are known by construction:
matrices close to the identity for the Birkhoff engine, products of a
Laurent-polynomial unit and a plus unit for the full factorization,
constant unipotent modules twisted by a known witness, and unit-root
Frobenius matrices.  All of them take an explicit ``random.Random``.

:func:`corpus` returns the pipeline documents that ``--selfcheck`` runs.
Each carries an ``expect`` block of values its report must reproduce.
"""
from __future__ import annotations

import random
from fractions import Fraction

from .coeff import CoeffRing
from .residue import ResidueMatrix
from .serialize import matrix_to_json, module_to_json, ring_to_json
from .series import Floor, SeriesMatrix
from .sigma_nabla import SigmaNablaModule, base_change

HALF = Fraction(1, 2)


def _unit_residue(rng: random.Random, p: int, top: int) -> int:
    c = rng.randint(1, top)
    return c if c % p else c + 1


# -- factor ------------------------------------------------------------------


def near_identity(rng: random.Random, ring: CoeffRing, n: int, window=None) -> SeriesMatrix:
    """M with certified w_{1/2}(M - I) >= 1/2 and a small pole part.

    A term c u^i has vp(c) >= 3|i| for i < 0, vp >= 1 at i = 0 and vp >= 0
    for i > 0, so every term of M - I has w_{1/2} >= 1/2.
    """
    p = ring.p

    def entry(diag):
        d = {}
        for _ in range(rng.randint(1, 4)):
            i = rng.randint(-3, 4)
            if i < 0:
                v = rng.randint(-3 * i, -3 * i + 3)
            elif i == 0:
                v = rng.randint(1, 4)
            else:
                v = rng.randint(0, 3)
            d[i] = d.get(i, 0) + _unit_residue(rng, p, p**6) * p**v
        if diag:
            d[0] = d.get(0, 0) + 1
        return d

    kw = {} if window is None else {"window": window}
    return SeriesMatrix.from_dicts(ring, [[entry(i == j) for j in range(n)] for i in range(n)], **kw)


def elementary(rng: random.Random, ring: CoeffRing, n: int, exps, vmax: int = 2) -> SeriesMatrix:
    """I + c u^k E_ij with i != j and k drawn from ``exps``."""
    i, j = rng.sample(range(n), 2)
    rows = [[{0: 1} if a == b else {} for b in range(n)] for a in range(n)]
    rows[i][j] = {rng.choice(list(exps)): _unit_residue(rng, ring.p, 24) * ring.p**rng.randint(0, vmax)}
    return SeriesMatrix.from_dicts(ring, rows)


def laurent_unit(rng: random.Random, ring: CoeffRing, n: int) -> SeriesMatrix:
    """A Laurent-polynomial unit: a monomial for n = 1, else a product of minus elementary matrices."""
    if n == 1:
        return SeriesMatrix.from_dicts(ring, [[{-rng.randint(0, 3): _unit_residue(rng, ring.p, 24)}]])
    V = elementary(rng, ring, n, range(-3, 0))
    for _ in range(rng.randint(0, 2)):
        V = V * elementary(rng, ring, n, range(-3, 0))
    return V


def plus_unit(rng: random.Random, ring: CoeffRing, n: int) -> SeriesMatrix:
    """A plus matrix with unit diagonal constant term and integer higher terms."""
    rows = [[{} for _ in range(n)] for _ in range(n)]
    for a in range(n):
        for b in range(n):
            d = {0: _unit_residue(rng, ring.p, 24)} if a == b else {}
            for _ in range(2):
                e = rng.randint(1, 3)
                d[e] = d.get(e, 0) + rng.randint(-30, 30)
            rows[a][b] = d
    return SeriesMatrix.from_dicts(ring, rows)


def laurent_times_plus(rng: random.Random, ring: CoeffRing, n: int):
    """(U, V0, W0) with U = V0 W0, V0 a Laurent-polynomial unit and W0 a plus unit."""
    V0 = laurent_unit(rng, ring, n)
    W0 = plus_unit(rng, ring, n)
    return V0 * W0, V0, W0


# -- sigma-nabla -------------------------------------------------------------


def unipotent_constants(rng: random.Random, ring: CoeffRing, n: int, window=None):
    """Constant compatible (Phi, N): Phi = diag(q^k_i), N_ij free exactly where k_j = k_i + 1."""
    q = ring.q
    ks = list(range(n)) if rng.random() < 0.7 else sorted(rng.randint(0, n - 1) for _ in range(n))
    phi = [[q**ks[i] if i == j else 0 for j in range(n)] for i in range(n)]
    N = [[_unit_residue(rng, ring.p, 24) if ks[j] == ks[i] + 1 else 0 for j in range(n)] for i in range(n)]
    return SigmaNablaModule.constant(ring, phi, N, window=window)


def twisted_unipotent(rng: random.Random, ring: CoeffRing, n: int, depth: int = 5, r=HALF, F: int = 16):
    """(M, U, C): a constant unipotent module C twisted so that U is a unipotence witness for M.

    U = T W0 with T unipotent upper triangular carrying poles of depth <=
    ``depth`` and W0 a plus unit; M = base_change(C, U^{-1}).  M is built at
    a rounding level raised by the conditioning of U at r and at r/q, so
    that the witness still validates after Frobenius amplifies the error.
    """
    q = ring.q
    win = (-130, 130)
    rows = [[{0: 1} if i == j else {} for j in range(n)] for i in range(n)]
    for i in range(n):
        for j in range(i + 1, n):
            if rng.random() < 0.8:
                rows[i][j] = {-rng.randint(1, depth): _unit_residue(rng, ring.p, 24)}
    T = SeriesMatrix.from_dicts(ring, rows, window=win)
    W0rows = [[{} for _ in range(n)] for _ in range(n)]
    for i in range(n):
        for j in range(n):
            d = {0: 1} if i == j else {}
            for _ in range(rng.randint(0, 2)):
                e = rng.randint(1, 3)
                d[e] = d.get(e, 0) + rng.randint(-20, 20)
            W0rows[i][j] = d
    W0 = SeriesMatrix.from_dicts(ring, W0rows, window=win)
    U = T * W0
    Uinv = U.inverse(r, Floor.at(F, r, r / q))
    kappa = (max(0, -U.w(r)) + max(0, -Uinv.w(r))
             + q * (max(0, -U.w(r / q)) + max(0, -Uinv.w(r / q))))
    fl = Floor.at(F + 2 * kappa, r, r / q)
    Uinv = U.inverse(r, fl)
    C = unipotent_constants(rng, ring, n, window=win)
    M = base_change(C, Uinv, Vinv=U, floor=fl)
    return M, U, C


def random_base(rng: random.Random, ring: CoeffRing, n: int, window=(-60, 60)) -> SeriesMatrix:
    """An invertible change of basis: elementary factors with exponents in [-2, 2], times a scalar unit.

    The scalar c + p k u^e (e = 1 or 2) has a dominant constant term, so its
    inverse converges fast enough to be certified inside the window.
    """
    V = SeriesMatrix.identity(ring, n, window)
    if n > 1:
        for _ in range(rng.randint(1, 3)):
            V = V * elementary(rng, ring, n, range(-2, 3), vmax=1).with_window(*window)
    c = _unit_residue(rng, ring.p, 24)
    scal = {0: c, rng.choice([1, 2]): ring.p * rng.randint(1, 4)}
    D = SeriesMatrix.from_dicts(ring, [[scal if i == j else {} for j in range(n)] for i in range(n)], window=window)
    return V * D


def compatible_module(rng: random.Random, ring: CoeffRing, n: int, window=(-60, 60)) -> SigmaNablaModule:
    """A compatible module: constant unipotent data moved by an exact elementary change of basis."""
    C = unipotent_constants(rng, ring, n, window=window)
    if n == 1:
        k = rng.randint(-2, 2)
        V = SeriesMatrix.from_dicts(ring, [[{k: 1}]], window=window)
        Vinv = SeriesMatrix.from_dicts(ring, [[{-k: 1}]], window=window)
        return base_change(C, V, Vinv)
    V = SeriesMatrix.identity(ring, n, window)
    Vinv = SeriesMatrix.identity(ring, n, window)
    for _ in range(rng.randint(1, 3)):
        E = elementary(rng, ring, n, range(-2, 3), vmax=1).with_window(*window)
        Einv = SeriesMatrix.scalar(ring, n, 2, window) - E
        V, Vinv = V * E, Einv * Vinv
    return base_change(C, V, Vinv)


# -- unit root ---------------------------------------------------------------


def unit_root_phi(rng: random.Random, ring: CoeffRing, n: int, degree: int = 3, T: int = 30) -> SeriesMatrix:
    """An integral plus Laurent polynomial matrix whose reduction has invertible constant term."""
    p = ring.p
    while True:
        rows = [[{j: rng.randrange(p**3) for j in range(rng.randint(1, degree + 1))} for _ in range(n)]
                for _ in range(n)]
        M = SeriesMatrix.from_dicts(ring, rows)
        if ResidueMatrix.from_series_matrix(M, T).is_invertible():
            return M


# -- the corpus --------------------------------------------------------------


def _doc(name, task, ring, inputs, options=None, expect=None):
    return {"name": name, "task": task, "ring": ring_to_json(ring), "inputs": inputs,
            "options": options or {}, "expect": expect or {}}


def corpus() -> list[dict]:
    """The fixture documents run by ``--selfcheck``, with their expected report values."""
    R5 = CoeffRing(5)
    R2 = CoeffRing(2)
    docs = []
    I2 = [[{"0": "1"}, {}], [{}, {"0": "1"}]]
    docs.append(_doc("factor_identity", "factor", R5, {"U": I2}, {"r": "1/2"},
                     {"V": I2, "W": I2}))
    docs.append(_doc("approximate_inverse_unipotent", "factor", R5,
                     {"U": [[{"0": "1"}, {"-1": "5"}], [{}, {"0": "1"}]]},
                     {"r": "1/2", "method": "approximate_inverse"},
                     {"X": [[{"0": "1"}, {"-1": "-5"}], [{}, {"0": "1"}]], "residual": "inf"}))
    docs.append(_doc("birkhoff_nilpotent_split", "factor", R5,
                     {"U": [[{"0": "1"}, {"-1": "125", "1": "5"}], [{}, {"0": "1"}]]},
                     {"r": "1/2", "method": "birkhoff"},
                     {"Y": [[{"0": "1"}, {"-1": "125"}], [{}, {"0": "1"}]],
                      "Z": [[{"0": "1"}, {"1": "5"}], [{}, {"0": "1"}]]}))
    docs.append(_doc("factor_plus_input", "factor", R5,
                     {"U": [[{"0": "2", "1": "1"}, {"2": "3"}], [{"1": "1"}, {"0": "1"}]]}, {"r": "1/2"},
                     {"V_plus_unit": True}))
    docs.append(_doc("compatibility_u4", "verify", R5,
                     {"module": {"phi": [[{"4": "1"}]], "nconn": [[{"0": "1"}]]}}, {}, {}))
    docs.append(_doc("compatibility_diag_1_q", "verify", R5,
                     {"module": {"phi": [[{"0": "1"}, {}], [{}, {"0": "5"}]],
                                 "nconn": [[{}, {"0": "1"}], [{}, {}]]}}, {}, {"unipotent": True}))
    docs.append(_doc("base_change_by_u", "verify", R5,
                     {"module": {"phi": [[{"0": "1"}]], "nconn": [[{}]]}, "V": [[{"1": "1"}]]}, {},
                     {"phi_after": [[{"4": "1"}]], "nconn_after": [[{"0": "1"}]]}))
    docs.append(_doc("reduce_rank_one", "reduce", R5,
                     {"module": {"phi": [[{"-4": "1"}]], "nconn": [[{"0": "-1"}]]}, "witness": [[{"1": "1"}]]},
                     {"r": "1/2"}, {"phi": [[{"0": "1"}]], "nconn": [[{}]]}))
    win = (-80, 80)
    C = SigmaNablaModule.constant(R5, [[1, 0], [0, 5]], [[0, 1], [0, 0]], window=win)
    T = SeriesMatrix.from_dicts(R5, [[{0: 1}, {-1: 1}], [{}, {0: 1}]], window=win)
    Tinv = SeriesMatrix.from_dicts(R5, [[{0: 1}, {-1: -1}], [{}, {0: 1}]], window=win)
    M = base_change(C, Tinv, Vinv=T)
    docs.append(_doc("reduce_twisted_rank_two", "reduce", R5,
                     {"module": module_to_json(M), "witness": matrix_to_json(T)},
                     {"r": "1/2", "window": [str(win[0]), str(win[1])]},
                     {"phi": [[{"0": "1"}, {}], [{}, {"0": "5"}]], "nconn": [[{}, {"0": "1"}], [{}, {}]]}))
    docs.append(_doc("unitroot_trivial", "unitroot", R5, {"phi": I2}, {"T": "30"},
                     {"d": "1", "m": "1", "residual": "inf"}))
    docs.append(_doc("unitroot_lang_two", "unitroot", R5, {"phi": [[{"0": "2", "1": "5"}]]}, {"T": "30"},
                     {"d": "1", "m": "4"}))
    docs.append(_doc("unitroot_p2", "unitroot", R2, {"phi": [[{"0": "1", "1": "2"}]]}, {"T": "30"},
                     {"d": "2", "m": "1"}))
    docs.append(_doc("lang_constant_two", "unitroot", R5,
                     {"B": {"m": "1", "T": "30", "entries": [[{"0": ["2"]}]]}}, {"solver": "lang"},
                     {"m": "4"}))
    docs.append(_doc("artin_schreier_one", "unitroot", R5,
                     {"B": {"m": "1", "T": "30", "entries": [[{"0": ["1"]}]]}}, {"solver": "artin_schreier"},
                     {"m": "5"}))
    return docs


def smoke_documents(seed: int) -> list[dict]:
    """Randomized property documents for the self-check, generated from ``seed``."""
    R5 = CoeffRing(5)
    docs = [
        _doc("smoke_birkhoff", "factor", R5, {"U": {"random": "near_identity", "n": "2"}},
             {"r": "1/2", "method": "birkhoff"}),
        _doc("smoke_factor_full", "factor", R5, {"U": {"random": "laurent_times_plus", "n": "2"}},
             {"r": "1/2"}),
        _doc("smoke_compatibility", "verify", R5,
             {"module": {"random": "compatible_module", "n": "2"}, "V": {"random": "random_base", "n": "2"}}),
        _doc("smoke_unitroot", "unitroot", CoeffRing(7), {"phi": {"random": "unit_root_phi", "n": "2"}},
             {"T": "30"}),
    ]
    for d in docs:
        d["seed"] = str(seed)
    return docs


GENERATORS = {
    "near_identity": lambda rng, ring, n: near_identity(rng, ring, n),
    "laurent_times_plus": lambda rng, ring, n: laurent_times_plus(rng, ring, n)[0],
    "plus_unit": plus_unit,
    "random_base": random_base,
    "unit_root_phi": lambda rng, ring, n: unit_root_phi(rng, ring, n),
    "compatible_module": compatible_module,
}


__all__ = [
    "near_identity", "elementary", "laurent_unit", "plus_unit", "laurent_times_plus",
    "unipotent_constants", "twisted_unipotent", "random_base", "compatible_module",
    "unit_root_phi", "corpus", "smoke_documents", "GENERATORS",
]
