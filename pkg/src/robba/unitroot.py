"""Unit-root Frobenius descent.

For a unit-root Frobenius matrix Phi over the integral plus ring we look for
C with C^{-1} Phi C^sigma = I modulo p^d, where d is the least integer with
d > 1/(p - 1).  The first step solves D = B D^tau over the residue field
(a Lang-type equation); each later step corrects C by I + p^(i-1) D where
D^tau - D = -B is an Artin-Schreier equation.  Both residue equations have
solutions over F_{q^m}[[t]] for some m, and we report the smallest m that
works by trying m = 1, 2, ... in turn.

Everything here is truncated at a fixed t-degree T: identities are checked
coefficientwise up to t^T, never beyond.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import flint

from .coeff import (INF, CoeffRing, _inv_unit_poly, first_irreducible, poly_eval_mod, poly_mul,
                    poly_rem_monic, vp_int)
from .residue import ResidueField, ResidueMatrix, det
from .series import LaurentSeries, SeriesMatrix

DEFAULT_T = 30
DEFAULT_MAX_DEGREE = 64
DEFAULT_SEARCH_CAP = 200_000


class UnitRootError(ArithmeticError):
    pass


class NotUnitRootError(UnitRootError, ValueError):
    pass


def descent_depth(p: int) -> int:
    """Least d with d > 1/(p - 1): 2 for p = 2 and 1 otherwise."""
    return 1 // (p - 1) + 1


# -- residue solvers ---------------------------------------------------------


def _field_of_degree(base: ResidueField, m: int) -> ResidueField:
    if m == 1:
        return base
    return ResidueField(base.p, first_irreducible(base.p, base.m * m))


def _linear_map(K: ResidueField, n: int, fn):
    """F_p-matrix (as nmod_mat, columns are images) of an F_p-linear map on n x n matrices over K."""
    p, M = K.p, K.m
    dim = n * n * M
    cols = []
    z = K.zero()
    for i in range(n):
        for k in range(n):
            for c in range(M):
                X = [[z] * n for _ in range(n)]
                X[i][k] = K.from_coords([1 if t == c else 0 for t in range(M)])
                cols.append(_flatten(fn(X), K))
    entries = [cols[c][r] for r in range(dim) for c in range(dim)]
    return flint.nmod_mat(dim, dim, entries, p)


def _flatten(X, K: ResidueField) -> list[int]:
    out = []
    for row in X:
        for x in row:
            out.extend(K.coords(x))
    return out


def _unflatten(vec, K: ResidueField, n: int):
    M = K.m
    it = iter(vec)
    return [[K.from_coords([next(it) for _ in range(M)]) for _ in range(n)] for _ in range(n)]


def _matmul(A, B):
    n = len(A)
    return [[sum((A[i][l] * B[l][k] for l in range(1, n)), A[i][0] * B[0][k]) for k in range(n)]
            for i in range(n)]


def _kernel_basis(A) -> list[list[int]]:
    X, nullity = A.nullspace()
    return [[int(X[r, c]) for r in range(A.nrows())] for c in range(nullity)]


def _particular_solution(A, b: list[int], p: int) -> list[int] | None:
    """Some x with A x = b over F_p (free variables set to 0), or None."""
    rows, cols = A.nrows(), A.ncols()
    aug = flint.nmod_mat(rows, cols + 1, [int(A[r, c]) if c < cols else b[r] % p
                                          for r in range(rows) for c in range(cols + 1)], p)
    R, rank = aug.rref()
    x = [0] * cols
    for r in range(rank):
        lead = next(c for c in range(cols + 1) if int(R[r, c]) != 0)
        if lead == cols:
            return None
        x[lead] = int(R[r, cols])
    return x


@dataclass
class ResidueSolution:
    """Solution D over F_{p^(m0 m)}[[t]] of a residue equation; m is the degree over the base field."""
    m: int
    D: ResidueMatrix
    field: ResidueField
    transcript: list = field(default_factory=list)


def _invertible_in_span(basis, K: ResidueField, n: int, cap: int):
    """First invertible combination of ``basis`` in lexicographic order of F_p-coefficients."""
    p = K.p
    tried = 0
    for coeffs in itertools.product(range(p), repeat=len(basis)):
        if not any(coeffs):
            continue
        tried += 1
        if tried > cap:
            raise UnitRootError(f"search cap of {cap} combinations exceeded")
        vec = [sum(c * v[r] for c, v in zip(coeffs, basis)) % p for r in range(len(basis[0]))]
        X = _unflatten(vec, K, n)
        if not det(X, K).is_zero():
            return X, tried
    return None, tried


def solve_lang_mult(B: ResidueMatrix, T: int | None = None, a: int = 1,
                    max_degree: int = DEFAULT_MAX_DEGREE, search_cap: int = DEFAULT_SEARCH_CAP) -> ResidueSolution:
    """Invertible D with D = B D^tau to t-degree T, tau the q-power map with q = p^a.

    The constant term is an invertible fixed point of X -> B_0 X^(q), found
    in the F_p-linear fixed space over F_{p^(m0 m)} for the least m that
    has one.  Higher terms follow from D_j = sum_{i + q b = j} B_i (D_b)^(q).
    """
    T = B.T if T is None else min(T, B.T)
    B = B.truncate(T)
    if not B.is_invertible():
        raise UnitRootError("B(0) is not invertible")
    base, n, p = B.field, B.n, B.field.p
    q = p**a
    transcript = []
    for m in range(1, max_degree + 1):
        K = _field_of_degree(base, m)
        Bk = B.embed(K)
        B0 = Bk.const()
        L = _linear_map(K, n, lambda X: [[y - x for x, y in zip(rx, ry)]
                                          for rx, ry in zip(X, _matmul(B0, [[K.frob(v, a) for v in r] for r in X]))])
        basis = _kernel_basis(L)
        g = math.gcd(a, K.m)
        if len(basis) < n * n * g:
            transcript.append({"m": m, "fixed_dim": len(basis), "invertible": False})
            continue
        D0, tried = _invertible_in_span(basis, K, n, search_cap)
        transcript.append({"m": m, "fixed_dim": len(basis), "invertible": D0 is not None, "tried": tried})
        if D0 is None:
            continue
        D = ResidueMatrix.zero(K, n, T)
        D.coefs[0] = D0
        frob = {0: [[K.frob(v, a) for v in r] for r in D0]}
        for j in range(1, T + 1):
            acc = [[K.zero()] * n for _ in range(n)]
            for b in range(0, j // q + 1):
                i = j - q * b
                if b not in frob:
                    frob[b] = [[K.frob(v, a) for v in r] for r in D.coefs[b]]
                P = _matmul(Bk.coefs[i], frob[b])
                acc = [[x + y for x, y in zip(ra, rb)] for ra, rb in zip(acc, P)]
            D.coefs[j] = acc
        if D != Bk * D.tau(a) or not D.is_invertible():
            raise UnitRootError("Lang solution failed its substitute-back check")
        return ResidueSolution(m, D, K, transcript)
    raise UnitRootError(f"no invertible solution of D = B D^tau over extensions of degree <= {max_degree}")


def solve_artin_schreier(B: ResidueMatrix, T: int | None = None, a: int = 1,
                         max_degree: int = DEFAULT_MAX_DEGREE) -> ResidueSolution:
    """D with D^tau - D = B to t-degree T, tau the q-power map with q = p^a.

    Constant terms solve x^q - x = b entrywise over the least extension
    where every entry is soluble; then D_j = -B_j + (D_{j/q})^(q) when
    q divides j and D_j = -B_j otherwise.
    """
    T = B.T if T is None else min(T, B.T)
    B = B.truncate(T)
    base, n, p = B.field, B.n, B.field.p
    q = p**a
    transcript = []
    for m in range(1, max_degree + 1):
        K = _field_of_degree(base, m)
        Bk = B.embed(K)
        L = _linear_map(K, 1, lambda X: [[K.frob(X[0][0], a) - X[0][0]]])
        sol = []
        for row in Bk.const():
            out = []
            for b in row:
                x = _particular_solution(L, list(K.coords(b)), p)
                if x is None:
                    break
                out.append(K.from_coords(x))
            if len(out) < n:
                break
            sol.append(out)
        ok = len(sol) == n
        transcript.append({"m": m, "constant_soluble": ok})
        if not ok:
            continue
        D = ResidueMatrix.zero(K, n, T)
        D.coefs[0] = sol
        for j in range(1, T + 1):
            minus_b = [[-x for x in r] for r in Bk.coefs[j]]
            if j % q == 0:
                prev = [[K.frob(v, a) for v in r] for r in D.coefs[j // q]]
                minus_b = [[x + y for x, y in zip(r1, r2)] for r1, r2 in zip(minus_b, prev)]
            D.coefs[j] = minus_b
        if D.tau(a) - D != Bk:
            raise UnitRootError("Artin-Schreier solution failed its substitute-back check")
        return ResidueSolution(m, D, K, transcript)
    raise UnitRootError(f"x^q - x = b not soluble over extensions of degree <= {max_degree}")


# -- truncated p-adic matrices ----------------------------------------------


class _Alg:
    """(Z/p^k)[x]/(f): the coefficient ring W(F_{p^M}) modulo p^k."""

    def __init__(self, ring: CoeffRing, k: int):
        self.ring, self.k, self.p = ring, k, ring.p
        self.pk = ring.p**k
        self.ctx = flint.fmpz_mod_poly_ctx(self.pk)
        self.f = self.ctx(list(ring.modulus))
        self.M = ring.m
        if self.M > 1:
            img = ring.frobenius_matrix(ring.a, k)[1]
            self.sigma_x = self.ctx(list(img))
        self.zero = self.ctx(0)
        self.one = self.ctx(1)

    def elem(self, coeffs):
        return self.ctx([int(c) for c in coeffs]) % self.f

    def from_coeff(self, c):
        if c.is_zero():
            return self.zero
        if c.val < 0:
            raise NotUnitRootError("Phi is not integral")
        return self.elem(c.integer_coeffs())

    def coords(self, x) -> list[int]:
        c = [int(v) for v in x.coeffs()]
        return c + [0] * (self.M - len(c))

    def mul(self, x, y):
        return (x * y) % self.f

    def sigma(self, x):
        if self.M == 1 or x.is_zero():
            return x
        return x.compose_mod(self.sigma_x, self.f)

    def inverse(self, x):
        inv = _inv_unit_poly(self.coords(x), list(self.ring.modulus), self.p, self.k)
        return self.elem(inv)

    def vp(self, x):
        cs = [c for c in self.coords(x) if c]
        return min(vp_int(c, self.p) for c in cs) if cs else INF


class _TMat:
    """n x n matrix over A[[t]] modulo t^(T+1); coefs[j] is the t^j coefficient matrix."""

    def __init__(self, A: _Alg, coefs, T: int):
        self.A, self.coefs, self.T = A, coefs, T
        self.n = len(coefs[0])

    @classmethod
    def zero(cls, A, n, T):
        return cls(A, [[[A.zero] * n for _ in range(n)] for _ in range(T + 1)], T)

    @classmethod
    def identity(cls, A, n, T):
        out = cls.zero(A, n, T)
        for i in range(n):
            out.coefs[0][i][i] = A.one
        return out

    def __add__(self, o):
        return _TMat(self.A, [[[x + y for x, y in zip(r1, r2)] for r1, r2 in zip(c1, c2)]
                              for c1, c2 in zip(self.coefs, o.coefs)], self.T)

    def __sub__(self, o):
        return _TMat(self.A, [[[x - y for x, y in zip(r1, r2)] for r1, r2 in zip(c1, c2)]
                              for c1, c2 in zip(self.coefs, o.coefs)], self.T)

    def scale(self, c):
        return _TMat(self.A, [[[x * c for x in r] for r in C] for C in self.coefs], self.T)

    def _nonzero(self):
        return [j for j, C in enumerate(self.coefs) if any(not x.is_zero() for r in C for x in r)]

    def __mul__(self, o):
        A, n, T = self.A, self.n, self.T
        out = [[[None] * n for _ in range(n)] for _ in range(T + 1)]
        acc = [[[A.ctx(0)] * n for _ in range(n)] for _ in range(T + 1)]
        nb = o._nonzero()
        for ja in self._nonzero():
            X = self.coefs[ja]
            for jb in nb:
                if ja + jb > T:
                    break
                Y = o.coefs[jb]
                C = acc[ja + jb]
                for i in range(n):
                    for k in range(n):
                        s = C[i][k]
                        for l in range(n):
                            s = s + X[i][l] * Y[l][k]
                        C[i][k] = s
        for j in range(T + 1):
            for i in range(n):
                for k in range(n):
                    out[j][i][k] = acc[j][i][k] % A.f
        return _TMat(A, out, T)

    def sigma(self):
        A, q = self.A, self.A.ring.q
        out = _TMat.zero(A, self.n, self.T)
        for j in range(0, self.T // q + 1):
            out.coefs[q * j] = [[A.sigma(x) for x in r] for r in self.coefs[j]]
        return out

    def inverse(self):
        A, n, T = self.A, self.n, self.T
        C0inv = _const_inverse(self.coefs[0], A)
        X = _TMat.zero(A, n, T)
        X.coefs[0] = C0inv
        for j in range(1, T + 1):
            s = [[A.zero] * n for _ in range(n)]
            for i in range(1, j + 1):
                P = _cmul(self.coefs[i], X.coefs[j - i], A)
                s = [[x + y for x, y in zip(r1, r2)] for r1, r2 in zip(s, P)]
            X.coefs[j] = [[-x for x in r] for r in _cmul(C0inv, s, A)]
        return X

    def min_vp(self):
        return min((self.A.vp(x) for C in self.coefs for r in C for x in r), default=INF)

    def divide_p(self, e: int):
        pe = self.A.p**e
        return [[[[c // pe for c in self.A.coords(x)] for x in r] for r in C] for C in self.coefs]

    def embed(self, B: _Alg, image: list[int]):
        """Map into B along x -> image (a root of our modulus in B)."""
        A = self.A
        if A.M == 1:
            return _TMat(B, [[[B.elem(A.coords(x)) for x in r] for r in C] for C in self.coefs], self.T)
        out = []
        for C in self.coefs:
            out.append([[B.elem(poly_eval_mod(A.coords(x), image, list(B.ring.modulus), B.pk)) if not x.is_zero()
                         else B.zero for x in r] for r in C])
        return _TMat(B, out, self.T)


def _cmul(X, Y, A):
    n = len(X)
    return [[sum((X[i][l] * Y[l][k] for l in range(n)), A.ctx(0)) % A.f for k in range(n)] for i in range(n)]


def _const_inverse(C, A: _Alg):
    """Inverse of a constant matrix over A with unit determinant, by Gauss-Jordan on unit pivots."""
    n = len(C)
    M = [list(r) + [A.one if i == k else A.zero for k in range(n)] for i, r in enumerate(C)]
    for c in range(n):
        piv = next((r for r in range(c, n) if A.vp(M[r][c]) == 0), None)
        if piv is None:
            raise NotUnitRootError("constant term is not invertible")
        M[c], M[piv] = M[piv], M[c]
        inv = A.inverse(M[c][c])
        M[c] = [A.mul(x, inv) for x in M[c]]
        for r in range(n):
            if r != c and not M[r][c].is_zero():
                f = M[r][c]
                M[r] = [x - A.mul(f, y) for x, y in zip(M[r], M[c])]
    return [r[n:] for r in M]


def _lift_embedding(small: CoeffRing, big: CoeffRing, residue_image, k: int) -> list[int]:
    """Hensel lift of a residue root of small.modulus to a root in W(F_{p^M}) modulo p^k."""
    p, f, g = big.p, list(small.modulus), list(big.modulus)
    r = list(residue_image) + [0] * (big.m - len(residue_image))
    if small.m == 1:
        return [(-f[0]) % p**k] + [0] * (big.m - 1)
    fprime = [i * f[i] for i in range(1, len(f))]
    prec = 1
    while prec < k:
        prec = min(2 * prec, k)
        pk = p**prec
        val = poly_eval_mod(f, r, g, pk)
        der = poly_eval_mod(fprime, r, g, pk)
        step = poly_rem_monic(poly_mul(val, _inv_unit_poly(der, g, p, prec)), g)
        r = [(x - y) % pk for x, y in zip(r, step + [0] * big.m)]
    return r[: big.m]


def _residue_of(Mx: _TMat, field: ResidueField, e: int) -> ResidueMatrix:
    """(Mx / p^e) modulo p as a residue matrix."""
    vals = Mx.divide_p(e)
    coefs = [[[field.from_coords(c) for c in r] for r in C] for C in vals]
    return ResidueMatrix(field, coefs, Mx.T)


# -- the descent ---------------------------------------------------------------


@dataclass
class UnitRootDescent:
    """Result of the descent: C^{-1} Phi C^sigma = I + O(p^residual) up to t-degree T."""
    d: int
    m: int
    ring: CoeffRing
    residual: int | float
    T: int
    transcript: list
    _C: _TMat = field(repr=False, default=None)

    @property
    def C(self) -> SeriesMatrix:
        ring, n, T = self.ring, self._C.n, self.T
        window = (min(-40, -T), max(40, T + 1))
        rows = []
        for i in range(n):
            row = []
            for k in range(n):
                terms = {j: ring.from_poly(self._C.A.coords(C[i][k]))
                         for j, C in enumerate(self._C.coefs) if not C[i][k].is_zero()}
                row.append(LaurentSeries.from_dict(ring, terms, window))
            rows.append(row)
        return SeriesMatrix(rows)

    def C_coefficients(self) -> list:
        """C as nested lists: coefs[j][i][k] is the coordinate vector of the t^j coefficient."""
        return [[[self._C.A.coords(x) for x in r] for r in C] for C in self._C.coefs]


def _phi_truncated(Phi: SeriesMatrix, A: _Alg, T: int) -> _TMat:
    n = Phi.n
    out = _TMat.zero(A, n, T)
    for i in range(n):
        for k in range(n):
            e = Phi[i, k]
            if not e.is_plus():
                raise NotUnitRootError("Phi has a pole part; it must lie in the plus ring")
            if not e.is_integral():
                raise NotUnitRootError("Phi is not integral")
            for j in range(T + 1):
                out.coefs[j][i][k] = A.from_coeff(e.coeff(j))
    return out


def _lift_residue(D: ResidueMatrix, A: _Alg) -> _TMat:
    K = D.field
    return _TMat(A, [[[A.elem(K.coords(x)) for x in r] for r in C] for C in D.coefs], D.T)


def unit_root_reduce(Phi: SeriesMatrix, p: int | None = None, T: int = DEFAULT_T,
                     max_degree: int = DEFAULT_MAX_DEGREE, search_cap: int = DEFAULT_SEARCH_CAP) -> UnitRootDescent:
    """Find C over an unramified extension with C^{-1} Phi C^sigma = I modulo p^d, to t-degree T.

    Phi must be an integral plus matrix whose reduction has invertible
    constant term.  The reported m is the degree of the residue extension
    over the residue field of Phi's ring, accumulated over all steps.
    """
    ring = Phi.ring
    if p is not None and p != ring.p:
        raise ValueError(f"p={p} does not match the coefficient ring (p={ring.p})")
    p, a, n, k = ring.p, ring.a, Phi.n, ring.N
    d = descent_depth(p)
    if k <= d:
        raise ValueError(f"precision N={k} too small to certify a congruence modulo p^{d}")
    for e in Phi.entries():
        if not e.is_plus():
            raise NotUnitRootError("Phi has a pole part; it must lie in the plus ring")
        if not e.is_integral():
            raise NotUnitRootError("Phi is not integral")
    B = ResidueMatrix.from_series_matrix(Phi, T)
    if not B.is_invertible():
        raise NotUnitRootError("Phi is not unit-root: its reduction is not invertible at u = 0")
    A = _Alg(ring, k)
    phi = _phi_truncated(Phi, A, T)
    transcript = []

    sol = solve_lang_mult(B, T, a, max_degree, search_cap)
    m_total = sol.m
    cur_ring = ring if sol.m == 1 else CoeffRing(p, a, ring.m * sol.m, k)
    if cur_ring != ring:
        phi, A = _extend(phi, ring, cur_ring, sol.field, k)
    C = _lift_residue(sol.D, A)
    transcript.append({"step": 1, "equation": "D = B D^tau", "m": sol.m, "search": sol.transcript,
                       "check": "D = B D^tau to t-degree %d" % T})
    for i in range(2, d + 1):
        G = C.inverse() * phi * C.sigma() - _TMat.identity(A, n, T)
        v = G.min_vp()
        if v < i - 1:
            raise UnitRootError(f"step {i}: C^-1 Phi C^sigma is not the identity modulo p^{i - 1}")
        field_now = ResidueField.of_ring(cur_ring)
        Bi = _residue_of(G, field_now, i - 1)
        sol = solve_artin_schreier(-Bi, T, a, max_degree)
        m_total *= sol.m
        if sol.m > 1:
            new_ring = CoeffRing(p, a, cur_ring.m * sol.m, k)
            phi, A2 = _extend(phi, cur_ring, new_ring, sol.field, k)
            C, _ = _extend(C, cur_ring, new_ring, sol.field, k)
            A, cur_ring = A2, new_ring
        Dl = _lift_residue(sol.D, A).scale(A.ctx(p ** (i - 1)))
        C = C * (_TMat.identity(A, n, T) + Dl)
        transcript.append({"step": i, "equation": "D^tau - D = -B", "m": sol.m, "search": sol.transcript,
                           "check": "D^tau - D = -B to t-degree %d" % T})
    G = C.inverse() * phi * C.sigma() - _TMat.identity(A, n, T)
    residual = G.min_vp()
    if residual < d:
        raise UnitRootError(f"C^-1 Phi C^sigma - I has valuation {residual} < {d}")
    transcript.append({"step": "final", "check": f"C^-1 Phi C^sigma = I mod p^{d} to t-degree {T}",
                       "residual": residual})
    return UnitRootDescent(d, m_total, cur_ring, residual, T, transcript, C)


def _extend(X: _TMat, small: CoeffRing, big: CoeffRing, big_field: ResidueField, k: int):
    small_field = ResidueField.of_ring(small)
    res_img = big_field.coords(small_field.embedding(big_field))
    img = _lift_embedding(small, big, res_img, k)
    B = _Alg(big, k)
    return X.embed(B, img), B


__all__ = [
    "ResidueSolution", "UnitRootDescent", "UnitRootError", "NotUnitRootError",
    "descent_depth", "solve_lang_mult", "solve_artin_schreier", "unit_root_reduce",
]
