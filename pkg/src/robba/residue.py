"""Residue-level objects: the finite field F_{p^m} and truncated series over it.

The field is built from the same modulus as the matching :class:`CoeffRing`,
so a coordinate vector means the same thing on both sides and lifting a
residue element to the coefficient ring is just reading off its coordinates.

A :class:`ResidueMatrix` is an n x n matrix over F_{p^m}[[t]] known up to
t-degree T, stored as the list of its T + 1 constant coefficient matrices.
Exponents are nonnegative integers by construction.
"""
from __future__ import annotations

from functools import cached_property

import flint


class ResidueField:
    """F_{p^m} presented as F_p[x]/(modulus)."""

    def __init__(self, p: int, modulus):
        self.p = int(p)
        self.modulus = tuple(int(c) % self.p for c in modulus)
        self.m = len(self.modulus) - 1
        poly = flint.fmpz_mod_poly_ctx(self.p)(list(self.modulus))
        self.ctx = flint.fq_default_ctx(self.p, self.m, modulus=poly)

    @classmethod
    def of_ring(cls, ring) -> ResidueField:
        return cls(ring.p, ring.modulus)

    def __eq__(self, other):
        return isinstance(other, ResidueField) and (self.p, self.modulus) == (other.p, other.modulus)

    def __hash__(self):
        return hash((self.p, self.modulus))

    def __repr__(self):
        return f"ResidueField(p={self.p}, m={self.m})"

    @property
    def order(self) -> int:
        return self.p**self.m

    def zero(self):
        return self.ctx.zero()

    def one(self):
        return self.ctx.one()

    def __call__(self, x):
        if isinstance(x, (list, tuple)):
            return self.ctx([int(c) % self.p for c in x])
        return self.ctx(int(x) % self.p)

    def coords(self, x) -> tuple[int, ...]:
        c = [int(v) for v in x.to_list()]
        return tuple(c + [0] * (self.m - len(c)))

    def from_coords(self, c):
        return self.ctx([int(v) % self.p for v in c])

    def frob(self, x, power: int):
        """x^(p^power)."""
        power %= self.m
        return x.frobenius(power) if power else x

    def embedding(self, target: ResidueField):
        """Image of our generator in ``target``: the smallest root of our modulus there."""
        if target.p != self.p or target.m % self.m:
            raise ValueError(f"F_{self.p}^{self.m} does not embed in F_{target.p}^{target.m}")
        if self.m == 1:
            return target(-self.modulus[0])
        pctx = flint.fq_default_poly_ctx(target.ctx)
        f = pctx([target(c) for c in self.modulus])
        roots = sorted((target.coords(r) for r, _ in f.roots()), key=lambda c: tuple(reversed(c)))
        return target.from_coords(roots[0])

    def embed(self, x, target: ResidueField, image=None):
        """Map x into ``target`` along :meth:`embedding` (or the given generator image)."""
        if target == self:
            return x
        if image is None:
            image = self.embedding(target)
        acc = target.zero()
        for c in reversed(self.coords(x)):
            acc = acc * image + target(c)
        return acc

    def elements(self):
        """All field elements in a fixed order (coordinates read as base-p digits)."""
        for k in range(self.order):
            c = []
            for _ in range(self.m):
                k, d = divmod(k, self.p)
                c.append(d)
            yield self.from_coords(c)


class ResidueSeries:
    """A single series sum c_j t^j over F_{p^m}, 0 <= j <= T."""

    __slots__ = ("field", "T", "coeffs")

    def __init__(self, field: ResidueField, coeffs: dict, T: int):
        self.field = field
        if any(j < 0 for j in coeffs):
            raise ValueError("residue series have nonnegative t-exponents")
        self.T = int(T)
        self.coeffs = {int(j): c for j, c in coeffs.items() if j <= T and not c.is_zero()}

    def __getitem__(self, j):
        return self.coeffs.get(j, self.field.zero())

    def __eq__(self, other):
        if not isinstance(other, ResidueSeries):
            return NotImplemented
        return self.field == other.field and self.T == other.T and self.coeffs == other.coeffs

    def __repr__(self):
        return f"ResidueSeries({ {j: str(c) for j, c in sorted(self.coeffs.items())} }, T={self.T})"

    def support(self) -> list[int]:
        return sorted(self.coeffs)

    def __add__(self, other):
        out = dict(self.coeffs)
        for j, c in other.coeffs.items():
            out[j] = out.get(j, self.field.zero()) + c
        return ResidueSeries(self.field, out, min(self.T, other.T))

    def __neg__(self):
        return ResidueSeries(self.field, {j: -c for j, c in self.coeffs.items()}, self.T)

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        T = min(self.T, other.T)
        out = {}
        for i, a in self.coeffs.items():
            for j, b in other.coeffs.items():
                if i + j <= T:
                    out[i + j] = out.get(i + j, self.field.zero()) + a * b
        return ResidueSeries(self.field, out, T)

    def tau(self, a: int) -> ResidueSeries:
        """The q-power map, q = p^a: coefficients to the q-th power and t -> t^q."""
        q = self.field.p**a
        return ResidueSeries(self.field, {q * j: self.field.frob(c, a) for j, c in self.coeffs.items()}, self.T)


class ResidueMatrix:
    """n x n matrix over F_{p^m}[[t]] modulo t^(T+1)."""

    def __init__(self, field: ResidueField, coefs, T: int):
        self.field = field
        self.T = int(T)
        self.n = len(coefs[0]) if coefs else 0
        z = field.zero()
        coefs = [[list(row) for row in c] for c in coefs[: self.T + 1]]
        while len(coefs) < self.T + 1:
            coefs.append([[z] * self.n for _ in range(self.n)])
        self.coefs = coefs

    # -- constructors -------------------------------------------------------

    @classmethod
    def zero(cls, field: ResidueField, n: int, T: int) -> ResidueMatrix:
        z = field.zero()
        return cls(field, [[[z] * n for _ in range(n)] for _ in range(T + 1)], T)

    @classmethod
    def identity(cls, field: ResidueField, n: int, T: int) -> ResidueMatrix:
        out = cls.zero(field, n, T)
        for i in range(n):
            out.coefs[0][i][i] = field.one()
        return out

    @classmethod
    def constant(cls, field: ResidueField, rows, T: int) -> ResidueMatrix:
        out = cls.zero(field, len(rows), T)
        out.coefs[0] = [[x if not isinstance(x, int) else field(x) for x in row] for row in rows]
        return out

    @classmethod
    def from_entries(cls, field: ResidueField, entries, T: int) -> ResidueMatrix:
        """From an n x n nested list of {j: element-or-int} dicts."""
        n = len(entries)
        out = cls.zero(field, n, T)
        for i in range(n):
            for k in range(n):
                for j, c in entries[i][k].items():
                    if j < 0:
                        raise ValueError("residue series have nonnegative t-exponents")
                    if j <= T:
                        out.coefs[j][i][k] = field(c) if isinstance(c, (int, list, tuple)) else c
        return out

    @classmethod
    def from_series_matrix(cls, M, T: int) -> ResidueMatrix:
        """Reduction modulo p of an integral plus matrix, t = image of u."""
        field = ResidueField.of_ring(M.ring)
        n = M.n
        out = cls.zero(field, n, T)
        for i in range(n):
            for k in range(n):
                e = M[i, k]
                if not e.is_plus() or not e.is_integral():
                    raise ValueError("entry is not an integral plus series")
                for j in range(T + 1):
                    c = e.coeff(j)
                    if not c.is_zero() and c.vp() == 0:
                        out.coefs[j][i][k] = field.from_coords(c.residue())
        return out

    # -- access -------------------------------------------------------------

    def entry(self, i: int, k: int) -> ResidueSeries:
        return ResidueSeries(self.field, {j: c[i][k] for j, c in enumerate(self.coefs)}, self.T)

    def const(self):
        return self.coefs[0]

    def __eq__(self, other):
        if not isinstance(other, ResidueMatrix):
            return NotImplemented
        return self.field == other.field and self.T == other.T and self.coefs == other.coefs

    def is_zero(self) -> bool:
        return all(x.is_zero() for c in self.coefs for row in c for x in row)

    def truncate(self, T: int) -> ResidueMatrix:
        return ResidueMatrix(self.field, self.coefs, min(T, self.T))

    def first_difference(self, other) -> tuple[int, int, int] | None:
        """(j, i, k) of the first differing coefficient, or None."""
        for j in range(min(self.T, other.T) + 1):
            for i in range(self.n):
                for k in range(self.n):
                    if self.coefs[j][i][k] != other.coefs[j][i][k]:
                        return (j, i, k)
        return None

    # -- arithmetic -----------------------------------------------------------

    def _zip(self, other, fn) -> ResidueMatrix:
        T = min(self.T, other.T)
        return ResidueMatrix(self.field, [
            [[fn(a, b) for a, b in zip(ra, rb)] for ra, rb in zip(ca, cb)]
            for ca, cb in zip(self.coefs[: T + 1], other.coefs[: T + 1])], T)

    def __add__(self, other):
        return self._zip(other, lambda a, b: a + b)

    def __sub__(self, other):
        return self._zip(other, lambda a, b: a - b)

    def __neg__(self):
        return ResidueMatrix(self.field, [[[-x for x in row] for row in c] for c in self.coefs], self.T)

    def __mul__(self, other):
        T = min(self.T, other.T)
        n = self.n
        out = ResidueMatrix.zero(self.field, n, T)
        nz_a = [j for j in range(T + 1) if any(not x.is_zero() for row in self.coefs[j] for x in row)]
        nz_b = [j for j in range(T + 1) if any(not x.is_zero() for row in other.coefs[j] for x in row)]
        for ja in nz_a:
            A = self.coefs[ja]
            for jb in nz_b:
                if ja + jb > T:
                    break
                B = other.coefs[jb]
                C = out.coefs[ja + jb]
                for i in range(n):
                    for k in range(n):
                        acc = C[i][k]
                        for l in range(n):
                            acc = acc + A[i][l] * B[l][k]
                        C[i][k] = acc
        return out

    def tau(self, a: int) -> ResidueMatrix:
        """Apply the q-power map (q = p^a) entrywise."""
        q = self.field.p**a
        out = ResidueMatrix.zero(self.field, self.n, self.T)
        for j in range(0, self.T // q + 1):
            out.coefs[q * j] = [[self.field.frob(x, a) for x in row] for row in self.coefs[j]]
        return out

    def embed(self, target: ResidueField, image=None) -> ResidueMatrix:
        if target == self.field:
            return self
        if image is None:
            image = self.field.embedding(target)
        return ResidueMatrix(target, [[[self.field.embed(x, target, image) for x in row] for row in c]
                                      for c in self.coefs], self.T)

    @cached_property
    def const_det(self):
        return _det(self.coefs[0], self.field)

    def is_invertible(self) -> bool:
        return not self.const_det.is_zero()


def _det(A, field):
    """Determinant by Gaussian elimination over the field."""
    n = len(A)
    A = [list(row) for row in A]
    det = field.one()
    for c in range(n):
        piv = next((r for r in range(c, n) if not A[r][c].is_zero()), None)
        if piv is None:
            return field.zero()
        if piv != c:
            A[c], A[piv] = A[piv], A[c]
            det = -det
        det = det * A[c][c]
        inv = A[c][c].inverse()
        for r in range(c + 1, n):
            f = A[r][c] * inv
            if not f.is_zero():
                A[r] = [x - f * y for x, y in zip(A[r], A[c])]
    return det


def det(A, field: ResidueField):
    """Determinant of a square matrix of field elements."""
    return _det(A, field)


__all__ = ["ResidueField", "ResidueSeries", "ResidueMatrix", "det"]
