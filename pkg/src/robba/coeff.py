"""Fixed-precision arithmetic in W(F_{p^m}) and its fraction field.

Elements are stored as ``p^val * unit`` where ``unit`` is a polynomial of
degree < m in the generator ``x`` of the unramified extension, reduced
modulo ``p^prec``.  ``prec`` is the relative precision (significant p-adic
digits) and never exceeds the ring's working precision ``N``.  Precision is
only ever lost, never invented: a cancellation in an addition shrinks
``prec`` accordingly.
"""
from __future__ import annotations

import itertools
import math
from fractions import Fraction
from functools import cached_property

import gmpy2
from flint import fmpz, fmpz_mod_poly_ctx

INF = math.inf


class PrecisionError(ArithmeticError):
    """Raised when an operation cannot be carried out at the working precision."""


class RingMismatchError(ValueError):
    pass


def vp_int(n: int, p: int) -> float | int:
    """p-adic valuation of an integer; ``INF`` for zero."""
    if n == 0:
        return INF
    return int(gmpy2.remove(n, p)[1])


def is_prime(p: int) -> bool:
    return p >= 2 and fmpz(p).is_prime()


# -- integer polynomial helpers (lists, low degree first) ------------------

def _trim(c: list[int]) -> list[int]:
    while c and c[-1] == 0:
        c.pop()
    return c


def poly_mul(a, b) -> list[int]:
    if not a or not b:
        return []
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] += x * y
    return out


def poly_rem_monic(a, f) -> list[int]:
    """Remainder of ``a`` modulo the monic integer polynomial ``f`` (exact over Z)."""
    a = list(a)
    m = len(f) - 1
    for k in range(len(a) - 1, m - 1, -1):
        c = a[k]
        if c:
            a[k] = 0
            for j in range(m):
                a[k - m + j] -= c * f[j]
    return a[:m] + [0] * (m - len(a[:m]))


def poly_eval_mod(f, x, modulus_poly, pk) -> list[int]:
    """Evaluate integer polynomial ``f`` at the residue class ``x`` of Z/p^k[x]/(modulus)."""
    m = len(modulus_poly) - 1
    acc = [0] * m
    for c in reversed(f):
        acc = poly_rem_monic(poly_mul(acc, x), modulus_poly)
        acc[0] += c
        acc = [v % pk for v in acc]
    return acc


def first_irreducible(p: int, m: int) -> tuple[int, ...]:
    """Lexicographically first monic irreducible polynomial of degree m over F_p.

    Coefficients are returned low degree first, as nonnegative integers < p,
    and double as the lift of the modulus to Z.
    """
    ctx = fmpz_mod_poly_ctx(p)
    if m == 1:
        return (0, 1)
    for tail in itertools.product(range(p), repeat=m):
        coeffs = list(reversed(tail)) + [1]
        if coeffs[0] == 0:
            continue
        if ctx(coeffs).is_irreducible():
            return tuple(coeffs)
    raise ValueError(f"no irreducible polynomial of degree {m} over F_{p}")


def is_irreducible_mod_p(modulus, p: int) -> bool:
    return fmpz_mod_poly_ctx(p)([c % p for c in modulus]).is_irreducible()


def _inv_unit_poly(u, modulus, p: int, k: int) -> list[int]:
    """Inverse of a unit of Z/p^k[x]/(modulus) by Newton lifting from the residue field."""
    m = len(modulus) - 1
    if m == 1:
        return [pow(u[0], -1, p**k)]
    ctx = fmpz_mod_poly_ctx(p)
    g, s, _ = ctx([c % p for c in u]).xgcd(ctx([c % p for c in modulus]))
    if g.degree() != 0:
        raise PrecisionError("not invertible at precision")
    g0 = pow(int(g.coeffs()[0]), -1, p)
    y = [(int(c) * g0) % p for c in s.coeffs()]
    y += [0] * (m - len(y))
    prec = 1
    while prec < k:
        prec = min(2 * prec, k)
        pk = p**prec
        uy = poly_rem_monic(poly_mul(u, y), modulus)
        two_minus = [(-c) % pk for c in uy]
        two_minus[0] = (two_minus[0] + 2) % pk
        y = [c % pk for c in poly_rem_monic(poly_mul(y, two_minus), modulus)]
    return [c % p**k for c in y]


class CoeffRing:
    """The coefficient ring O = W(F_{p^m}) with fraction field K.

    ``N`` is the working precision in p-adic digits; ``a`` fixes q = p^a and
    the q-power Frobenius sigma = sigma_0^a.
    """

    def __init__(self, p: int = 5, a: int = 1, m: int = 1, N: int = 12, modulus=None):
        if not is_prime(p):
            raise ValueError(f"p={p} is not prime")
        if a < 1 or m < 1 or N < 1:
            raise ValueError("a, m and N must be positive")
        self.p, self.a, self.m, self.N = int(p), int(a), int(m), int(N)
        self.q = self.p**self.a
        if modulus is None:
            modulus = first_irreducible(self.p, self.m)
        modulus = tuple(int(c) for c in modulus)
        if len(modulus) != self.m + 1 or modulus[-1] != 1:
            raise ValueError("modulus must be monic of degree m")
        if not is_irreducible_mod_p(modulus, self.p):
            raise ValueError("modulus is not irreducible modulo p")
        self.modulus = modulus
        self._key = (self.p, self.a, self.m, self.N, self.modulus)

    def __eq__(self, other):
        return isinstance(other, CoeffRing) and self._key == other._key

    def __hash__(self):
        return hash(self._key)

    def __repr__(self):
        return f"CoeffRing(p={self.p}, a={self.a}, m={self.m}, N={self.N})"

    def with_precision(self, N: int) -> CoeffRing:
        return CoeffRing(self.p, self.a, self.m, N, self.modulus)

    @cached_property
    def frobenius_image(self) -> tuple[int, ...]:
        """Image of the generator under sigma_0, correct modulo p^N."""
        return self.frobenius_image_at(self.N)

    def frobenius_image_at(self, prec: int) -> tuple[int, ...]:
        """Image of the generator under sigma_0, correct modulo p^prec."""
        cache = self.__dict__.setdefault("_frob_cache", {})
        if prec in cache:
            return cache[prec]
        p, m, f = self.p, self.m, list(self.modulus)
        if m == 1:
            out = ((-f[0]) % p**prec,)
            cache[prec] = out
            return out
        # start from x^p in the residue field and Newton-lift the root of f
        phi = [0] * m
        phi[1] = 1
        phi = poly_eval_mod([0] * p + [1], phi, f, p)
        fprime = [i * f[i] for i in range(1, len(f))]
        k = 1
        while k < prec:
            k = min(2 * k, prec)
            pk = p**k
            val = poly_eval_mod(f, phi, f, pk)
            der = poly_eval_mod(fprime, phi, f, pk)
            step = poly_rem_monic(poly_mul(val, _inv_unit_poly(der, f, p, k)), f)
            phi = [(x - y) % pk for x, y in zip(phi, step)]
        out = tuple(phi)
        cache[prec] = out
        return out

    def frobenius_matrix(self, power: int, prec: int) -> tuple[tuple[int, ...], ...]:
        """Rows j: coordinates of sigma_0^power(x^j) modulo p^prec."""
        cache = self.__dict__.setdefault("_frobmat_cache", {})
        key = (power, prec)
        if key in cache:
            return cache[key]
        m, pk, f = self.m, self.p**prec, list(self.modulus)
        phi = list(self.frobenius_image_at(prec))
        # image of x under sigma_0^power
        img = [0] * m
        img[min(1, m - 1)] = 1 if m > 1 else -f[0]
        for _ in range(power):
            img = poly_eval_mod(img, phi, f, pk) if m > 1 else img
        rows = []
        cur = [1] + [0] * (m - 1)
        for _ in range(m):
            rows.append(tuple(c % pk for c in cur))
            cur = [c % pk for c in poly_rem_monic(poly_mul(cur, img), f)]
        cache[key] = tuple(rows)
        return cache[key]

    @cached_property
    def residue_field(self):
        from .residue import ResidueField

        return ResidueField(self.p, self.modulus)

    # -- constructors -------------------------------------------------------

    def zero(self, absprec: int | None = None) -> CoeffElem:
        return CoeffElem(self, INF, (0,) * self.m, self.N if absprec is None else absprec)

    def one(self) -> CoeffElem:
        return self(1)

    def gen(self) -> CoeffElem:
        if self.m == 1:
            return self(-self.modulus[0])
        return self.from_poly([0, 1])

    def from_poly(self, coeffs, prec: int | None = None) -> CoeffElem:
        """Element with unit-part coefficients ``coeffs`` (integers) and val 0 before normalizing."""
        c = poly_rem_monic([int(x) for x in coeffs] + [0] * self.m, self.modulus) if len(coeffs) > self.m \
            else [int(x) for x in coeffs] + [0] * (self.m - len(coeffs))
        return CoeffElem.from_integers(self, 0, c, self.N if prec is None else prec)

    def __call__(self, x) -> CoeffElem:
        if isinstance(x, CoeffElem):
            if x.ring != self:
                raise RingMismatchError("element belongs to a different ring")
            return x
        if isinstance(x, (tuple, list)):
            return self.from_poly(x)
        x = Fraction(x)
        if x == 0:
            return self.zero()
        vn, vd = vp_int(x.numerator, self.p), vp_int(x.denominator, self.p)
        num = x.numerator // self.p**vn
        den = x.denominator // self.p**vd
        pk = self.p**self.N
        unit = (num * pow(den, -1, pk)) % pk
        return CoeffElem(self, vn - vd, (unit,) + (0,) * (self.m - 1), self.N)

    def random_unit(self, rng) -> CoeffElem:
        while True:
            c = [rng.randrange(self.p**self.N) for _ in range(self.m)]
            if any(x % self.p for x in c):
                return CoeffElem(self, 0, tuple(c), self.N)

    def random_element(self, rng, vmin: int = 0, vmax: int = 4) -> CoeffElem:
        return self.random_unit(rng) * self(self.p) ** rng.randint(vmin, vmax) if vmin >= 0 \
            else self.random_unit(rng) * self(Fraction(1, self.p)) ** (-rng.randint(vmin, vmax))


class CoeffElem:
    """``p^val * unit`` with the unit known to ``prec`` p-adic digits.

    The zero element has ``val = INF`` and ``prec`` holds its absolute
    precision (it is known to be divisible by ``p^prec``).
    """

    __slots__ = ("ring", "val", "unit", "prec")

    def __init__(self, ring: CoeffRing, val, unit: tuple[int, ...], prec: int):
        self.ring = ring
        self.val = val
        self.unit = unit
        self.prec = prec

    @classmethod
    def from_integers(cls, ring: CoeffRing, val: int, coeffs, prec: int) -> CoeffElem:
        """Normalize ``p^val * sum(coeffs[j] x^j)`` known to relative precision ``prec``.

        ``prec`` counts digits above ``p^val``; the absolute precision of the
        result is ``val + prec``.
        """
        p = ring.p
        absprec = val + prec
        k = min((vp_int(c, p) for c in coeffs), default=INF)
        if k == INF or val + k >= absprec:
            return CoeffElem(ring, INF, (0,) * ring.m, absprec)
        newval = val + k
        rel = min(absprec - newval, ring.N)
        pk = p**rel
        scale = p**k
        unit = tuple((c // scale) % pk for c in coeffs)
        return CoeffElem(ring, newval, unit, rel)

    # -- basic predicates ---------------------------------------------------

    def is_zero(self) -> bool:
        return self.val == INF

    @property
    def absprec(self):
        return self.prec if self.val == INF else self.val + self.prec

    def vp(self):
        return self.val

    def residue(self) -> tuple[int, ...]:
        """Reduction modulo p; requires an integral element."""
        if self.val == INF or self.val > 0:
            return (0,) * self.ring.m
        if self.val < 0:
            raise ValueError("element is not integral")
        return tuple(c % self.ring.p for c in self.unit)

    def to_fraction(self) -> Fraction:
        """Rational representative (only meaningful for m = 1)."""
        if self.ring.m != 1:
            raise ValueError("to_fraction requires m = 1")
        if self.val == INF:
            return Fraction(0)
        return Fraction(self.unit[0]) * Fraction(self.ring.p) ** self.val

    def integer_coeffs(self, shift: int = 0) -> list[int]:
        """Coefficients of ``p^shift * self`` as integers; requires ``val + shift >= 0``."""
        if self.val == INF:
            return [0] * self.ring.m
        e = self.val + shift
        if e < 0:
            raise ValueError("shift too small for an integral representative")
        s = self.ring.p**e
        return [c * s for c in self.unit]

    def _check(self, other) -> CoeffElem:
        if not isinstance(other, CoeffElem):
            return self.ring(other)
        if other.ring != self.ring:
            raise RingMismatchError("mixed coefficient rings")
        return other

    def __repr__(self):
        if self.val == INF:
            return f"O({self.ring.p}^{self.prec})"
        return f"{self.ring.p}^{self.val}*{list(self.unit)} + O(rel {self.prec})"

    def __eq__(self, other):
        try:
            other = self._check(other)
        except (TypeError, ValueError):
            return NotImplemented
        return (self.val, self.unit, self.prec) == (other.val, other.unit, other.prec)

    def __hash__(self):
        return hash((self.val, self.unit, self.prec))

    def equals(self, other, absprec=None) -> bool:
        """Equality modulo p^absprec (default: the common known precision)."""
        d = self - self._check(other)
        target = d.absprec if absprec is None else absprec
        return d.val >= target

    # -- ring operations ----------------------------------------------------

    def __neg__(self):
        if self.val == INF:
            return self
        pk = self.ring.p**self.prec
        return CoeffElem(self.ring, self.val, tuple((-c) % pk for c in self.unit), self.prec)

    def __add__(self, other):
        other = self._check(other)
        if self.val == INF:
            return other._cap(self.prec)
        if other.val == INF:
            return self._cap(other.prec)
        absprec = min(self.absprec, other.absprec)
        v = min(self.val, other.val)
        a = self.integer_coeffs(-v)
        b = other.integer_coeffs(-v)
        return CoeffElem.from_integers(self.ring, v, [x + y for x, y in zip(a, b)], absprec - v)

    __radd__ = __add__

    def __sub__(self, other):
        return self + (-self._check(other))

    def __rsub__(self, other):
        return self._check(other) - self

    def _cap(self, absprec) -> CoeffElem:
        if self.val == INF:
            return CoeffElem(self.ring, INF, self.unit, min(self.prec, absprec))
        if self.absprec <= absprec:
            return self
        return CoeffElem.from_integers(self.ring, self.val, list(self.unit), absprec - self.val)

    def __mul__(self, other):
        other = self._check(other)
        if self.val == INF or other.val == INF:
            if self.val == INF and other.val == INF:
                absprec = self.prec + other.prec
            elif self.val == INF:
                absprec = self.prec + other.val
            else:
                absprec = other.prec + self.val
            return CoeffElem(self.ring, INF, (0,) * self.ring.m, absprec)
        rel = min(self.prec, other.prec)
        pk = self.ring.p**rel
        if self.ring.m == 1:
            unit = ((self.unit[0] * other.unit[0]) % pk,)
        else:
            prod = poly_rem_monic(poly_mul(self.unit, other.unit), self.ring.modulus)
            unit = tuple(c % pk for c in prod)
        return CoeffElem(self.ring, self.val + other.val, unit, rel)

    __rmul__ = __mul__

    def inverse(self) -> CoeffElem:
        if self.val == INF:
            raise PrecisionError("not invertible at precision")
        inv = _inv_unit_poly(list(self.unit), self.ring.modulus, self.ring.p, self.prec)
        return CoeffElem(self.ring, -self.val, tuple(inv), self.prec)

    def __truediv__(self, other):
        return self * self._check(other).inverse()

    def __rtruediv__(self, other):
        return self._check(other) * self.inverse()

    def __pow__(self, e: int):
        if e < 0:
            return self.inverse() ** (-e)
        out = self.ring.one()
        base = self
        while e:
            if e & 1:
                out = out * base
            base = base * base
            e >>= 1
        return out

    def frobenius(self, power: int = 1) -> CoeffElem:
        """sigma_0^power; ``power = ring.a`` gives the q-power Frobenius sigma."""
        ring = self.ring
        if ring.m == 1 or self.val == INF or power == 0:
            return self
        phi = list(ring.frobenius_image)
        x = self
        for _ in range(power):
            rel = min(x.prec, ring.N)
            pk = ring.p**rel
            img = poly_eval_mod(list(x.unit), phi, list(ring.modulus), pk)
            x = CoeffElem.from_integers(ring, x.val, img, rel)
        return x

    def sigma(self) -> CoeffElem:
        return self.frobenius(self.ring.a)
