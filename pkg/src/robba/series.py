"""Truncated Laurent series over K = W(F_{p^m})[1/p] with certified Gauss valuations.

A :class:`LaurentSeries` is an exact Laurent polynomial (the *body*) plus an
optional :class:`ErrorBound` describing everything the body leaves out.  The
bound is a finite set of points ``(i, v)``; it certifies

    w_s(true value - body) >= min_k (s * v_k + i_k)

for every ``s`` in an open interval ``(smin, smax)``.  Terms dropped because
they fall outside the exponent window, rounding performed to keep coefficient
sizes bounded, and remainders of geometric series all become points of the
bound.  Every Gauss valuation reported by this module is therefore either
exact or a certified lower bound.

Bodies are stored as ``p^(-den) * u^off * sum_j x^j P_j(u)`` where the
``P_j`` are integer polynomials and ``x`` generates the unramified extension.

Rounding is controlled by a *floor*: a level ``F`` in w-units together with a
band ``[s1, s2]`` of radii.  Any coefficient part whose contribution has
``w_s >= F`` for every ``s`` in the band may be discarded.  Without a floor,
arithmetic is exact apart from clipping to the window.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import gmpy2
from flint import fmpz_poly

from .coeff import INF, CoeffElem, CoeffRing, PrecisionError, RingMismatchError, vp_int

DEFAULT_WINDOW = (-40, 40)

# exact rationals for internal bookkeeping; gmpy2's mpq is much faster than Fraction
Q = gmpy2.mpq


class NotCertifiedError(ArithmeticError):
    """A Gauss valuation was requested outside the range its certificate covers."""


class WindowError(ArithmeticError):
    """No provably correct coefficients remain in the window."""


class NotAUnitError(ArithmeticError):
    pass


@lru_cache(maxsize=None)
def _ppow(p: int, k: int) -> int:
    return p**k


_QT = type(Q(0))


def _frac(x):
    if type(x) is _QT:
        return x
    if isinstance(x, Fraction):
        return Q(x.numerator, x.denominator)
    return Q(x)


def to_fraction(x):
    """Convert an internal rational (or infinity) to a Fraction."""
    if x in (INF, -INF):
        return x
    return Fraction(int(x.numerator), int(x.denominator))


def _ceil_frac(x) -> int:
    return int(-((-x.numerator) // x.denominator))


# -- lower envelopes of lines s -> v*s + i -----------------------------------

def envelope(points, smin=Q(0), smax=None) -> tuple:
    """Prune ``points`` to those whose line ``v*s + i`` is minimal somewhere on [smin, smax]."""
    best = {}
    for i, v in points:
        if v not in best or i < best[v]:
            best[v] = i
    if len(best) <= 1:
        return tuple((i, v) for v, i in best.items())
    lines = sorted(best.items(), key=lambda t: -t[0])
    hull = []
    for v, i in lines:
        while len(hull) >= 2:
            v1, i1 = hull[-2]
            v2, i2 = hull[-1]
            if (i - i1) * (v1 - v2) <= (i2 - i1) * (v1 - v):
                hull.pop()
            else:
                break
        hull.append((v, i))
    out = []
    for k, (v, i) in enumerate(hull):
        if k > 0:
            vp_, ip_ = hull[k - 1]
            left = Q(i - ip_) / (vp_ - v)
            if smax is not None and left > smax:
                continue
        if k + 1 < len(hull):
            vn, in_ = hull[k + 1]
            right = Q(in_ - i) / (v - vn)
            if right < smin:
                continue
        out.append((i, v))
    return tuple(out)


def lines_min(points, s) -> Fraction | float:
    if not points:
        return INF
    return min(v * s + i for i, v in points)


def minkowski(a, b):
    return [(i1 + i2, v1 + v2) for i1, v1 in a for i2, v2 in b]


def positive_interval(points, smin=Q(0), smax=None):
    """Open interval of s inside (smin, smax) on which every line is positive, or None."""
    lo, hi = _frac(smin), smax
    for i, v in points:
        if v > 0:
            if i <= 0:
                lo = max(lo, Q(-i) / v)
        elif v == 0:
            if i <= 0:
                return None
        else:
            if i <= 0:
                return None
            cut = Q(i) / (-v)
            hi = cut if hi is None else min(hi, cut)
    if hi is not None and hi <= lo:
        return None
    return lo, hi


def _add_inf(a, b):
    if a in (INF, -INF) or b in (INF, -INF):
        if (a == INF and b == -INF) or (a == -INF and b == INF):
            raise ValueError("indeterminate support")
        return a if a in (INF, -INF) else b
    return a + b


class ErrorBound:
    """Certificate ``w_s(err) >= min(s*v + i)`` for ``smin < s < smax``, err supported in [elo, ehi]."""

    __slots__ = ("points", "smin", "smax", "elo", "ehi")

    def __init__(self, points, smin=Q(0), smax=None, elo=-INF, ehi=INF, prune=True):
        self.smin = _frac(smin)
        self.smax = None if smax is None else _frac(smax)
        self.points = envelope(points, self.smin, self.smax) if prune else tuple(points)
        self.elo = elo
        self.ehi = ehi

    def __repr__(self):
        return f"ErrorBound({list(self.points)}, ({self.smin}, {self.smax}), [{self.elo}, {self.ehi}])"

    def valid_at(self, s) -> bool:
        return self.smin < s and (self.smax is None or s < self.smax)

    def bound(self, s):
        return lines_min(self.points, s)

    def union(self, other: ErrorBound | None) -> ErrorBound:
        if other is None:
            return self
        smin = max(self.smin, other.smin)
        smax = self.smax if other.smax is None else (other.smax if self.smax is None else min(self.smax, other.smax))
        return ErrorBound(self.points + other.points, smin, smax,
                          min(self.elo, other.elo), max(self.ehi, other.ehi))

    def restrict_support(self, elo, ehi) -> ErrorBound | None:
        lo, hi = max(self.elo, elo), min(self.ehi, ehi)
        if lo > hi:
            return None
        return ErrorBound(self.points, self.smin, self.smax, lo, hi, prune=False)

    def interval(self):
        return self.smin, self.smax

    def to_json(self):
        from .serialize import frac_str

        return {
            "points": [[str(i), frac_str(v)] for i, v in self.points],
            "smin": frac_str(self.smin),
            "smax": None if self.smax is None else frac_str(self.smax),
            "elo": None if self.elo == -INF else str(self.elo),
            "ehi": None if self.ehi == INF else str(self.ehi),
        }


def _union(a: ErrorBound | None, b: ErrorBound | None) -> ErrorBound | None:
    if a is None:
        return b
    return a.union(b)


def _intersect_intervals(*ivs):
    lo, hi = Q(0), None
    for a, b in ivs:
        lo = max(lo, a)
        if b is not None:
            hi = b if hi is None else min(hi, b)
    return lo, hi


@dataclass(frozen=True)
class GaussValue:
    """``w`` is exact when ``exact`` is true and a certified lower bound otherwise."""

    s: Fraction
    w: Fraction | float
    exact: bool = True

    def __post_init__(self):
        object.__setattr__(self, "s", to_fraction(_frac(self.s)))
        if self.w not in (INF, -INF):
            object.__setattr__(self, "w", to_fraction(_frac(self.w)))

    def __repr__(self):
        tag = "" if self.exact else ">="
        return f"w_{self.s} {tag}{self.w}"


@dataclass(frozen=True)
class Floor:
    """Rounding level ``F`` in w-units, enforced for every radius in ``[s1, s2]``."""

    F: Fraction
    s1: Fraction
    s2: Fraction

    @staticmethod
    def at(F, s, s_low=None) -> Floor:
        s = _frac(s)
        return Floor(_frac(F), _frac(s_low) if s_low is not None else s, s)

    def meet(self, other: Floor | None) -> Floor:
        if other is None or other == self:
            return self
        return Floor(min(self.F, other.F), min(self.s1, other.s1), max(self.s2, other.s2))

    def threshold(self, i: int) -> int:
        """Least valuation v with s*v + i >= F for every s in the band."""
        d = self.F - i
        s = self.s1 if d > 0 else self.s2
        return _ceil_frac(d / s)


def _meet(a: Floor | None, b: Floor | None) -> Floor | None:
    if a is None:
        return b
    return a.meet(b)


# -- the series type ---------------------------------------------------------

class LaurentSeries:
    """Truncated Laurent series ``sum c_i u^i`` with a certified error bound."""

    __slots__ = ("ring", "off", "den", "parts", "err", "lo", "hi", "floor", "_np", "_fp")

    def __init__(self, ring: CoeffRing, off: int, den: int, parts, err: ErrorBound | None = None,
                 window=DEFAULT_WINDOW, floor: Floor | None = None, _clean: bool = False):
        self.ring = ring
        self.lo, self.hi = int(window[0]), int(window[1])
        if self.lo > self.hi:
            raise WindowError("empty window")
        self.floor = floor
        self._np = None
        self._fp = None
        if _clean:
            self.off, self.den, self.parts, self.err = off, den, parts, err
        else:
            self._finish(off, den, [list(P) for P in parts], err)

    # -- construction ---------------------------------------------------

    def _finish(self, off, den, parts, err):
        """Clip to the window, round at the floor, and normalize the body."""
        p = self.ring.p
        L = max((len(P) for P in parts), default=0)
        for P in parts:
            if len(P) < L:
                P.extend([0] * (L - len(P)))
        dropped = []
        rounded = []
        fl = self.floor
        for k in range(L):
            i = off + k
            outside = i < self.lo or i > self.hi
            if outside:
                vec = [P[k] for P in parts]
                if any(vec):
                    v = min(vp_int(c, p) for c in vec if c)
                    dropped.append((i, v - den))
                    for P in parts:
                        P[k] = 0
                continue
            if fl is not None:
                t = fl.threshold(i)
                e = t + den
                changed = False
                if e <= 0:
                    for P in parts:
                        if P[k]:
                            P[k] = 0
                            changed = True
                else:
                    pk = _ppow(p, e)
                    half = pk >> 1
                    for P in parts:
                        c = P[k]
                        if c > half or -c > half:
                            c2 = c % pk
                            if c2 > half:
                                c2 -= pk
                            P[k] = c2
                            changed = True
                if changed:
                    rounded.append(i)
        if dropped:
            err = _union(err, ErrorBound(dropped, elo=min(i for i, _ in dropped),
                                         ehi=max(i for i, _ in dropped)))
        if rounded:
            pts = []
            below = [i for i in rounded if fl.F - i > 0]
            above = [i for i in rounded if fl.F - i <= 0]
            if below:
                pts += [(i, (fl.F - i) / fl.s1) for i in (min(below), max(below))]
            if above:
                pts += [(i, (fl.F - i) / fl.s2) for i in (min(above), max(above))]
            err = _union(err, ErrorBound(pts, elo=min(rounded), ehi=max(rounded)))
        # trim zeros at both ends
        first = next((k for k in range(L) if any(P[k] for P in parts)), None)
        if first is None:
            parts = [[] for _ in parts]
            off, den = 0, 0
        else:
            last = max(k for k in range(L) if any(P[k] for P in parts))
            parts = [P[first:last + 1] for P in parts]
            off += first
            if den > 0:
                g = 0
                for P in parts:
                    g = math.gcd(g, *P) if P else g
                k = min(den, vp_int(g, p))
                if k:
                    pk = _ppow(p, k)
                    parts = [[c // pk for c in P] for P in parts]
                    den -= k
            elif den < 0:
                pk = _ppow(p, -den)
                parts = [[c * pk for c in P] for P in parts]
                den = 0
        self.off, self.den = off, den
        self.parts = tuple(tuple(P) for P in parts)
        self.err = err

    @classmethod
    def zero(cls, ring, window=DEFAULT_WINDOW, floor=None) -> LaurentSeries:
        return cls(ring, 0, 0, [[] for _ in range(ring.m)], None, window, floor)

    @classmethod
    def one(cls, ring, window=DEFAULT_WINDOW, floor=None) -> LaurentSeries:
        return cls.monomial(ring, 1, 0, window, floor)

    @classmethod
    def monomial(cls, ring, c, i: int, window=DEFAULT_WINDOW, floor=None) -> LaurentSeries:
        return cls.from_dict(ring, {i: c}, window, floor)

    @classmethod
    def from_dict(cls, ring: CoeffRing, terms: dict, window=DEFAULT_WINDOW, floor=None) -> LaurentSeries:
        """Build from ``{exponent: value}``; values may be ints, Fractions, CoeffElems or coordinate tuples.

        Integers, p-power fractions and CoeffElems are taken as exact.  Other
        rationals are p-adically approximated to ``ring.N`` relative digits and
        the approximation error is certified.
        """
        if not terms:
            return cls.zero(ring, window, floor)
        p, m = ring.p, ring.m
        items = []
        approx = []
        den = 0
        for i, c in terms.items():
            vec, d, e = _coeff_to_vector(ring, c)
            if e is not None:
                approx.append((int(i), Q(e)))
            items.append((int(i), vec, d))
            den = max(den, d)
        items = [(i, vec, d) for i, vec, d in items if any(vec)]
        if not items:
            z = cls.zero(ring, window, floor)
            if approx:
                z.err = ErrorBound(approx, elo=min(i for i, _ in approx), ehi=max(i for i, _ in approx))
            return z
        off = min(i for i, _, _ in items)
        L = max(i for i, _, _ in items) - off + 1
        parts = [[0] * L for _ in range(m)]
        for i, vec, d in items:
            scale = _ppow(p, den - d)
            for j in range(m):
                parts[j][i - off] += vec[j] * scale
        err = None
        if approx:
            err = ErrorBound(approx, elo=min(i for i, _ in approx), ehi=max(i for i, _ in approx))
        return cls(ring, off, den, parts, err, window, floor)

    def _like(self, off, den, parts, err, window=None, floor="same") -> LaurentSeries:
        return LaurentSeries(self.ring, off, den, parts, err,
                             (self.lo, self.hi) if window is None else window,
                             self.floor if floor == "same" else floor)

    def with_window(self, lo: int, hi: int) -> LaurentSeries:
        return self._like(self.off, self.den, self.parts, self.err, (lo, hi))

    def with_floor(self, floor: Floor | None) -> LaurentSeries:
        return self._like(self.off, self.den, self.parts, self.err, floor=floor)

    def body(self) -> LaurentSeries:
        """The exact Laurent polynomial carried by this series (its error discarded)."""
        return LaurentSeries(self.ring, self.off, self.den, self.parts, None,
                             (self.lo, self.hi), self.floor, _clean=True)

    def with_error(self, err: ErrorBound | None) -> LaurentSeries:
        return LaurentSeries(self.ring, self.off, self.den, self.parts, _union(self.err, err),
                             (self.lo, self.hi), self.floor, _clean=True)

    # -- inspection ------------------------------------------------------

    @property
    def window(self):
        return self.lo, self.hi

    @property
    def length(self) -> int:
        return len(self.parts[0])

    def is_exact(self) -> bool:
        return self.err is None

    def body_is_zero(self) -> bool:
        return self.length == 0

    def is_zero(self) -> bool:
        return self.body_is_zero() and self.err is None

    @property
    def tail_lo(self) -> str:
        if self.err is not None and self.err.elo < self.lo:
            return "truncated"
        return "exact"

    @property
    def tail_hi(self) -> str:
        e = self.err
        if e is not None and (e.ehi > self.hi or e.elo >= self.lo):
            return "truncated"
        return "exact"

    def support(self):
        """(lowest, highest) exponent of the body, or None when the body is zero."""
        if self.body_is_zero():
            return None
        return self.off, self.off + self.length - 1

    def exponents(self):
        for k in range(self.length):
            if any(P[k] for P in self.parts):
                yield self.off + k

    def coeff_vector(self, i: int):
        """Integer coordinates of the coefficient of u^i, to be scaled by p^(-den)."""
        k = i - self.off
        if 0 <= k < self.length:
            return tuple(P[k] for P in self.parts)
        return (0,) * self.ring.m

    def coeff_vp(self, i: int):
        vec = self.coeff_vector(i)
        if not any(vec):
            return INF
        return min(vp_int(c, self.ring.p) for c in vec if c) - self.den

    def coeff(self, i: int) -> CoeffElem:
        """Coefficient of u^i as a CoeffElem at the ring's working precision."""
        vec = self.coeff_vector(i)
        if not any(vec):
            return self.ring.zero()
        return _vector_to_elem(self.ring, vec, self.den)

    def coeff_fraction(self, i: int) -> Fraction:
        """Exact coefficient of u^i (only for m = 1)."""
        if self.ring.m != 1:
            raise ValueError("coeff_fraction requires m = 1")
        return Fraction(self.coeff_vector(i)[0], _ppow(self.ring.p, self.den))

    def coeffs(self) -> dict:
        return {i: self.coeff(i) for i in self.exponents()}

    def terms(self):
        """Yield ``(i, vector, vp)`` for every nonzero body term."""
        p, den = self.ring.p, self.den
        for k in range(self.length):
            vec = tuple(P[k] for P in self.parts)
            if any(vec):
                yield self.off + k, vec, min(vp_int(c, p) for c in vec if c) - den

    def newton_points(self):
        """Envelope over s >= 0 of the points (i, vp(c_i)) of the body."""
        if self._np is None:
            self._np = envelope([(i, v) for i, _, v in self.terms()])
        return self._np

    def lines(self):
        """Points bounding the whole series (body and error) from below."""
        pts = list(self.newton_points())
        if self.err is not None:
            pts += list(self.err.points)
        return pts

    def validity(self):
        if self.err is None:
            return Q(0), None
        return self.err.interval()

    def is_plus(self) -> bool:
        sup = self.support()
        body_ok = sup is None or sup[0] >= 0
        return body_ok and (self.err is None or self.err.elo >= 0)

    def is_minus(self) -> bool:
        sup = self.support()
        body_ok = sup is None or sup[1] <= 0
        return body_ok and (self.err is None or self.err.ehi <= 0)

    def is_strict_minus(self) -> bool:
        sup = self.support()
        body_ok = sup is None or sup[1] <= -1
        return body_ok and (self.err is None or self.err.ehi <= -1)

    def is_integral(self) -> bool:
        return all(v >= 0 for _, _, v in self.terms())

    # -- Gauss valuations --------------------------------------------------

    def gauss_norm(self, s) -> GaussValue:
        s = _frac(s)
        if s <= 0:
            raise ValueError("s must be positive")
        body_w = lines_min(self.newton_points(), s)
        if self.err is None:
            return GaussValue(s, body_w, True)
        if not self.err.valid_at(s):
            raise NotCertifiedError("norm not certified at this s")
        b = self.err.bound(s)
        if b > body_w:
            return GaussValue(s, body_w, True)
        return GaussValue(s, b, False)

    def w(self, s):
        """Certified lower bound for w_s (exact when available)."""
        return self.gauss_norm(s).w

    def dominant_term(self, s):
        """The unique body term minimizing w_s, certified to beat the error bound."""
        s = _frac(s)
        best, ties = None, 0
        for i, vec, v in self.terms():
            w = s * v + i
            if best is None or w < best[0]:
                best, ties = (w, i, vec), 1
            elif w == best[0]:
                ties += 1
        if best is None or ties > 1:
            raise NotAUnitError("not a unit in represented ring")
        if self.err is not None:
            if not self.err.valid_at(s) or not self.err.bound(s) > best[0]:
                raise NotAUnitError("not a unit in represented ring")
        return best[1], best[2]

    # -- ring structure ---------------------------------------------------

    def _check(self, other) -> LaurentSeries:
        if isinstance(other, LaurentSeries):
            if other.ring != self.ring:
                raise RingMismatchError("mixed coefficient rings")
            return other
        return LaurentSeries.from_dict(self.ring, {0: other}, (self.lo, self.hi))

    def _merge_window(self, other):
        return max(self.lo, other.lo), min(self.hi, other.hi)

    def __neg__(self):
        return LaurentSeries(self.ring, self.off, self.den, tuple(tuple(-c for c in P) for P in self.parts),
                             self.err, (self.lo, self.hi), self.floor, _clean=True)

    def __add__(self, other):
        other = self._check(other)
        return _add(self, other, self._merge_window(other), _meet(self.floor, other.floor))

    __radd__ = __add__

    def __sub__(self, other):
        return self + (-self._check(other))

    def __rsub__(self, other):
        return self._check(other) - self

    def __mul__(self, other):
        if isinstance(other, LaurentSeries):
            if other.ring != self.ring:
                raise RingMismatchError("mixed coefficient rings")
            return self.mul(other)
        return self.mul(self._check(other))

    __rmul__ = __mul__

    def mul(self, other: LaurentSeries, window=None, floor="meet") -> LaurentSeries:
        if window is None:
            window = self._merge_window(other)
        fl = _meet(self.floor, other.floor) if floor == "meet" else floor
        return _mul(self, other, window, fl)

    def shift(self, k: int) -> LaurentSeries:
        """Multiply by u^k (the window moves along)."""
        err = None
        if self.err is not None:
            e = self.err
            err = ErrorBound([(i + k, v) for i, v in e.points], e.smin, e.smax,
                             _add_inf(e.elo, k), _add_inf(e.ehi, k), prune=False)
        return LaurentSeries(self.ring, self.off + k, self.den, self.parts, err,
                             (self.lo + k, self.hi + k), self.floor, _clean=True)

    def scale_p(self, k: int) -> LaurentSeries:
        """Multiply by p^k exactly."""
        err = None
        if self.err is not None:
            e = self.err
            err = ErrorBound([(i, v + k) for i, v in e.points], e.smin, e.smax, e.elo, e.ehi, prune=False)
        if k >= 0:
            pk = _ppow(self.ring.p, k)
            return self._like(self.off, self.den, [[c * pk for c in P] for P in self.parts], err)
        return self._like(self.off, self.den - k, [list(P) for P in self.parts], err)

    def __pow__(self, e: int):
        if e < 0:
            return self.inverse() ** (-e)
        out = LaurentSeries.one(self.ring, (self.lo, self.hi), self.floor)
        base = self
        while e:
            if e & 1:
                out = out * base
            e >>= 1
            if e:
                base = base * base
        return out

    def equals(self, other, s, floor) -> bool:
        """True when w_s(self - other) >= floor (certified)."""
        d = self - self._check(other)
        return d.gauss_norm(s).w >= floor

    # -- theta, sigma and splitting -----------------------------------------

    def theta(self) -> LaurentSeries:
        """theta = u d/du, acting as i * c_i on the coefficient of u^i."""
        parts = [[(self.off + k) * c for k, c in enumerate(P)] for P in self.parts]
        err = None
        if self.err is not None:
            # |i| c_i has w_s no smaller than c_i since v_p(i) >= 0
            err = self.err
        return self._like(self.off, self.den, parts, err)

    def sigma(self, lift=None) -> LaurentSeries:
        """Frobenius substitution: sigma_0^a on coefficients and u -> u^sigma."""
        if lift is not None and not lift.is_default():
            return lift.apply(self)
        return _sigma_default(self)

    def split(self) -> tuple[LaurentSeries, LaurentSeries]:
        """(f^-, f^+) with f^- on exponents <= -1 and f^+ on exponents >= 0."""
        return self.restrict(None, -1), self.restrict(0, None)

    def restrict(self, a, b) -> LaurentSeries:
        """The part of the series on exponents in [a, b] (None = unbounded)."""
        a_ = -INF if a is None else a
        b_ = INF if b is None else b
        ka = 0 if a is None else max(0, a - self.off)
        kb = self.length if b is None else min(self.length, b - self.off + 1)
        parts = [list(P[ka:kb]) if kb > ka else [] for P in self.parts]
        err = None if self.err is None else self.err.restrict_support(a_, b_)
        return self._like(self.off + ka, self.den, parts, err)

    def constant_term(self) -> LaurentSeries:
        return self.restrict(0, 0)

    def snap(self, floor: Floor | None = None) -> LaurentSeries:
        """Round the body at ``floor`` (default: the series' own floor)."""
        fl = floor or self.floor
        return LaurentSeries(self.ring, self.off, self.den, self.parts, self.err, (self.lo, self.hi), fl)

    def inverse(self, s=None, floor: Floor | None = None, max_steps: int = 64) -> LaurentSeries:
        """Inverse of a unit whose w_s-dominant term is unique.

        The dominant monomial c u^k is factored out and the remaining unit,
        which is close to 1 at radius s, is inverted by Newton iteration.
        """
        fl = floor or self.floor
        if s is None:
            s = fl.s2 if fl is not None else Q(1)
        s = _frac(s)
        if fl is None:
            fl = Floor.at(self.ring.N, s)
        k, vec = self.dominant_term(s)
        cinv = _approx_inverse_vector(self, vec, k, fl)
        h = self.mul(cinv, window=(self.lo - k, self.hi - k), floor=fl)
        hinv = SeriesMatrix([[h]]).inverse_near_identity(s, fl, max_steps=max_steps)[0, 0]
        return hinv.mul(cinv, window=(self.lo, self.hi), floor=fl)

    def __truediv__(self, other):
        other = self._check(other)
        return self * other.inverse()

    # -- display -------------------------------------------------------------

    def __repr__(self):
        if self.ring.m == 1:
            body = " + ".join(f"({self.coeff_fraction(i)})*u^{i}" for i in self.exponents()) or "0"
        else:
            body = " + ".join(f"{list(self.coeff_vector(i))}/p^{self.den}*u^{i}" for i in self.exponents()) or "0"
        if self.err is not None:
            body += f" + O{list(self.err.points)}"
        return body


def _coeff_to_vector(ring: CoeffRing, c):
    """(integer coordinates, den, approximation-error valuation or None)."""
    p, m = ring.p, ring.m
    if isinstance(c, CoeffElem):
        if c.ring != ring:
            raise RingMismatchError("mixed coefficient rings")
        if c.is_zero():
            return (0,) * m, 0, None
        if c.val >= 0:
            s = _ppow(p, c.val)
            return tuple(x * s for x in c.unit), 0, None
        return tuple(c.unit), -c.val, None
    if isinstance(c, (tuple, list)):
        vec = [0] * m
        for j, x in enumerate(c):
            vec[j] = int(x)
        return tuple(vec), 0, None
    c = Fraction(c)
    if c == 0:
        return (0,) * m, 0, None
    num, den = c.numerator, c.denominator
    dv = vp_int(den, p)
    rest = den // _ppow(p, dv)
    if rest == 1:
        return (num,) + (0,) * (m - 1), dv, None
    e = ring(c)
    vec, d, _ = _coeff_to_vector(ring, e)
    return vec, d, e.val + e.prec


def _vector_to_elem(ring, vec, den) -> CoeffElem:
    p = ring.p
    v = min(vp_int(c, p) for c in vec if c)
    pv = _ppow(p, v)
    return CoeffElem.from_integers(ring, v - den, [c // pv for c in vec], ring.N)


def _approx_inverse_vector(f: LaurentSeries, vec, k: int, fl: Floor) -> LaurentSeries:
    """c^{-1} u^{-k} for the coefficient ``c = vec * p^-den``, to the precision the floor demands."""
    ring, p = f.ring, f.ring.p
    v = min(vp_int(c, p) for c in vec if c)
    unit = [c // _ppow(p, v) for c in vec]
    val = v - f.den
    # relative digits needed so that the error term at exponent -k clears the floor
    need = fl.threshold(-k) + val + 2
    need = max(need, 1)
    from .coeff import _inv_unit_poly

    inv = _inv_unit_poly(unit, ring.modulus, p, need)
    if ring.m == 1 and abs(unit[0]) == 1:
        inv = [unit[0]]
    pk = _ppow(p, need)
    inv = [c % pk for c in inv]
    inv = [c - pk if c > pk // 2 else c for c in inv]
    if -val >= 0:
        s = _ppow(p, -val)
        parts = [[c * s] for c in inv]
        den = 0
    else:
        parts = [[c] for c in inv]
        den = val
    window = (f.lo - 2 * abs(k), f.hi + 2 * abs(k))
    return LaurentSeries(ring, -k, den, parts, None, window, None)


# -- kernels -----------------------------------------------------------------

def _align(f: LaurentSeries, g: LaurentSeries):
    p = f.ring.p
    den = max(f.den, g.den)
    off = min(f.off, g.off) if f.length and g.length else (f.off if f.length else g.off)
    end = max(f.off + f.length, g.off + g.length)
    L = end - off

    def lift(h):
        sc = _ppow(p, den - h.den)
        out = []
        for P in h.parts:
            row = [0] * L
            base = h.off - off
            if sc == 1:
                row[base:base + len(P)] = P
            else:
                row[base:base + len(P)] = [c * sc for c in P]
            out.append(row)
        return out

    return off, den, lift(f), lift(g)


def _add(f, g, window, floor):
    if f.body_is_zero() and f.err is None and window == (g.lo, g.hi) and floor == g.floor:
        return g
    if g.body_is_zero() and g.err is None and window == (f.lo, f.hi) and floor == f.floor:
        return f
    if f.body_is_zero():
        off, den, parts = g.off, g.den, [list(P) for P in g.parts]
    elif g.body_is_zero():
        off, den, parts = f.off, f.den, [list(P) for P in f.parts]
    else:
        off, den, A, B = _align(f, g)
        parts = [[a + b for a, b in zip(Pa, Pb)] for Pa, Pb in zip(A, B)]
    return LaurentSeries(f.ring, off, den, parts, _union(f.err, g.err), window, floor)


def _fpolys(f: LaurentSeries):
    if f._fp is None:
        f._fp = tuple(fmpz_poly(list(P)) for P in f.parts)
    return f._fp


def _mul_err(f: LaurentSeries, g: LaurentSeries) -> ErrorBound | None:
    if f.err is None and g.err is None:
        return None
    pts = []
    ivs = []
    lo, hi = INF, -INF
    fsup, gsup = f.support(), g.support()
    if g.err is not None:
        ivs.append(g.err.interval())
        if fsup is not None:
            pts += minkowski(f.newton_points(), g.err.points)
            lo = min(lo, _add_inf(fsup[0], g.err.elo))
            hi = max(hi, _add_inf(fsup[1], g.err.ehi))
    if f.err is not None:
        ivs.append(f.err.interval())
        if gsup is not None:
            pts += minkowski(f.err.points, g.newton_points())
            lo = min(lo, _add_inf(gsup[0], f.err.elo))
            hi = max(hi, _add_inf(gsup[1], f.err.ehi))
    if f.err is not None and g.err is not None:
        pts += minkowski(f.err.points, g.err.points)
        lo = min(lo, _add_inf(f.err.elo, g.err.elo))
        hi = max(hi, _add_inf(f.err.ehi, g.err.ehi))
    smin, smax = _intersect_intervals(*ivs)
    if not pts:
        return None
    return ErrorBound(pts, smin, smax, lo, hi)


def _reduction_table(ring: CoeffRing):
    cache = ring.__dict__.setdefault("_redtab", None)
    if cache is not None:
        return cache
    from .coeff import poly_rem_monic

    m = ring.m
    tab = []
    for k in range(2 * m - 1):
        mono = [0] * k + [1]
        tab.append(poly_rem_monic(mono, ring.modulus) if k >= m else [1 if j == k else 0 for j in range(m)])
    ring.__dict__["_redtab"] = tab
    return tab


def _mul(f: LaurentSeries, g: LaurentSeries, window, floor) -> LaurentSeries:
    ring = f.ring
    err = _mul_err(f, g)
    if f.body_is_zero() or g.body_is_zero():
        return LaurentSeries(ring, 0, 0, [[] for _ in range(ring.m)], err, window, floor)
    A, B = _fpolys(f), _fpolys(g)
    m = ring.m
    if m == 1:
        prods = [A[0] * B[0]]
    else:
        raw = [None] * (2 * m - 1)
        for a in range(m):
            if A[a].is_zero():
                continue
            for b in range(m):
                if B[b].is_zero():
                    continue
                t = A[a] * B[b]
                raw[a + b] = t if raw[a + b] is None else raw[a + b] + t
        tab = _reduction_table(ring)
        prods = [fmpz_poly([]) for _ in range(m)]
        for k, t in enumerate(raw):
            if t is None:
                continue
            for j, c in enumerate(tab[k]):
                if c:
                    prods[j] = prods[j] + t * c
    L = f.length + g.length - 1
    parts = []
    for P in prods:
        cs = [int(c) for c in P.coeffs()]
        cs += [0] * (L - len(cs))
        parts.append(cs[:L])
    return LaurentSeries(ring, f.off + g.off, f.den + g.den, parts, err, window, floor)


def _sigma_default(f: LaurentSeries) -> LaurentSeries:
    """u -> u^q and sigma_0^a on coefficients."""
    ring = f.ring
    q = ring.q
    err = None
    if f.err is not None:
        e = f.err
        err = ErrorBound([(q * i, v) for i, v in e.points], e.smin * q,
                         None if e.smax is None else e.smax * q,
                         e.elo * q if e.elo not in (INF, -INF) else e.elo,
                         e.ehi * q if e.ehi not in (INF, -INF) else e.ehi)
    L = f.length
    if L == 0:
        return f._like(0, 0, [[] for _ in range(ring.m)], err)
    if ring.m == 1:
        parts = [[0] * ((L - 1) * q + 1)]
        parts[0][::q] = f.parts[0]
    else:
        # choose the precision of sigma_0 so that its error clears the floor
        prec = ring.N
        if f.floor is not None:
            lo_v = min(v for _, _, v in f.terms())
            worst = max(f.floor.threshold(q * i) for i in (f.off, f.off + L - 1))
            prec = max(prec, int(worst - lo_v) + 1)
        rows = ring.frobenius_matrix(ring.a, prec + f.den)
        m = ring.m
        parts = [[0] * ((L - 1) * q + 1) for _ in range(m)]
        for j in range(m):
            src = f.parts[j]
            if not any(src):
                continue
            for l in range(m):
                c = rows[j][l]
                if c:
                    dst = parts[l]
                    for k, x in enumerate(src):
                        if x:
                            dst[k * q] += c * x
        # error of the approximate sigma_0: relative p^prec on each coefficient
        pts = [(q * i, v + prec) for i, v in f.newton_points()]
        sig_err = ErrorBound(pts, elo=q * f.off, ehi=q * (f.off + L - 1))
        err = _union(err, sig_err)
    return f._like(q * f.off, f.den, parts, err)


# -- matrices ------------------------------------------------------------------

class SeriesMatrix:
    """n x n matrix of LaurentSeries over a common coefficient ring."""

    __slots__ = ("rows", "n", "ring")

    def __init__(self, rows):
        self.rows = tuple(tuple(r) for r in rows)
        self.n = len(self.rows)
        if any(len(r) != self.n for r in self.rows):
            raise ValueError("matrix must be square")
        self.ring = self.rows[0][0].ring
        if any(e.ring != self.ring for r in self.rows for e in r):
            raise RingMismatchError("entries over different rings")

    @classmethod
    def identity(cls, ring, n, window=DEFAULT_WINDOW, floor=None) -> SeriesMatrix:
        return cls.scalar(ring, n, 1, window, floor)

    @classmethod
    def scalar(cls, ring, n, c, window=DEFAULT_WINDOW, floor=None) -> SeriesMatrix:
        z = LaurentSeries.zero(ring, window, floor)
        d = LaurentSeries.from_dict(ring, {0: c}, window, floor)
        return cls([[d if i == j else z for j in range(n)] for i in range(n)])

    @classmethod
    def from_dicts(cls, ring, rows, window=DEFAULT_WINDOW, floor=None) -> SeriesMatrix:
        """Rows of ``{exponent: coefficient}`` dictionaries."""
        return cls([[LaurentSeries.from_dict(ring, d, window, floor) for d in r] for r in rows])

    @classmethod
    def constant(cls, ring, rows, window=DEFAULT_WINDOW, floor=None) -> SeriesMatrix:
        return cls.from_dicts(ring, [[{0: c} for c in r] for r in rows], window, floor)

    def __getitem__(self, ij):
        i, j = ij
        return self.rows[i][j]

    def __iter__(self):
        return iter(self.rows)

    def entries(self):
        return [e for r in self.rows for e in r]

    def map(self, fn) -> SeriesMatrix:
        return SeriesMatrix([[fn(e) for e in r] for r in self.rows])

    def _check(self, other) -> SeriesMatrix:
        if not isinstance(other, SeriesMatrix):
            raise TypeError("expected a SeriesMatrix")
        if other.n != self.n:
            raise ValueError("dimension mismatch")
        if other.ring != self.ring:
            raise RingMismatchError("mixed coefficient rings")
        return other

    def __add__(self, other):
        other = self._check(other)
        return SeriesMatrix([[a + b for a, b in zip(r, s)] for r, s in zip(self.rows, other.rows)])

    def __sub__(self, other):
        other = self._check(other)
        return SeriesMatrix([[a - b for a, b in zip(r, s)] for r, s in zip(self.rows, other.rows)])

    def __neg__(self):
        return self.map(lambda e: -e)

    def __mul__(self, other):
        if isinstance(other, SeriesMatrix):
            return self.mul(other)
        return self.map(lambda e: e * other)

    def __rmul__(self, other):
        return self.map(lambda e: other * e)

    def mul(self, other: SeriesMatrix, window=None, floor="meet") -> SeriesMatrix:
        other = self._check(other)
        n = self.n
        out = []
        for i in range(n):
            row = []
            for j in range(n):
                acc = None
                for k in range(n):
                    a, b = self.rows[i][k], other.rows[k][j]
                    if a.is_zero() or b.is_zero():
                        t = None
                    else:
                        t = a.mul(b, window=window, floor=floor)
                    if t is not None:
                        acc = t if acc is None else acc + t
                if acc is None:
                    w = window or self.rows[i][0]._merge_window(other.rows[0][j])
                    fl = _meet(self.rows[i][0].floor, other.rows[0][j].floor) if floor == "meet" else floor
                    acc = LaurentSeries.zero(self.ring, w, fl)
                row.append(acc)
            out.append(row)
        return SeriesMatrix(out)

    def transpose(self) -> SeriesMatrix:
        return SeriesMatrix(list(zip(*self.rows)))

    def theta(self) -> SeriesMatrix:
        return self.map(LaurentSeries.theta)

    def sigma(self, lift=None) -> SeriesMatrix:
        return self.map(lambda e: e.sigma(lift))

    def split(self) -> tuple[SeriesMatrix, SeriesMatrix]:
        minus = self.map(lambda e: e.restrict(None, -1))
        plus = self.map(lambda e: e.restrict(0, None))
        return minus, plus

    def body(self) -> SeriesMatrix:
        return self.map(LaurentSeries.body)

    def snap(self, floor: Floor | None = None) -> SeriesMatrix:
        return self.map(lambda e: e.snap(floor))

    def with_floor(self, floor: Floor | None) -> SeriesMatrix:
        return self.map(lambda e: e.with_floor(floor))

    def with_window(self, lo, hi) -> SeriesMatrix:
        return self.map(lambda e: e.with_window(lo, hi))

    def constant_term(self) -> SeriesMatrix:
        return self.map(LaurentSeries.constant_term)

    def identity_like(self) -> SeriesMatrix:
        e = self.rows[0][0]
        return SeriesMatrix.identity(self.ring, self.n, e.window, e.floor)

    def gauss_norm(self, s) -> GaussValue:
        """Entrywise minimum of w_s; exact only if the minimizing entries are exact."""
        vals = [e.gauss_norm(s) for e in self.entries()]
        w = min(v.w for v in vals)
        exact = all(v.exact for v in vals if v.w == w)
        return GaussValue(_frac(s), w, exact)

    def w(self, s):
        return self.gauss_norm(s).w

    def is_plus(self) -> bool:
        return all(e.is_plus() for e in self.entries())

    def is_strict_minus(self) -> bool:
        return all(e.is_strict_minus() for e in self.entries())

    def is_exact(self) -> bool:
        return all(e.is_exact() for e in self.entries())

    def lines(self):
        pts = []
        for e in self.entries():
            pts += e.lines()
        return pts

    def validity(self):
        return _intersect_intervals(*[e.validity() for e in self.entries()])

    def det(self) -> LaurentSeries:
        """Determinant by cofactor expansion (n <= 4)."""
        if self.n > 4:
            raise ValueError("determinant implemented for n <= 4")
        return _det([list(r) for r in self.rows])

    def adjugate(self) -> SeriesMatrix:
        n = self.n
        if n == 1:
            return SeriesMatrix([[LaurentSeries.one(self.ring, self.rows[0][0].window, self.rows[0][0].floor)]])
        rows = [list(r) for r in self.rows]
        adj = [[None] * n for _ in range(n)]
        for i in range(n):
            for j in range(n):
                minor = [[rows[a][b] for b in range(n) if b != j] for a in range(n) if a != i]
                c = _det(minor)
                adj[j][i] = c if (i + j) % 2 == 0 else -c
        return SeriesMatrix(adj)

    def inverse(self, s=None, floor: Floor | None = None, max_steps: int = 64) -> SeriesMatrix:
        """Inverse, via Newton iteration when w_s(M - I) > 0 and adjugate/det otherwise."""
        e = self.rows[0][0]
        fl = floor or e.floor
        if s is None:
            s = fl.s2 if fl is not None else Q(1)
        s = _frac(s)
        if fl is None:
            fl = Floor.at(self.ring.N, s)
        try:
            near = (self - self.identity_like()).gauss_norm(s).w > 0
        except NotCertifiedError:
            near = False
        if near:
            return self.inverse_near_identity(s, fl, max_steps)
        d = self.det()
        try:
            dinv = d.inverse(s, fl, max_steps)
        except NotAUnitError as exc:
            raise PrecisionError("not invertible at precision") from exc
        adj = self.adjugate()
        return adj.map(lambda a: a.mul(dinv, floor=fl))

    def inverse_near_identity(self, s, floor: Floor, max_steps: int = 64) -> SeriesMatrix:
        """Newton inverse X <- X + X(I - A X) for A with w_s(A - I) > 0, certified.

        With R = I - A X for the final exact iterate X, A^{-1} - X = X R (I - R)^{-1},
        whose w_t is at least w_t(X) + w_t(R) wherever w_t(R) > 0.
        """
        s = _frac(s)
        A = self
        I = self.identity_like().with_floor(floor)
        Ab = A.body()
        X = I
        prev = None
        for _ in range(max_steps):
            R = (I - Ab.mul(X, window=(-10**9, 10**9), floor=None)).with_floor(floor)
            wR = R.gauss_norm(s).w
            if wR == INF:
                break
            target = floor.F - X.gauss_norm(s).w
            if wR >= target + 1:
                break
            if prev is not None and wR <= prev:
                break
            prev = wR
            X = (X + X.mul(R, floor=floor)).snap(floor)
            X = X.body()
        # certificate, computed without any rounding or clipping
        wide = (-10**9, 10**9)
        R = SeriesMatrix.identity(self.ring, self.n, wide) - A.mul(X, window=wide, floor=None)
        rb = R.w_lines_interval()
        if rb is None:
            raise PrecisionError("not invertible at precision")
        r_lines, r_int, r_sup = rb
        pos = positive_interval(r_lines, *r_int)
        if pos is None or not (pos[0] < s and (pos[1] is None or s < pos[1])):
            raise PrecisionError("not invertible at precision")
        if not r_lines:
            return X
        x_lines = X.lines()
        pts = minkowski(x_lines, r_lines)
        # support of X * sum_{k>=1} R^k
        a, b = r_sup
        geo_lo = a if a >= 0 else -INF
        geo_hi = b if b <= 0 else INF
        xs = [e.support() for e in X.entries() if e.support() is not None]
        xlo = min(t[0] for t in xs)
        xhi = max(t[1] for t in xs)
        eb = ErrorBound(pts, pos[0], pos[1], _add_inf(xlo, geo_lo), _add_inf(xhi, geo_hi))
        return X.map(lambda e: e.with_error(eb))

    def w_lines_interval(self):
        """(lines, validity interval, support hull) bounding every entry, or None if invalid."""
        lines = []
        lo, hi = INF, -INF
        for e in self.entries():
            lines += e.lines()
            sup = e.support()
            if sup is not None:
                lo, hi = min(lo, sup[0]), max(hi, sup[1])
            if e.err is not None:
                lo, hi = min(lo, e.err.elo), max(hi, e.err.ehi)
        iv = self.validity()
        if iv[1] is not None and iv[1] <= iv[0]:
            return None
        return envelope(lines, *iv), iv, (lo, hi)

    def __repr__(self):
        return "SeriesMatrix(" + "; ".join(", ".join(repr(e) for e in r) for r in self.rows) + ")"


def _det(rows) -> LaurentSeries:
    n = len(rows)
    if n == 1:
        return rows[0][0]
    if n == 2:
        return rows[0][0] * rows[1][1] - rows[0][1] * rows[1][0]
    acc = None
    for j in range(n):
        a = rows[0][j]
        if a.is_zero():
            continue
        minor = [[rows[i][k] for k in range(n) if k != j] for i in range(1, n)]
        t = a * _det(minor)
        if j % 2:
            t = -t
        acc = t if acc is None else acc + t
    if acc is None:
        return LaurentSeries.zero(rows[0][0].ring, rows[0][0].window, rows[0][0].floor)
    return acc
