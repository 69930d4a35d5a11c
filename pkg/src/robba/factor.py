"""Matrix factorizations over the Robba ring model.

* :func:`approximate_inverse` truncates U^{-1} to a Laurent polynomial X with
  w_r(XU - I) > 0.
* :func:`birkhoff_factor` writes a matrix close to the identity as Y Z with
  Y - I supported on negative exponents and Z on nonnegative ones, by
  repeatedly splitting off the minus and plus parts of M - I.
* :func:`factor_full` combines the two: U = V W with V = X^{-1} Y and W = Z.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .coeff import INF, PrecisionError
from .series import Floor, LaurentSeries, NotCertifiedError, SeriesMatrix

WIDE = (-10**9, 10**9)


class FactorizationError(ArithmeticError):
    pass


@dataclass
class BirkhoffFactorization:
    Y: SeriesMatrix
    Z: SeriesMatrix
    r: Fraction
    achieved_floor: Fraction | float
    deltas: list = field(default_factory=list)

    @property
    def iterations(self) -> int:
        return len(self.deltas) - 1

    def contraction_monotone(self) -> bool:
        return all(b > a for a, b in zip(self.deltas, self.deltas[1:]))


@dataclass
class FullFactorization:
    V: SeriesMatrix
    W: SeriesMatrix
    r: Fraction
    X: SeriesMatrix
    Y: SeriesMatrix
    achieved_floor: Fraction | float
    birkhoff: BirkhoffFactorization
    floor: Floor

    def V_inverse(self) -> SeriesMatrix:
        """V^{-1} = Y^{-1} X, using only the near-identity inverse of Y."""
        Yinv = self.Y.inverse_near_identity(self.r, self.floor)
        return Yinv.mul(self.X)


def _default_floor(M: SeriesMatrix, floor, guard, r, s_low) -> tuple[Fraction, Floor]:
    F = Fraction(M.ring.N if floor is None else floor)
    return F, Floor.at(F + guard, r, s_low)


def birkhoff_factor(M: SeriesMatrix, r, max_iters: int = 20, floor=None, guard: int = 4,
                    s_low=None) -> BirkhoffFactorization:
    """Factor M = Y Z for M with certified w_r(M - I) > 0.

    Each round splits E = M - I into its strict-minus and plus parts and
    replaces M by (I + E^-)^{-1} M (I + E^+)^{-1}.  The certified w_r(M - I)
    must strictly increase every round; otherwise the iteration is reported
    as diverged rather than returning a doubtful answer.
    """
    r = Fraction(r)
    F, fl = _default_floor(M, floor, guard, r, s_low)
    I = M.identity_like().with_floor(fl)
    try:
        delta = (M - I).gauss_norm(r).w
    except NotCertifiedError as exc:
        raise FactorizationError("precondition violated: w_r(M - I) is not certified") from exc
    if not delta > 0:
        raise FactorizationError("precondition violated: w_r(M - I) must be positive")
    cur = M.with_floor(fl)
    Y = Z = I
    deltas = [delta]
    for _ in range(max_iters):
        if delta >= F:
            break
        E = (cur - I).body()
        Em, Ep = E.split()
        A = I + Em
        B = I + Ep
        Ainv = A.inverse_near_identity(r, fl)
        Binv = B.inverse_near_identity(r, fl)
        cur = Ainv.mul(cur).mul(Binv)
        Y = Y.mul(A).snap(fl).body()
        Z = B.mul(Z).snap(fl).body()
        new = (cur - I).gauss_norm(r).w
        if not new > delta:
            deltas.append(new)
            raise FactorizationError(f"factorization diverged (w_r(M - I): {delta} -> {new})")
        delta = new
        deltas.append(delta)
    residual = Y.mul(Z, window=WIDE, floor=None) - M.with_window(*WIDE)
    achieved = residual.gauss_norm(r).w
    return BirkhoffFactorization(Y, Z, r, achieved, deltas)


def pole_depth(M: SeriesMatrix) -> int:
    """How far below exponent 0 the bodies of M reach (0 for plus matrices)."""
    lows = [e.support()[0] for e in M.entries() if e.support() is not None]
    return max([0] + [-x for x in lows])


def approximate_inverse(U: SeriesMatrix, r, budget=2, floor=None, guard: int = 4,
                        s_low=None, Uinv: SeriesMatrix | None = None) -> SeriesMatrix:
    """A Laurent-polynomial matrix X with certified w_r(X U - I) > 0.

    X is the body of U^{-1} with the terms of w_r above
    ``max(w_r(U^{-1}), -w_r(U)) + budget`` removed.  Terms at exponents low
    enough that their product with U (or their contribution to det X) could
    reach negative exponents are always kept, so the residual X U - I has no
    pole part.
    """
    r = Fraction(r)
    F, fl = _default_floor(U, floor, guard, r, s_low)
    n = U.n
    if Uinv is None:
        Uinv = U.inverse(r, fl)
    wU = U.gauss_norm(r).w
    wUinv = Uinv.gauss_norm(r).w
    thr = max(wUinv, -wU) + budget
    keep_below = max(pole_depth(U), (n - 1) * pole_depth(Uinv.body()))
    rows = []
    for row in Uinv.rows:
        out = []
        for e in row:
            terms = {}
            for i, vec, v in e.terms():
                if i <= keep_below or r * v + i <= thr:
                    terms[i] = (vec, e.den)
            out.append(_from_vectors(e, terms))
        rows.append(out)
    X = SeriesMatrix(rows)
    resid = X.mul(U, window=WIDE, floor=None) - SeriesMatrix.identity(U.ring, n, WIDE)
    try:
        w = resid.gauss_norm(r).w
    except NotCertifiedError as exc:
        raise FactorizationError("certification impossible within window") from exc
    if not w > 0:
        raise FactorizationError("certification impossible within window")
    det = X.det()
    if det.body_is_zero():
        raise PrecisionError("not invertible at precision")
    return X


def _from_vectors(like: LaurentSeries, terms: dict) -> LaurentSeries:
    ring = like.ring
    if not terms:
        return LaurentSeries.zero(ring, like.window, like.floor)
    lo = min(terms)
    hi = max(terms)
    parts = [[0] * (hi - lo + 1) for _ in range(ring.m)]
    den = like.den
    for i, (vec, d) in terms.items():
        for j in range(ring.m):
            parts[j][i - lo] = vec[j]
    return LaurentSeries(ring, lo, den, parts, None, like.window, like.floor)


def conditioning(U: SeriesMatrix, Uinv: SeriesMatrix, s) -> Fraction:
    """-(w_s(U) + w_s(U^{-1})) clipped at 0: digits lost when multiplying by U and U^{-1}."""
    return max(0, -U.gauss_norm(s).w) + max(0, -Uinv.gauss_norm(s).w)


def factor_full(U: SeriesMatrix, r, budget=2, floor=None, guard: int = 4, max_iters: int = 20,
                s_low=None, extra=0) -> FullFactorization:
    """U = V W with V = X^{-1} Y (X from :func:`approximate_inverse`) and W = Z plus.

    Internal rounding is tightened by the conditioning of U at r, that is by
    -(w_r(U) + w_r(U^{-1})), so that the reconstruction V W = U holds to the
    requested floor even when U has large poles.  ``extra`` tightens it
    further for callers that go on to apply Frobenius to the factors.
    """
    r = Fraction(r)
    F = Fraction(U.ring.N if floor is None else floor)
    probe = Floor.at(F + guard, r, s_low)
    Uinv = U.inverse(r, probe)
    kappa = conditioning(U, Uinv, r) + extra
    if kappa:
        Uinv = U.inverse(r, Floor.at(F + guard + kappa, r, s_low))
    Fi = F + kappa
    fl = Floor.at(Fi + guard, r, s_low)
    X = approximate_inverse(U, r, budget, Fi, guard, s_low, Uinv=Uinv)
    M = X.with_floor(fl).mul(U.with_floor(fl))
    bf = birkhoff_factor(M, r, max_iters, Fi, guard, s_low)
    Xinv = X.with_floor(fl).inverse(r, fl)
    V = Xinv.mul(bf.Y.with_floor(fl))
    W = bf.Z
    resid = V.mul(W) - U
    achieved = resid.gauss_norm(r).w
    return FullFactorization(V, W, r, X, bf.Y, achieved, bf, fl)


def is_plus_unit(M: SeriesMatrix, r, floor) -> bool:
    """Plus part certified, minus part below ``floor`` at r, and det(M)(0) a unit."""
    minus, plus = M.split()
    try:
        if minus.gauss_norm(r).w < floor:
            return False
    except NotCertifiedError:
        return False
    d0 = plus.det().constant_term()
    if d0.body_is_zero():
        return False
    return d0.coeff_vp(0) == 0 and (d0.err is None or d0.err.bound(Fraction(r)) > 0)


__all__ = [
    "BirkhoffFactorization", "FullFactorization", "FactorizationError",
    "birkhoff_factor", "approximate_inverse", "factor_full", "is_plus_unit", "pole_depth", "INF",
]
