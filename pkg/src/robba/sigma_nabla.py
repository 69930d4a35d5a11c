"""(sigma, nabla)-modules over the Robba ring model.

A module is a pair of matrices (Phi, N) in a fixed basis: F e_j = sum_i Phi_ij e_i
and nabla e_j = sum_i N_ij e_i (x) du/u.  With psi = u^sigma / u^q the
Frobenius and connection are compatible exactly when

    N Phi + theta(Phi) = (q + theta(psi)/psi) Phi sigma(N),

which for the default lift u^sigma = u^q is N Phi + theta(Phi) = q Phi sigma(N).
A change of basis by V transforms the matrices as

    Phi' = V^{-1} Phi V^sigma,      N' = V^{-1} N V + V^{-1} theta(V).
"""
from __future__ import annotations

import math

from dataclasses import dataclass, field
from fractions import Fraction

from .coeff import INF, CoeffRing
from .factor import FullFactorization, conditioning, factor_full, pole_depth
from .series import Floor, GaussValue, LaurentSeries, NotCertifiedError, SeriesMatrix

RING_KINDS = ("R", "R+", "loc")


class InconsistentReductionError(ArithmeticError):
    pass


class WitnessError(ValueError):
    pass


class FrobeniusLift:
    """u -> image_of_u, with image_of_u / u^q required to be a unit."""

    def __init__(self, ring: CoeffRing, image_of_u: LaurentSeries | None = None):
        self.ring = ring
        self.q = ring.q
        if image_of_u is None:
            image_of_u = LaurentSeries.monomial(ring, 1, ring.q)
        self.image_of_u = image_of_u
        self._default = (image_of_u.is_exact() and image_of_u.support() == (ring.q, ring.q)
                         and image_of_u.coeff_vector(ring.q) == (1,) + (0,) * (ring.m - 1)
                         and image_of_u.den == 0)
        psi = self.psi()
        if psi.body_is_zero() or psi.coeff_vp(0) != 0:
            raise ValueError("u^sigma / u^q is not a unit")
        rest = psi - psi.constant_term()
        if not rest.body_is_zero() and any(v < 0 for _, _, v in rest.terms()):
            raise ValueError("u^sigma / u^q is not a unit")

    @classmethod
    def default(cls, ring: CoeffRing) -> FrobeniusLift:
        return cls(ring)

    def is_default(self) -> bool:
        return self._default

    def psi(self) -> LaurentSeries:
        return self.image_of_u.shift(-self.q)

    def dlog_factor(self, s=Fraction(1, 2), floor: Floor | None = None, window=None) -> LaurentSeries:
        """q + theta(psi)/psi: the image of du/u under d(sigma), in units of du/u."""
        window = window or self.image_of_u.window
        q = LaurentSeries.from_dict(self.ring, {0: self.q}, window, floor)
        if self._default:
            return q
        psi = self.psi().with_floor(floor).with_window(*window)
        return q + psi.theta() * psi.inverse(s, floor)

    def apply(self, f: LaurentSeries) -> LaurentSeries:
        """sigma(f) = sum sigma_0^a(c_i) (u^sigma)^i."""
        base = f.body().sigma()  # sigma_0^a on coefficients, u -> u^q
        psi = self.psi().with_floor(f.floor)
        psi_inv = None
        acc = LaurentSeries.zero(f.ring, f.window, f.floor)
        q = self.q
        for i in sorted(base.exponents()):
            k = i // q
            term = base.restrict(i, i)
            if k > 0:
                term = term * psi**k
            elif k < 0:
                if psi_inv is None:
                    psi_inv = psi.inverse(Fraction(1, 2), f.floor)
                term = term * psi_inv ** (-k)
            acc = acc + term
        if f.err is not None:
            e = f.err
            acc = acc.with_error(type(e)([(q * i, v) for i, v in e.points], e.smin * q,
                                         None if e.smax is None else e.smax * q))
        return acc

    def __eq__(self, other):
        if not isinstance(other, FrobeniusLift):
            return NotImplemented
        d = self.image_of_u - other.image_of_u
        return self.ring == other.ring and d.is_zero()


@dataclass
class SigmaNablaModule:
    phi: SeriesMatrix
    nconn: SeriesMatrix
    frob: FrobeniusLift
    ring_kind: str = "R"

    def __post_init__(self):
        if self.phi.n != self.nconn.n:
            raise ValueError("Phi and N must have the same size")
        if self.ring_kind not in RING_KINDS:
            raise ValueError(f"ring must be one of {RING_KINDS}")

    @property
    def n(self) -> int:
        return self.phi.n

    @property
    def ring(self) -> CoeffRing:
        return self.phi.ring

    @classmethod
    def constant(cls, ring: CoeffRing, phi_rows, n_rows, window=None, lift=None) -> SigmaNablaModule:
        kw = {} if window is None else {"window": window}
        return cls(SeriesMatrix.constant(ring, phi_rows, **kw), SeriesMatrix.constant(ring, n_rows, **kw),
                   lift or FrobeniusLift.default(ring), "R+")

    def sigma(self, A: SeriesMatrix) -> SeriesMatrix:
        return A.sigma(None if self.frob.is_default() else self.frob)

    def is_log_model(self) -> bool:
        return self.phi.is_plus() and self.nconn.is_plus()


@dataclass
class Compatibility:
    holds: bool
    residual: GaussValue
    floor: Fraction


def compatibility_residual(M: SigmaNablaModule, s=Fraction(1, 2), floor: Floor | None = None) -> SeriesMatrix:
    phi, N = M.phi, M.nconn
    if floor is not None:
        phi, N = phi.with_floor(floor), N.with_floor(floor)
    # Poles of Phi times poles of sigma(N) must stay inside the window, or the
    # clipped tail would swamp the residual.
    lo, hi = phi[0, 0].window
    need = _pole_depth(phi) + M.ring.q * _pole_depth(N)
    if need < lo:
        phi, N = phi.with_window(need, hi), N.with_window(need, hi)
    lhs = N.mul(phi) + phi.theta()
    rhs = phi.mul(M.sigma(N))
    if M.frob.is_default():
        return lhs - rhs.map(lambda e: e.scale_p(M.ring.a))
    factor = M.frob.dlog_factor(s, floor, phi[0, 0].window)
    return lhs - rhs.map(lambda e: e * factor)


def check_compatibility(M: SigmaNablaModule, r=Fraction(1, 2), floor=None) -> Compatibility:
    """Whether N Phi + theta(Phi) = (q + theta(psi)/psi) Phi sigma(N) holds to ``floor`` at radius r."""
    r = Fraction(r)
    F = Fraction(M.ring.N if floor is None else floor)
    res = compatibility_residual(M, r)
    g = res.gauss_norm(r)
    return Compatibility(g.w >= F, g, F)


def base_change(M: SigmaNablaModule, V: SeriesMatrix, Vinv: SeriesMatrix | None = None,
                r=Fraction(1, 2), floor: Floor | None = None, ring_kind: str | None = None) -> SigmaNablaModule:
    """The module in the basis given by the columns of V.

    Without an explicit ``floor`` the products are rounded at the working
    precision raised by the conditioning of V at r and at r/q (the radius
    that Frobenius pulls back to r), so poles of V and V^sigma do not eat
    into the certified precision of the result.
    """
    r = Fraction(r)
    if floor is None:
        floor = _conditioned_floor(M, V, Vinv, r)
    given_inverse = Vinv is not None
    if Vinv is None:
        Vinv = V.inverse(r, floor)
    if floor is not None:
        V, Vinv = V.with_floor(floor), Vinv.with_floor(floor)
        M_phi, M_n = M.phi.with_floor(floor), M.nconn.with_floor(floor)
    else:
        M_phi, M_n = M.phi, M.nconn
    # Work on a window widened by the pole depths so that intermediate
    # clipping is never amplified by a later pole; clip back at the end.
    lo, hi = M_phi[0, 0].window
    depth = _pole_depth(Vinv) + _pole_depth(M_phi) + _pole_depth(M_n) + M.ring.q * _pole_depth(V)
    if depth < 0:
        wide = (lo + depth, hi - depth)
        V, M_phi, M_n = (A.with_window(*wide) for A in (V, M_phi, M_n))
        Vinv = Vinv.with_window(*wide) if given_inverse else V.inverse(r, floor)
    phi = Vinv.mul(M_phi).mul(M.sigma(V))
    N = Vinv.mul(M_n).mul(V) + Vinv.mul(V.theta())
    if depth < 0:
        phi, N = phi.with_window(lo, hi), N.with_window(lo, hi)
    return SigmaNablaModule(phi, N, M.frob, ring_kind or M.ring_kind)


def _pole_depth(A: SeriesMatrix) -> int:
    """Lowest exponent (at most 0) carried by any entry of A."""
    return min([0] + [i for e in A.entries() for i in e.exponents()])


def _neg_w(A: SeriesMatrix, s) -> Fraction:
    try:
        w = A.gauss_norm(s).w
    except NotCertifiedError:
        return Fraction(0)
    if w == math.inf:
        return Fraction(0)
    return max(Fraction(0), -Fraction(w))


def _conditioned_floor(M: SigmaNablaModule, V: SeriesMatrix, Vinv: SeriesMatrix | None, r: Fraction,
                       guard: int = 4) -> Floor:
    """Working floor raised by every digit a base change and a later compatibility check can lose.

    That is the conditioning of V at r and (times q) at r/q, plus the pole
    sizes of Phi, N and sigma(N), which multiply the rounding error of the
    transformed matrices.
    """
    ring = M.ring
    q = ring.q
    F = Fraction(ring.N + guard)
    if Vinv is None:
        Vinv = V.inverse(r, Floor.at(F, r, r / q))
    kappa = 2 * (_neg_w(V, r) + _neg_w(Vinv, r))
    kappa += q * (_neg_w(V, r / q) + _neg_w(Vinv, r / q))
    kappa += _neg_w(M.phi, r) + _neg_w(M.nconn, r) + q * _neg_w(M.nconn, r / q)
    return Floor.at(F + kappa, r, r / q)


def check_unipotent(M: SigmaNablaModule, r=Fraction(1, 2), floor=None) -> bool:
    """N constant and strictly upper triangular in the given basis, to ``floor`` at radius r.

    Entries on or below the diagonal must vanish and entries above it may
    differ from a constant only by terms of w_r at least ``floor``.
    """
    F = Fraction(M.ring.N if floor is None else floor)
    N = M.nconn
    for i in range(N.n):
        for j in range(N.n):
            e = N[i, j]
            rest = e if i >= j else e - e.constant_term().body()
            try:
                if rest.gauss_norm(r).w < F:
                    return False
            except NotCertifiedError:
                return False
    return True


@dataclass
class UnipotenceWitness:
    U: SeriesMatrix
    target_constants: tuple | None = None


@dataclass
class WitnessCheck:
    phi_hat: SeriesMatrix
    n_hat: SeriesMatrix
    deviation: Fraction | float


def validate_witness(M: SigmaNablaModule, witness: UnipotenceWitness, r=Fraction(1, 2),
                     floor=None, Uinv: SeriesMatrix | None = None, internal: Floor | None = None) -> WitnessCheck:
    """Check that U^{-1} Phi U^sigma and U^{-1} N U + U^{-1} theta(U) are integral constants.

    Returns the constant matrices (bodies of the constant terms) and the
    certified w_r of what was discarded to get them.
    """
    r = Fraction(r)
    F = Fraction(M.ring.N if floor is None else floor)
    internal = internal or Floor.at(F + 4, r)
    B = base_change(M, witness.U, Uinv, r, internal)
    consts = []
    worst = INF
    for A in (B.phi, B.nconn):
        C = A.constant_term().body()
        dev = (A - C).gauss_norm(r).w
        worst = min(worst, dev)
        if any(not e.body_is_zero() and e.coeff_vp(0) < 0 for e in C.entries()):
            raise WitnessError("witness constants are not integral")
        consts.append(C)
    if worst < F:
        raise WitnessError(f"witness does not reach constants (deviation w_r >= {worst} < {F})")
    if witness.target_constants is not None:
        for C, T in zip(consts, witness.target_constants):
            if (C - T).gauss_norm(r).w < F:
                raise WitnessError("witness constants differ from the declared targets")
    return WitnessCheck(consts[0], consts[1], worst)


@dataclass
class Reduction:
    module: SigmaNablaModule
    factorization: FullFactorization
    v_path: SigmaNablaModule
    checks: dict = field(default_factory=dict)
    values: dict = field(default_factory=dict)


def residue_matrix(M: SigmaNablaModule) -> SeriesMatrix:
    """N evaluated at u = 0 (the constant term of a plus-only connection matrix)."""
    return M.nconn.constant_term()


def semistable_reduce(M: SigmaNablaModule, witness: UnipotenceWitness, r=Fraction(1, 2),
                      floor=None, guard: int = 4) -> Reduction:
    """Theorem-5.1 style reduction of a quasi-unipotent module to a log-model.

    The witness U is factored as U = V W with W plus; the log-model is

        Phi~ = W (U^{-1} Phi U^sigma) W^{-sigma},
        N~   = W (U^{-1} N U + U^{-1} theta U) W^{-1} - theta(W) W^{-1},

    and the same matrices are recomputed as V^{-1} Phi V^sigma and
    V^{-1} N V + V^{-1} theta(V).  The two must agree to ``floor``.
    """
    r = Fraction(r)
    ring = M.ring
    F = Fraction(ring.N if floor is None else floor)
    q = ring.q
    s_low = r / q
    U = witness.U
    kappa_sigma = frobenius_conditioning(U, r, q, F + guard)
    ff = factor_full(U, r, floor=F, guard=guard, s_low=s_low, extra=kappa_sigma)
    fl = ff.floor
    Uinv = U.inverse(r, fl)
    wc = validate_witness(M, witness, r, F, Uinv, fl)
    checks, values = {}, {}
    values["witness_deviation"] = wc.deviation
    values["factor_residual"] = ff.achieved_floor
    checks["factor_reconstructs"] = ff.achieved_floor >= F

    # W-path: plus-only by construction
    W = ff.W.with_floor(fl)
    Winv = W.inverse(r, fl)
    phi_w = W.mul(wc.phi_hat.with_floor(fl)).mul(M.sigma(Winv))
    n_w = W.mul(wc.n_hat.with_floor(fl)).mul(Winv) - W.theta().mul(Winv)
    out = SigmaNablaModule(phi_w, n_w, M.frob, "R+")

    # V-path
    Vinv = ff.V_inverse().with_floor(fl)
    V = ff.V.with_floor(fl)
    vpath = base_change(M, V, Vinv, r, fl)
    try:
        dphi = (vpath.phi - phi_w).gauss_norm(r).w
        dn = (vpath.nconn - n_w).gauss_norm(r).w
    except NotCertifiedError as exc:
        raise InconsistentReductionError("inconsistent reduction: V-path not certified at r") from exc
    values["path_agreement_phi"] = dphi
    values["path_agreement_n"] = dn
    if dphi < F or dn < F:
        raise InconsistentReductionError(
            f"inconsistent reduction (w_r of V-path minus W-path: Phi {dphi}, N {dn}; floor {F})")
    checks["paths_agree"] = True
    checks["output_plus_only"] = out.is_log_model()

    before = check_compatibility(M, r, F)
    after = check_compatibility(out, r, F)
    values["compatibility_before"] = before.residual.w
    values["compatibility_after"] = after.residual.w
    checks["compatible_before"] = before.holds
    checks["compatible_after"] = after.holds

    res = residue_matrix(out)
    P = res
    for _ in range(out.n - 1):
        P = P.mul(res)
    values["residue_power"] = P.gauss_norm(r).w
    n_hat_nilpotent = _is_nilpotent_const(wc.n_hat, r, F)
    checks["residue_nilpotent"] = (not n_hat_nilpotent) or values["residue_power"] >= F
    return Reduction(out, ff, vpath, checks, values)


def frobenius_conditioning(U: SeriesMatrix, r, q: int, F) -> Fraction:
    """Digits lost to sigma(U) and sigma(U^{-1}) at radius r: q times the conditioning at r/q."""
    r = Fraction(r)
    Uinv = U.inverse(r, Floor.at(F, r, r / q))
    try:
        return q * conditioning(U, Uinv, r / q)
    except NotCertifiedError:
        return Fraction(0)


def _is_nilpotent_const(C: SeriesMatrix, r, F) -> bool:
    P = C
    for _ in range(C.n - 1):
        P = P.mul(C)
    return P.gauss_norm(r).w >= F


def twisted_fixture_window(U: SeriesMatrix, Uinv: SeriesMatrix, q: int, F, r) -> tuple[int, int]:
    """A window wide enough for Frobenius-twisted products of U and U^{-1}."""
    d = max(pole_depth(U), pole_depth(Uinv))
    lo = -(q + 2) * d - 10
    hi = int((q + 2) * d + 2 * F / r) + 10
    return lo, hi


__all__ = [
    "FrobeniusLift", "SigmaNablaModule", "Compatibility", "UnipotenceWitness", "Reduction",
    "check_compatibility", "compatibility_residual", "base_change", "check_unipotent",
    "validate_witness", "semistable_reduce", "residue_matrix", "InconsistentReductionError",
    "WitnessError", "twisted_fixture_window",
]
