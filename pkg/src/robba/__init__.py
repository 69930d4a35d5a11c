"""Certified Laurent-series arithmetic over unramified p-adic rings.

The package is organised like a small numerical library:

``robba.coeff``
    The coefficient ring W(F_{p^m}) modulo p^N with its Frobenius.
``robba.series``
    Laurent series with certified Gauss-norm error bounds, and matrices of them.
``robba.factor``
    Birkhoff and full factorizations U = V W with W over the plus ring.
``robba.sigma_nabla``
    Frobenius/connection modules, base change and semistable reduction.
``robba.unitroot``
    Lang and Artin-Schreier solvers and the unit-root descent.
``robba.cli``
    The command-line driver (``python -m robba``).
"""
from .coeff import INF, CoeffElem, CoeffRing, PrecisionError, RingMismatchError, first_irreducible
from .factor import (BirkhoffFactorization, FactorizationError, FullFactorization, approximate_inverse,
                     birkhoff_factor, factor_full, is_plus_unit)
from .residue import ResidueField, ResidueMatrix, ResidueSeries
from .series import (ErrorBound, Floor, GaussValue, LaurentSeries, NotAUnitError, NotCertifiedError,
                     SeriesMatrix, WindowError)
from .sigma_nabla import (FrobeniusLift, InconsistentReductionError, SigmaNablaModule, UnipotenceWitness,
                          WitnessError, base_change, check_compatibility, check_unipotent,
                          compatibility_residual, semistable_reduce, validate_witness)
from .unitroot import (NotUnitRootError, UnitRootDescent, UnitRootError, descent_depth, solve_artin_schreier,
                       solve_lang_mult, unit_root_reduce)

__version__ = "0.1.0"

__all__ = [
    "INF", "CoeffElem", "CoeffRing", "PrecisionError", "RingMismatchError", "first_irreducible",
    "ErrorBound", "Floor", "GaussValue", "LaurentSeries", "SeriesMatrix",
    "NotAUnitError", "NotCertifiedError", "WindowError",
    "BirkhoffFactorization", "FullFactorization", "FactorizationError",
    "approximate_inverse", "birkhoff_factor", "factor_full", "is_plus_unit",
    "FrobeniusLift", "SigmaNablaModule", "UnipotenceWitness", "InconsistentReductionError", "WitnessError",
    "base_change", "check_compatibility", "check_unipotent", "compatibility_residual",
    "semistable_reduce", "validate_witness",
    "ResidueField", "ResidueMatrix", "ResidueSeries",
    "UnitRootDescent", "UnitRootError", "NotUnitRootError", "descent_depth",
    "solve_artin_schreier", "solve_lang_mult", "unit_root_reduce",
]
