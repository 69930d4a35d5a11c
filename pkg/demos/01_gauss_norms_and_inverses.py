"""
Gauss norms and inverses of Laurent series
==========================================

A Laurent series over Z_5 has one Gauss valuation w_s for each s > 0.
Whether a series is a unit depends on s: the term that dominates at one
radius need not dominate at another.
"""
from fractions import Fraction

from robba import CoeffRing, LaurentSeries, NotAUnitError, NotCertifiedError

R = CoeffRing(5)            # Z_5 to 12 digits
f = LaurentSeries.from_dict(R, {0: 1, -1: 5})   # 1 + 5/u

# w_s(1) = 0 and w_s(5/u) = s - 1, so 5/u dominates for s < 1 and 1 for s > 1
for s in (Fraction(1, 2), Fraction(1), Fraction(2)):
    print(f"w_{s}(f) =", f.gauss_norm(s).w)

# at s = 1/2 the inverse expands around 5/u, in positive powers of u
g = f.inverse(Fraction(1, 2))
print("inverse at s = 1/2 has exponents", min(g.exponents()), "to", max(g.exponents()))
print("w_1/2(f g - 1) =", (f * g - LaurentSeries.one(R)).gauss_norm(Fraction(1, 2)).w)

# its error certificate only covers the annulus where that expansion converges
try:
    g.gauss_norm(2)
except NotCertifiedError as exc:
    print("at s = 2:", exc)

# at s = 1 the two terms tie and f is not a unit at all
try:
    f.inverse(Fraction(1))
except NotAUnitError as exc:
    print("at s = 1:", exc)
