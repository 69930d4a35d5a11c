"""
Splitting a matrix into minus and plus parts
============================================

A matrix close to the identity at radius r factors as M = Y Z with Y - I
made of negative powers of u and Z a power series.  ``factor_full``
handles the general case U = V W by first inverting U approximately.
"""
import random
from fractions import Fraction

from robba import CoeffRing, birkhoff_factor, factor_full, is_plus_unit
from robba.fixtures import laurent_times_plus, near_identity

r = Fraction(1, 2)
R = CoeffRing(5)
rng = random.Random(2)

M = near_identity(rng, R, 2)
bf = birkhoff_factor(M, r)
print("iterations:", bf.iterations)
print("contraction w_r(delta_k):", [str(d) for d in bf.deltas])
print("certified floor:", bf.achieved_floor)
print("Y - I strictly minus:", (bf.Y - bf.Y.identity_like()).is_strict_minus(), " Z plus:", bf.Z.is_plus())

# U built as (Laurent polynomial unit) times (plus unit); recover the split
U, V0, W0 = laurent_times_plus(rng, R, 2)
ff = factor_full(U, r)
print()
print("factor_full floor:", ff.achieved_floor)
print("W is plus:", ff.W.is_plus())
# the factorization is unique up to a plus unit in the middle
print("V^-1 V0 is a plus unit:", is_plus_unit(ff.V_inverse().mul(V0), r, R.N))
