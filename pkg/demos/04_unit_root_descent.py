"""
Trivializing a unit-root Frobenius
==================================

For Phi = 2 + 5u over Z_5 we look for C with C^-1 Phi C^sigma = I mod 5.
Modulo 5 this is the Lang equation D = 2 D^5, whose constant term asks for
x^4 = 1/2.  Since 2 has order 4 in F_5^*, the first field with a solution
is F_625.
"""
from robba import CoeffRing, SeriesMatrix, unit_root_reduce

R = CoeffRing(5)
Phi = SeriesMatrix.from_dicts(R, [[{0: 2, 1: 5}]])
res = unit_root_reduce(Phi, T=30)
print("d =", res.d, " m =", res.m, " residual valuation =", res.residual)
for step in res.transcript:
    print("step", step["step"], {k: v for k, v in step.items() if k in ("equation", "m", "check")})

# for p = 2 a second, additive step lifts the congruence to modulo 4
R2 = CoeffRing(2)
res2 = unit_root_reduce(SeriesMatrix.from_dicts(R2, [[{0: 1, 1: 2}]]), T=30)
print()
print("p = 2: d =", res2.d, " m =", res2.m, " steps:", [s["step"] for s in res2.transcript])
