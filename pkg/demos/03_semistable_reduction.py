"""
Removing poles from a unipotent module
======================================

Start from constant data (Phi, N) = (diag(1, 5), [[0, 1], [0, 0]]) and twist
it by T = I + u^-1 E_12.  The twisted module has poles.  Given T as a
unipotence witness, ``semistable_reduce`` factors T = V W and returns an
isomorphic module whose matrices are power series.
"""
from fractions import Fraction

from robba import (CoeffRing, SeriesMatrix, SigmaNablaModule, UnipotenceWitness, base_change,
                   check_compatibility, semistable_reduce)

R = CoeffRing(5)
win = (-80, 80)
C = SigmaNablaModule.constant(R, [[1, 0], [0, 5]], [[0, 1], [0, 0]], window=win)
T = SeriesMatrix.from_dicts(R, [[{0: 1}, {-1: 1}], [{}, {0: 1}]], window=win)
Tinv = SeriesMatrix.from_dicts(R, [[{0: 1}, {-1: -1}], [{}, {0: 1}]], window=win)

M = base_change(C, Tinv, Vinv=T)
print("twisted module is a log model:", M.is_log_model())
print("compatibility holds:", check_compatibility(M).holds)

red = semistable_reduce(M, UnipotenceWitness(T), Fraction(1, 2))
print("reduced module is a log model:", red.module.is_log_model())
for name, ok in red.checks.items():
    print(f"  {name}: {ok}")
for name, v in red.values.items():
    print(f"  {name} = {v}")
