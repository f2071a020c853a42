"""Noise boundaries, invariant influences and a sketch for a negative-type metric.

Run:  python demos/noise_and_sketch.py
"""
import numpy as np

from cubequot import analysis as an
from cubequot.cube import CubeFunction, spectrum
from cubequot.embed import hamming_metric, negative_type_test
from cubequot.quotient import build_quotient, cyclic_group
from cubequot.sketch import sketch_negative_type
from cubequot.suites import random_invariant_sign

rng = np.random.default_rng(3)

# %% a dictator set has boundary p/2; a random half of the cube is near 1/4 for all but tiny p
k = 10
x = np.arange(1 << k)
dictator = (x & 1) == 0
noise = rng.random(1 << k) < 0.5
print("p     dictator   random set")
for p in (0.01, 0.1, 0.3, 0.5):
    print(f"{p:<5} {an.boundary_fourier(dictator, k, p):.6f}   {an.boundary_fourier(noise, k, p):.6f}")

# %% invariant functions spread their low-degree influence evenly
Q = build_quotient(cyclic_group(12))
f = random_invariant_sign(Q, rng)
m = 3
per = an.influences(f, m).per_coordinate
print(f"\nlevel-{m} influences of a C12-invariant sign function:", np.round(per, 6))
top, bound, ok = an.transitive_influence_bound(f, Q.group, m)
print(f"max {top:.6f} <= (m/k) Var = {bound:.6f}: {ok}")

y = np.arange(1 << 12)
g = CubeFunction(12, np.where(y & 1, -1.0, 1.0))  # a dictator is not invariant
print("dictator level-1 influences:", np.round(an.influences(g, 1).per_coordinate, 3))

# %% Hamming distance on F_2^6 is of negative type, so its square root is Euclidean
M = hamming_metric(6)
print("\nnegative type:", negative_type_test(M))
for D in (2.0, 4.0, 16.0):
    rep = sketch_negative_type(M, 1.0, D, 64, seed=0, trials=500)
    far = "no pairs" if rep.far_vacuous else f"{rep.far_success:.3f}"
    print(f"D={D:<4} near success {rep.near_success:.3f}  far success {far}")
