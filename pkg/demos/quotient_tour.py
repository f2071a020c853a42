"""Walk through cube quotients: orbits, orbit distances and how rarely random orbit pairs are close.

Run:  python demos/quotient_tour.py
"""
import numpy as np

from cubequot.quotient import (
    build_quotient,
    cyclic_group,
    dihedral_group,
    far_pair_estimate,
    quotient_distance_bfs,
    quotient_distance_matrix,
    symmetric_group,
)

# %% orbit counts under three coordinate groups
print("k  cyclic  dihedral  symmetric")
for k in range(2, 10):
    counts = [build_quotient(make(k)).q for make in (cyclic_group, dihedral_group, symmetric_group)]
    print(f"{k:<2} {counts[0]:>6} {counts[1]:>9} {counts[2]:>10}")
# symmetric orbits are the Hamming weights, so that column is k + 1

# %% necklaces of length 6 and their distances
Q = build_quotient(cyclic_group(6))
D = quotient_distance_matrix(Q)
assert np.array_equal(D, quotient_distance_bfs(Q))  # min over the group == graph distance
print("\nC6 necklaces:", [format(int(r), "06b") for r in Q.reps])
print("orbit sizes:", Q.orbit_sizes.tolist())
print("diameter of the quotient:", int(D.max()), "(the cube itself has diameter 6)")

# %% close pairs become rare as k grows
print("\nfraction of orbit pairs at distance <= 0.02 k (cyclic group)")
for k in (8, 10, 12, 14, 16):
    Q = build_quotient(cyclic_group(k))
    est = far_pair_estimate(Q, 0.02, samples=200_000, seed=1)
    kind = "exact" if est.exact else f"MC +- {est.stderr:.1e}"
    print(f"k={k:2d}  orbits={Q.q:5d}  fraction={est.value:.3e} ({kind})  bound={est.bound:.3e}")
