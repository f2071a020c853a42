"""Exact L1 distortion against the cut-cone LP, and the cheap Poincare lower bound beside it.

Run:  python demos/distortion_certificates.py
"""
from cubequot.embed import (
    distortion_lower_bound,
    exact_c1,
    path_metric,
    quotient_forms,
    quotient_metric,
    snowflake,
)
from cubequot.quotient import build_quotient, cyclic_group

# %% K_{2,3} is the smallest graph metric that does not embed isometrically in L1
k23 = path_metric([(i, j) for i in range(2) for j in range(2, 5)], 5)
res = exact_c1(k23, exact=True)
print("c1(K_2,3) =", res.value, "certified as", res.exact_value)
for cut in res.witness.to_dict()["cuts"]:
    print("  cut", cut["set"], "weight", round(cut["weight"], 6))

# a tree embeds isometrically
tree = path_metric([(0, 1), (0, 2), (2, 3), (2, 4), (4, 5)], 6)
print("c1(tree) =", exact_c1(tree, exact=True).exact_value)

# %% the necklace quotient of F_2^6 under snowflaking
Q = build_quotient(cyclic_group(6))
M = quotient_metric(Q)
w1, w2 = quotient_forms(Q)
print("\neps   lower bound   exact c1")
for eps in (0.0, 0.1, 0.25, 0.4, 0.6):
    lb = distortion_lower_bound(M, w1, w2, eps)
    c1 = exact_c1(snowflake(M, 1 - eps)).value
    print(f"{eps:<5} {lb.value:11.4f} {c1:10.4f}")
# the lower bound only needs one optimal cut, the exact value needs an LP over all cuts
