"""
Dilates of a cube and growing balls
===================================

Count points of random 4-dimensional lattices in t * [-1/2, 1/2]^4 and check
|N - t^4| < t^(8/3 + 1/2); then follow balls of volume k in dimension 3 and
record the last k where |N - k| >= k^(3/2).
"""
# %%
import numpy as np

from geonum import Ball, Box, LatticeSampler, symmetrization_radius
from geonum.experiments import dilates_experiment, sequences_experiment

res = dilates_experiment(LatticeSampler("gm", 4), Box([1.0] * 4), range(5, 26, 2), delta=0.5,
                         lattices=10, master_seed=0)
print("fraction of lattices within the bound:", res.pass_fraction)
worst = max(res.records, key=lambda r: abs(r.residual) / r.reference)
print(f"largest relative deviation {worst.residual / worst.reference:+.4f} at t = {worst.parameter}")

# %%
seq = sequences_experiment(LatticeSampler("gm", 3), lambda k: Ball(3, symmetrization_radius(k, 3)),
                           lambda k: k, k_max=40, lattices=50, master_seed=0)
print("last violation index per lattice:", np.bincount(seq.last_violation))
print("clean from k=10 on:", seq.fraction_clean_from(10))
