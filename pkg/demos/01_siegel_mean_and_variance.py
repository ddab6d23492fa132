"""
Counting points of random lattices in a ball
============================================

Draw unimodular lattices from the q-ary family, count their nonzero points
in a ball of volume 20, and compare the ensemble with the mean value
formula (mean = volume) and the second-moment bound (variance <= C_3 * 20).
"""
# %%
import math

import numpy as np

from geonum import Ball, LatticeSampler, SampleStats, c_n, symmetrization_radius
from geonum.siegel import sample_counts

volume = 20.0
sampler = LatticeSampler("gm", n=3, q=1_000_003)
ball = Ball(3, symmetrization_radius(volume, 3))

seeds, counts = sample_counts(sampler, ball, trials=2000, master_seed=1)
stats = SampleStats.from_values(counts)
print(f"mean  {stats.mean:.3f} +- {stats.std_error:.3f}   (volume {volume})")
print(f"var   {stats.variance:.2f}   bound C_3*a = {c_n(3) * volume:.2f}")

# %%
# Counts are always even: nonzero lattice points come in +-v pairs.
print("histogram of counts:")
values, freq = np.unique(counts, return_counts=True)
for v, f in zip(values[:15], freq[:15]):
    print(f"{v:4d} {'#' * max(1, f // 10)}")

# %%
# Hole probability and concentration for the same ensemble.
print("P(no point)           ", np.mean(counts == 0), "<=", c_n(3) / volume)
M = 3.0
print(f"P(|N-a| > {M} sqrt a)  ", np.mean(np.abs(counts - volume) > M * math.sqrt(volume)), "<=", c_n(3) / M**2)
