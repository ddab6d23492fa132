"""
The level-set constant of x^2 + y^2 - z^2
=========================================

The integral of 1/|grad Q| over the cone inside the unit ball equals
sqrt(2) * pi. The thin-shell estimator approaches it as eta shrinks, with a
bias of order sqrt(eta) coming from the ball boundary.
"""
# %%
import math

from geonum import c_p_surface, c_q_estimate, standard_form

Q = standard_form(2, 1)
print("exact", math.sqrt(2) * math.pi)
for eta in (1e-1, 1e-2, 1e-3):
    est = c_p_surface(Q, eta, samples=10**6, seed=1)
    print(f"eta={eta:g}: {est.value:.4f} +- {est.std_error:.4f}")

# %%
print("from shell volumes:", c_q_estimate(Q, -1, 1, [10, 20, 30, 40, 50]).c_q)
