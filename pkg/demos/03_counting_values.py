"""
Integer points with 0 < Q(x) < 1
================================

Estimate the volume constant c_Q of the shell {0 < Q < 1} from volumes at
several radii, then compare exact lattice-point counts N(Q, 0, 1, T) with
c_Q * T and fit how fast the discrepancy grows.
"""
# %%
from geonum import c_q_estimate, random_form
from geonum.experiments import error_term_experiment, geometric_grid

Q = random_form(2, 1, seed=3)
grid = geometric_grid(10, 80, 7)
cq = c_q_estimate(Q, 0.0, 1.0, grid, samples=10**6, seed=0)
print(f"c_Q = {cq.c_q:.4f}")
for T, vol, se, z in cq.rows():
    print(f"  T={T:6.2f}  volume {vol:9.2f} +- {se:5.2f}  volume/T {z:.4f}")

# %%
res = error_term_experiment(Q, 0.0, 1.0, grid, cq.c_q, seed=3)
print("\n     T        N    c_Q T   residual")
for r in res.records:
    print(f"{r.parameter:6.2f} {r.observed:8.0f} {r.reference:8.1f} {r.residual:9.1f}")
print(f"growth exponent of |residual|: {res.fit.slope:.3f}  (bound (n-1)/2 + delta)")
