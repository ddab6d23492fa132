"""
Small values of a random indefinite form
========================================

For eps = 2^-j find the shortest nonzero integer vector x with |Q(x)| < eps
and watch how the height grows. For n variables the growth exponent in
1/eps should not exceed 1/(n-2) by much.
"""
# %%
from geonum import random_form
from geonum.experiments import small_values_experiment

for p, q, jmax in [(2, 1, 10), (3, 1, 12)]:
    Q = random_form(p, q, seed=7)
    res = small_values_experiment(Q, jmax, mode="two_sided", T_max=4000)
    print(f"\nsignature ({p},{q}):")
    for j, rec in enumerate(res.records, start=1):
        print(f"  eps=2^-{j:<2d} height {rec.observed:9.3f}   x = {res.solutions.get(j)}")
    print(f"  fitted exponent {res.fit.slope:.3f}  (theory 1/(n-2) = {1 / (p + q - 2):.3f})")

# %%
# Restricting to 0 < Q(x) < eps can only make the shortest solution longer.
Q = random_form(2, 1, seed=7)
pos = small_values_experiment(Q, 8, mode="positive_side")
two = small_values_experiment(Q, 8, mode="two_sided")
print([round(a.observed, 2) for a in two.records])
print([round(b.observed, 2) for b in pos.records])
