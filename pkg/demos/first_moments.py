# Monte Carlo against the first-moment sums for short cycles in the blow-up.
import numpy as np

from girthforge import ModelParams, digon, eval_bounds, mc_intersecting_pairs, mc_short_cycles

rows = []
for n in (50, 100, 150):
    params = ModelParams(n=n, ell=4, k=2, eps=0.06, seed=7)
    est = mc_short_cycles(digon(), params, trials=500)
    rows.append((n, params.p, est.mean, est.standard_error, est.bound_value))

table = np.array(rows)
print("   n        p     mean      se    bound")
for n, p, mean, se, bound in table:
    print(f"{n:4.0f} {p:8.4f} {mean:8.3f} {se:7.3f} {bound:8.3f}")

# the expected count of short cycles grows, but slower than the sum allows
print("mean / bound:", np.round(table[:, 2] / table[:, 4], 3))

pairs = mc_intersecting_pairs(digon(), ModelParams(n=100, ell=3, k=2, eps=0.06, seed=7), trials=500)
print("intersecting pairs:", round(pairs.mean, 4), "bound", round(pairs.bound_value, 4), pairs.verdict)

# the same sums straight from the formula table
for row in eval_bounds(ModelParams(n=150, ell=4, k=2, eps=0.06), a=2).rows[:2]:
    print(row.name, row.value)
