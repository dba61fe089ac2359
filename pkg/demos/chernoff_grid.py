# Exact binomial tails next to the Chernoff bound 2 exp(-gamma^2 m p / 3).
import numpy as np

from girthforge import chernoff_check

ms = [10, 100, 1000, 10_000]
gammas = [0.1, 0.5, 1.0, 1.4]

for prob in (0.01, 0.1, 0.5):
    # log10(exact tail / bound); -inf where the tail has no terms at all
    gap = np.array([[(r.log_exact_tail - r.log_bound) / np.log(10)
                     for r in (chernoff_check(m, prob, g) for g in gammas)] for m in ms])
    print(f"prob = {prob}")
    print("        " + "".join(f"{g:>9}" for g in gammas))
    for m, row in zip(ms, gap):
        print(f"{m:>7} " + "".join(f"{x:9.2f}" for x in row))
