"""Light tails against heavy tails: where does the largest eigenvalue live?

With Gaussian entries the centered and scaled largest eigenvalue of X X'
settles on the Tracy-Widom F1 law. With Pareto-type entries of index
alpha < 4 the right normalization is a_np**2 and the limit is Frechet
with index alpha/2. Both are checked here on small ensembles.
"""

import numpy as np

from heavyspec import limits, mc, rand_heavy, tracyw

p, n, reps = 50, 250, 300

# Gaussian panel, Tracy-Widom scaling
spec = mc.EnsembleSpec(mc.iid_spec(rand_heavy.standard_normal(), p, n), "tw", reps, base_seed=1)
gauss = mc.run_ensemble(spec)
tw = tracyw.tw1()
print("Gaussian: KS to F1 =", round(gauss.ks(lambda s: tw.cdf(np.clip(s, -8, 8))), 3))
print("  sample mean", round(float(gauss.mean()[0]), 3), "vs F1 mean about -1.21")

# Pareto(1.6) panel, lambda_1 / a_np**2
spec = mc.EnsembleSpec(mc.iid_spec(rand_heavy.pareto(1.6), p, n), "top_k", reps, base_seed=2)
heavy = mc.run_ensemble(spec)
print("Pareto 1.6: KS to Frechet(0.8) =", round(heavy.ks(lambda x: limits.frechet_cdf(0.8, x)), 3))

# the k-th largest follows the Poisson count law
top3 = mc.run_ensemble(mc.EnsembleSpec(mc.iid_spec(rand_heavy.pareto(1.6), p, n), "top_k", reps, 3, {"k": 3}))
for k in (1, 2, 3):
    ks = mc.ks_distance(top3.column(k - 1), lambda x: limits.kth_max_cdf(k, 1.6, x))
    print(f"  k={k}: KS to the k-th max law = {ks:.3f}")
