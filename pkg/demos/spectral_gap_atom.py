"""The spectral gap of a moving-average field has an atom.

X_it = Z_it + Z_i,t-1 - 2 (Z_i-1,t - Z_i-1,t-1) is summarized by its
matrix M(0), whose nonzero eigenvalues are 8 and 2. The heavy-tailed
eigenvalues inherit this structure: lambda_2 / lambda_1 sits at 1/4 with
probability 2**-alpha in the limit, and the self-normalized gap at 3/4.
"""

import numpy as np

from heavyspec import limits, linfield, mc, rand_heavy

coeffs = linfield.ma_example_coeffs()
print("M(0) singular values:", linfield.m_matrix(coeffs, 0).singular_values[:2])

alpha = 0.6
field = linfield.FieldSpec(coeffs, rand_heavy.pareto(alpha), 100, 500)
gap = mc.run_ensemble(mc.EnsembleSpec(field, "gap", 300, base_seed=4))
law = limits.gap_limit(alpha, 8.0, 2.0)
print(f"atom at 3/4: observed {gap.atom(0.75, 0.01)['mass']:.3f}, limit {law.atom_mass:.3f}")
print(f"sup distance below the atom: {gap.ks(law.continuous_cdf, support=(0.0, 0.74)):.3f}")

# conditioning on a large top eigenvalue makes the atom heavier
for x in (1.0, 10.0, 100.0):
    print(f"G({x:g}) = {limits.conditional_atom_prob(x, 1.5):.3f}")

# the iid field has no atom
iid = mc.run_ensemble(mc.EnsembleSpec(mc.iid_spec(rand_heavy.pareto(alpha), 100, 500), "gap", 300, 5))
g0 = limits.gap_limit(alpha, 1.0, 0.0)
print(f"iid: KS to 1-(1-x)^(alpha/2) = {iid.ks(g0.cdf, cdf_left=g0.cdf_left):.3f}")
print(f"iid: P(gap > 0.9) observed {np.mean(iid.column() > 0.9):.3f}, limit {1 - g0.cdf(0.9):.3f}")
