"""From returns to eigenvalue ratios.

Estimate tail indices, rank-transform every series to Frechet(1)
marginals, then compare consecutive eigenvalue ratios with the
quantiles of (Gamma_i / Gamma_i+1)**2.
"""

from pathlib import Path

import numpy as np

from heavyspec import estim

data = Path(__file__).resolve().parents[1] / "recipes" / "data" / "synthetic_returns.csv"
panel = estim.read_returns_csv(data)
print("panel:", panel.shape, "rejected:", panel.rejected)

pairs = estim.tail_pairs(panel)
a = np.array([[t.alpha_lower, t.alpha_upper] for t in pairs])
print(f"Hill (k={pairs[0].k}): median lower {np.nanmedian(a[:, 0]):.2f}, upper {np.nanmedian(a[:, 1]):.2f};"
      f" share below 4: {np.nanmean(a < 4):.2f}")

X = estim.rank_transform(panel)
rep = estim.eigen_ratio_report(X, 20)
for i, r, lo, hi in zip(rep["i"][:6], rep["log_ratio"], rep["q1"], rep["q99"]):
    print(f"  i={i:2d}  log ratio {r:+.3f}   band [{lo:+.3f}, {hi:+.3f}]")
print("band coverage:", estim.band_coverage(rep))

raw = estim.eigen_ratio_report(panel, 20, alpha_for_bands=estim.RAW_BAND_ALPHA)
print("raw data, alpha=2.3 bands, coverage:", estim.band_coverage(raw))

lagged = [X.data[:, s : s + 990] for s in range(6)]
print("lag sums, ratio:", np.round(estim.lamyao_report(lagged)["ratio"], 4))
