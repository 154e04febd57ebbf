"""Build the synthetic returns panel shipped in recipes/data.

80 series of 1000 daily "log-returns" from a separable linear field with
Student t noise (2.3 degrees of freedom), scaled to about one percent.
Rerun to regenerate the file; the seed is fixed.
"""

import csv
import sys
from pathlib import Path

import numpy as np

from heavyspec import linfield, rand_heavy

P, N, SEED = 80, 1000, 20240
out = Path(sys.argv[1]) if len(sys.argv) > 1 else Path(__file__).resolve().parents[1] / "recipes" / "data" / "synthetic_returns.csv"

# a little cross-sectional and serial dependence, one common direction
coeffs = linfield.separable_coeffs([1.0, 0.35], [1.0, 0.2])
spec = linfield.FieldSpec(coeffs, rand_heavy.student_t(2.3), P, N, 0, SEED)
X = 0.01 * linfield.simulate_field(spec)[0].data

labels = [f"S{i + 1:03d}" for i in range(P)]
with open(out, "w", newline="") as fh:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(labels)
    for t in range(N):
        w.writerow([f"{v:.8g}" for v in X[:, t]])
print(f"wrote {P} series x {N} observations to {out}")
