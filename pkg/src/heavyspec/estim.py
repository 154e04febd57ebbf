"""Analysis of observed return panels.

Hill tail indices for both tails of each series, the per-row rank
transform to approximately standard Frechet marginals, the consecutive
eigenvalue-ratio diagnostic with its limiting quantile bands, and the
sums-of-squared-autocovariances comparison.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from . import limits, spectra
from .linfield import Panel

__all__ = [
    "ReturnsPanel",
    "TailIndexPair",
    "read_returns_csv",
    "hill",
    "default_k",
    "tail_pairs",
    "rank_transform",
    "eigen_ratio_report",
    "band_coverage",
    "lamyao_report",
    "RAW_BAND_ALPHA",
    "RANK_BAND_ALPHA",
    "write_table_csv",
]

MIN_OBS = 10
# band exponents: raw returns use an alpha suggested by typical Hill estimates;
# rank-transformed data have Frechet(1) marginals, i.e. tail index 1
RAW_BAND_ALPHA = 2.3
RANK_BAND_ALPHA = 1.0


@dataclass(frozen=True)
class ReturnsPanel:
    """``p`` series by ``n`` observations, gap-free.

    ``rejected`` lists the labels of series dropped at ingestion because
    they had missing or non-numeric entries.
    """

    data: np.ndarray
    labels: tuple
    rejected: tuple = ()

    def __post_init__(self):
        d = np.asarray(self.data, dtype=float)
        if d.ndim != 2:
            raise ValueError("returns panel must be 2-d")
        if d.shape[1] < MIN_OBS:
            raise ValueError(f"need at least {MIN_OBS} observations per series, got {d.shape[1]}")
        if not np.all(np.isfinite(d)):
            raise ValueError("returns panel has missing values")
        if len(self.labels) != d.shape[0]:
            raise ValueError("one label per series required")
        object.__setattr__(self, "data", d)

    @property
    def shape(self):
        return self.data.shape

    @classmethod
    def from_array(cls, data, labels=None):
        data = np.atleast_2d(np.asarray(data, dtype=float))
        if labels is None:
            labels = tuple(f"s{i + 1}" for i in range(data.shape[0]))
        return cls(data, tuple(labels))


def _matrix(panel):
    return np.atleast_2d(spectra.as_matrix(panel))


def _to_float(cell):
    try:
        v = float(cell)
    except ValueError:
        return math.nan
    return v


def read_returns_csv(path, orientation="columns"):
    """Read a returns CSV whose header row holds the series labels.

    ``orientation="columns"``: one column per series, header = labels.
    ``orientation="rows"``: one row per series, first field = label; the
    header row (first field, then observation names) is skipped.
    Series with empty or non-numeric cells are dropped and reported in
    ``ReturnsPanel.rejected``.
    """
    with open(path, newline="") as fh:
        rows = [r for r in csv.reader(fh) if r]
    if len(rows) < 2:
        raise ValueError("returns CSV needs a header and at least one data row")
    if orientation == "columns":
        labels = [c.strip() for c in rows[0]]
        body = rows[1:]
        if any(len(r) != len(labels) for r in body):
            raise ValueError("ragged returns CSV")
        series = [[_to_float(r[j]) for r in body] for j in range(len(labels))]
    elif orientation == "rows":
        labels = [r[0].strip() for r in rows[1:]]
        series = [[_to_float(c) for c in r[1:]] for r in rows[1:]]
        if len({len(s) for s in series}) > 1:
            raise ValueError("ragged returns CSV")
    else:
        raise ValueError(f"unknown orientation {orientation!r}")
    keep, rejected = [], []
    for lab, s in zip(labels, series):
        (keep if np.all(np.isfinite(s)) else rejected).append((lab, s))
    if not keep:
        raise ValueError(f"all {len(rejected)} series have gaps")
    return ReturnsPanel(np.array([s for _, s in keep]), tuple(l for l, _ in keep), tuple(l for l, _ in rejected))


def hill(sample, k):
    """Hill estimate of the tail index from the ``k`` largest positive values.

    ``1 / mean_{i<=k} log(Y_(i) / Y_(k+1))`` with ``Y_(1) >= Y_(2) >= ...``.
    """
    k = int(k)
    if k < 2:
        raise ValueError("k must be >= 2")
    y = np.asarray(sample, dtype=float).ravel()
    y = y[y > 0]
    if y.size < k + 1:
        raise ValueError(f"need {k + 1} positive observations, have {y.size}")
    top = -np.partition(-y, k)[: k + 1]
    top = np.sort(top)[::-1]
    mean_log = np.mean(np.log(top[:k] / top[k]))
    if mean_log <= 0:
        raise ValueError("top order statistics are all tied")
    return float(1.0 / mean_log)


def default_k(n):
    return max(2, int(math.floor(0.05 * n)))


@dataclass(frozen=True)
class TailIndexPair:
    """Lower and upper tail index of one series; ``nan`` marks a flagged tail."""

    label: str
    alpha_lower: float
    alpha_upper: float
    k: int
    notes: tuple = field(default=())


def tail_pairs(panel, k=None):
    """``(alpha_L, alpha_U)`` per series: Hill on the losses and on the gains."""
    data = _matrix(panel)
    labels = getattr(panel, "labels", None) or tuple(f"s{i + 1}" for i in range(data.shape[0]))
    n = data.shape[1]
    k = default_k(n) if k is None else int(k)
    if not k < n / 2:
        raise ValueError(f"k={k} must be below n/2={n / 2:g}")
    out = []
    for lab, row in zip(labels, data):
        est, notes = {}, []
        for side, vals in (("lower", -row), ("upper", row)):
            try:
                est[side] = hill(vals, k)
            except ValueError as exc:
                est[side] = math.nan
                notes.append(f"{side}: {exc}")
        out.append(TailIndexPair(lab, est["lower"], est["upper"], k, tuple(notes)))
    return out


def rank_transform(panel):
    """Map each row to ``-1 / log(r_it / (n + 1))``, ``r_it`` the within-row rank.

    Ties are ranked by order of occurrence. The output rows have
    approximately standard Frechet marginals.
    """
    data = _matrix(panel)
    p, n = data.shape
    if n < 2:
        raise ValueError("need n >= 2")
    const = np.all(data == data[:, :1], axis=1)
    if np.any(const):
        raise ValueError(f"constant row(s) {np.flatnonzero(const).tolist()}: ranks are all tied")
    order = np.argsort(data, axis=1, kind="stable")
    ranks = np.empty((p, n))
    np.put_along_axis(ranks, order, np.arange(1, n + 1, dtype=float)[None, :], axis=1)
    X = -1.0 / np.log(ranks / (n + 1.0))
    return Panel(X, "field", 0, getattr(panel, "labels", None))


def eigen_ratio_report(X, m, alpha_for_bands=RANK_BAND_ALPHA, quantiles=(0.01, 0.5, 0.99)):
    """Observed ``log(lambda_(i+1) / lambda_(i))`` of ``X X'`` with limiting bands.

    The bands are quantiles of ``log((G_i / G_{i+1})**(2 / alpha))`` for
    Gamma points ``G``. Returns a dict of equal-length columns.
    """
    X = _matrix(X)
    p = X.shape[0]
    if not 1 <= m < p:
        raise ValueError(f"need 1 <= m < p = {p}")
    lam = spectra.covariance_eigs(X).values[: m + 1]
    if np.any(lam <= 0):
        raise ValueError("degenerate spectrum: zero eigenvalue within the report range")
    i = np.arange(1, m + 1)
    table = {"i": i, "log_ratio": np.log(lam[1:] / lam[:-1])}
    for q in quantiles:
        table[f"q{q * 100:g}"] = np.log(limits.ratio_law_quantile(i, alpha_for_bands, q))
    return table


def band_coverage(report, lo="q1", hi="q99", i_min=1):
    """Fraction of rows with ``i >= i_min`` whose log-ratio lies inside the band."""
    sel = report["i"] >= i_min
    x = report["log_ratio"][sel]
    return float(np.mean((x >= report[lo][sel]) & (x <= report[hi][sel])))


def lamyao_report(panels, s1_max=None):
    """Largest eigenvalue of ``sum_{s<=s1} A(s)A(s)'`` against ``sum_{s<=s1} lambda_1(A(s)A(s)')``."""
    panels = [_matrix(P) for P in panels]
    s1_max = len(panels) - 1 if s1_max is None else int(s1_max)
    if s1_max < 0:
        raise ValueError("s1_max must be >= 0")
    if s1_max >= len(panels):
        raise ValueError(f"lag {s1_max} not available (have {len(panels)} panels)")
    X0 = panels[0]
    total = np.zeros((X0.shape[0], X0.shape[0]))
    rows = {"s1": [], "lambda_sum": [], "sum_lambda": [], "ratio": []}
    acc = 0.0
    for s in range(s1_max + 1):
        A = spectra.autocov(X0, panels[s])
        AA = A @ A.T
        AA = 0.5 * (AA + AA.T)
        total += AA
        acc += float(np.linalg.eigvalsh(AA)[-1])
        top = float(np.linalg.eigvalsh(total)[-1])
        rows["s1"].append(s)
        rows["lambda_sum"].append(top)
        rows["sum_lambda"].append(acc)
        rows["ratio"].append(1.0 if s == 0 else min(1.0, top / acc))
    return {k: np.asarray(v) for k, v in rows.items()}


def write_table_csv(path, table):
    """Write a dict of equal-length columns as CSV."""
    keys = list(table)
    cols = [np.asarray(table[k]) for k in keys]
    with open(path, "w", newline="") as fh:
        fh.write(",".join(keys) + "\n")
        for row in zip(*cols):
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def _fmt(v):
    if isinstance(v, (str, np.str_)):
        return str(v)
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return f"{float(v):.17g}"
