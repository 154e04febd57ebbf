"""Order-statistic approximations to the singular values of sample autocovariances.

For a noise core ``Z`` (``p x n``) and the singular values ``v_j(s)`` of
``M(s)``, the ``i``-th largest singular value of ``X_n(0) X_n(s)'`` is
approximated by the ``i``-th largest element of one of

* ``delta``:       ``{Z^2_(i) * v_j(s)}`` (order statistics of all squares),
* ``gamma_right``: ``{D_i^-> * v_j(s)}`` with row sums ``D_i^-> = sum_t Z_it^2``,
* ``gamma_down``:  ``{D_t^v * v_j(s)}`` with column sums ``D_t^v = sum_i Z_it^2``.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass

import numpy as np

from .spectra import as_matrix

__all__ = [
    "KINDS",
    "OrderStats",
    "ApproxSet",
    "SupError",
    "order_stats",
    "top_products",
    "approx_set",
    "omega_set",
    "sup_error",
    "write_errors_csv",
]

KINDS = ("delta", "gamma_right", "gamma_down")


@dataclass(frozen=True)
class OrderStats:
    """Sorted squares and row/column sums of squares of a noise core."""

    squares: np.ndarray
    row_sums: np.ndarray
    col_sums: np.ndarray
    row_sums_sorted: np.ndarray
    col_sums_sorted: np.ndarray

    @property
    def shape(self):
        return (len(self.row_sums), len(self.col_sums))

    def source(self, kind, power=1):
        if kind == "delta":
            # only the p largest squares can enter the top-p products
            base = self.squares[: self.shape[0]]
        elif kind == "gamma_right":
            base = self.row_sums_sorted
        elif kind == "gamma_down":
            base = self.col_sums_sorted
        else:
            raise ValueError(f"unknown approximation kind {kind!r}")
        return base**power if power != 1 else base


def order_stats(Z):
    Z = as_matrix(Z)
    Z2 = Z * Z
    rows = Z2.sum(axis=1)
    cols = Z2.sum(axis=0)
    return OrderStats(
        np.sort(Z2, axis=None)[::-1],
        rows,
        cols,
        np.sort(rows)[::-1],
        np.sort(cols)[::-1],
    )


def top_products(a, b, m):
    """The ``m`` largest products ``a_i * b_j`` of two descending nonnegative lists.

    Uses a max-heap holding one frontier cell per ``j``; equal products are
    emitted in order of increasing ``j``. Returns ``(values, i_idx, j_idx)``.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if b.size == 0:
        raise ValueError("v must be nonempty")
    if m > a.size * b.size:
        raise ValueError(f"requested {m} products, only {a.size * b.size} exist")
    if np.any(np.diff(a) > 0) or np.any(np.diff(b) > 0):
        raise ValueError("inputs must be sorted descending")
    heap = [(-(a[0] * b[j]), j, 0) for j in range(b.size)] if a.size else []
    heapq.heapify(heap)
    vals = np.empty(m)
    ii = np.empty(m, dtype=int)
    jj = np.empty(m, dtype=int)
    for k in range(m):
        neg, j, i = heapq.heappop(heap)
        vals[k], ii[k], jj[k] = -neg, i, j
        if i + 1 < a.size:
            heapq.heappush(heap, (-(a[i + 1] * b[j]), j, i + 1))
    return vals, ii, jj


@dataclass(frozen=True)
class ApproxSet:
    kind: str
    lag: int
    values: np.ndarray
    v: np.ndarray

    def __len__(self):
        return len(self.values)


def _clean_v(v):
    v = np.asarray(v, dtype=float)
    if v.size == 0:
        raise ValueError("v must be nonempty")
    if np.any(v < 0):
        raise ValueError("v must be nonnegative")
    return v


def approx_set(stats, v, kind="delta", m=None, lag=0):
    """Top ``m`` (default ``p``) values of the product set for ``kind``."""
    v = _clean_v(v)
    src = stats.source(kind)
    if m is None:
        m = min(stats.shape[0], src.size * v.size)
    vals, _, _ = top_products(src, v, m)
    return ApproxSet(kind, lag, vals, v)


def omega_set(stats, v_sum, m=None, kind="delta"):
    """Top ``m`` values of ``{Z^4_(i) v_j(s0, s1)}``; compare against ``a_np**4``.

    ``kind`` other than ``"delta"`` squares the row/column sums instead.
    """
    v = _clean_v(v_sum)
    src = stats.source(kind, power=2)
    if m is None:
        m = min(stats.shape[0], src.size * v.size)
    vals, _, _ = top_products(src, v, m)
    return ApproxSet("omega_" + kind, -1, vals, v)


@dataclass(frozen=True)
class SupError:
    sup: float
    errors: np.ndarray


def sup_error(spectrum, approx, a2, power=1):
    """``a2**-power * max_i |lambda_(i)**power - approx_(i)**power|``.

    ``spectrum`` is a :class:`~heavyspec.spectra.SpectrumResult` or array,
    ``approx`` an :class:`ApproxSet` or array; both are truncated to the
    shorter length. ``errors`` holds the signed normalized differences.
    """
    if power not in (1, 2):
        raise ValueError("power must be 1 or 2")
    lam = np.asarray(getattr(spectrum, "values", spectrum), dtype=float)
    app = np.asarray(getattr(approx, "values", approx), dtype=float)
    m = min(lam.size, app.size)
    if m == 0:
        raise ValueError("length mismatch: empty spectrum or approximation")
    err = (lam[:m] ** power - app[:m] ** power) / a2**power
    return SupError(float(np.max(np.abs(err))), err)


def write_errors_csv(rows, path):
    """Rows of ``(replicate_id, err_delta, err_gamma)`` arrays -> long CSV."""
    with open(path, "w", newline="") as fh:
        fh.write("replicate_id,i,err_delta,err_gamma\n")
        for rep, ed, eg in rows:
            for i, (a, b) in enumerate(zip(ed, eg), start=1):
                fh.write(f"{rep},{i},{a:.17g},{b:.17g}\n")
