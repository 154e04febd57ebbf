"""Limit laws for the largest eigenvalues and Monte Carlo samplers for them.

Everything here is expressed through the points ``Gamma_i = E_1 + ... + E_i``
of a unit-rate Poisson process; ``Gamma_i**(-2/alpha)`` are the points of the
Poisson process with mean measure ``mu(x, inf) = x**(-alpha/2)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from . import rand_heavy

__all__ = [
    "gamma_points",
    "frechet_cdf",
    "frechet_sample",
    "kth_max_cdf",
    "kth_max_sample",
    "ratio_law_cdf",
    "ratio_law_quantile",
    "GapLimit",
    "gap_limit",
    "ratio21_cdf",
    "ratio21_limit_sample",
    "trace_ratio_limit_sample",
    "trace_ratio_bias_bound",
    "top_limit_points",
    "joint_lag_points",
    "conditional_atom_prob",
    "mp_density",
    "mp_point_mass",
    "mp_edges",
    "nagaev_ratio",
    "NagaevRangeError",
    "pp_counts",
    "pp_count_check",
    "poisson_mean",
    "write_curve_csv",
]


def _positive(x, name="x"):
    x = np.asarray(x, dtype=float)
    if np.any(~(x > 0)):
        raise ValueError(f"{name} must be positive")
    return x


def _scalar(out):
    return float(out) if np.ndim(out) == 0 else out


def gamma_points(k, rng, size=None):
    """``Gamma_1 < ... < Gamma_k``; with ``size`` an array of shape ``(size, k)``."""
    rng = rand_heavy.make_rng(rng)
    shape = (k,) if size is None else (size, k)
    return np.cumsum(rng.standard_exponential(shape), axis=-1)


def frechet_cdf(alpha_half, x):
    """``Phi_{alpha_half}(x) = exp(-x**(-alpha_half))``."""
    x = _positive(x)
    return _scalar(np.exp(-(x ** (-alpha_half))))


def frechet_sample(alpha, rng, size):
    """``Gamma_1**(-2/alpha)`` draws, i.e. ``Phi_{alpha/2}`` variables."""
    return gamma_points(1, rng, size)[:, 0] ** (-2.0 / alpha)


def kth_max_cdf(k, alpha, x):
    """Limit CDF of the ``k``-th largest normalized eigenvalue in the iid case.

    ``P(N(x, inf) < k) = sum_{s<k} mu**s / s! * exp(-mu)`` with ``mu = x**(-alpha/2)``.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    x = _positive(x)
    mu = x ** (-alpha / 2.0)
    term = np.exp(-mu)
    total = term.copy()
    for s in range(1, k):
        term = term * mu / s
        total = total + term
    return _scalar(total)


def kth_max_sample(k, alpha, rng, size):
    return gamma_points(k, rng, size)[:, k - 1] ** (-2.0 / alpha)


def ratio_law_cdf(i, alpha, x):
    """``P((Gamma_i / Gamma_{i+1})**(2/alpha) <= x) = x**(i alpha / 2)`` on ``(0, 1)``."""
    x = np.asarray(x, dtype=float)
    if np.any((x <= 0) | (x >= 1)):
        raise ValueError("x must lie in (0, 1)")
    return _scalar(x ** (i * alpha / 2.0))


def ratio_law_quantile(i, alpha, q):
    """Inverse of :func:`ratio_law_cdf`: ``q**(2 / (i alpha))``."""
    q = np.asarray(q, dtype=float)
    if np.any((q <= 0) | (q >= 1)):
        raise ValueError("q must lie in (0, 1)")
    return _scalar(q ** (2.0 / (i * alpha)))


def _check_v12(v1, v2):
    if not v1 > 0:
        raise ValueError("v1 must be positive")
    if v2 < 0 or v2 > v1:
        raise ValueError("need 0 <= v2 <= v1")


@dataclass(frozen=True)
class GapLimit:
    """Limit law of the self-normalized gap ``(lambda_(1) - lambda_(2)) / lambda_(1)``.

    Continuous part ``1 - (1 - x)**(alpha/2)`` below ``atom_location``; the
    remaining mass ``(v2/v1)**(alpha/2)`` sits at ``atom_location = 1 - v2/v1``.
    With ``v2 = 0`` the atom is at 1 with zero mass.
    """

    alpha: float
    v1: float
    v2: float

    @property
    def atom_location(self):
        return 1.0 - self.v2 / self.v1

    @property
    def atom_mass(self):
        return (self.v2 / self.v1) ** (self.alpha / 2.0)

    def continuous_cdf(self, x):
        x = np.clip(np.asarray(x, dtype=float), 0.0, 1.0)
        return 1.0 - (1.0 - x) ** (self.alpha / 2.0)

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        out = np.where(x >= self.atom_location, 1.0, self.continuous_cdf(x))
        return _scalar(np.where(x < 0, 0.0, out))

    def cdf_left(self, x):
        """Left limits ``F(x-)``; differs from :meth:`cdf` only at the atom."""
        x = np.asarray(x, dtype=float)
        out = np.where(x > self.atom_location, 1.0, self.continuous_cdf(x))
        return _scalar(np.where(x <= 0, 0.0, out))

    def sample(self, rng, size):
        return 1.0 - ratio21_limit_sample(self.alpha, self.v1, self.v2, rng, size)


def gap_limit(alpha, v1, v2):
    _check_v12(v1, v2)
    return GapLimit(float(alpha), float(v1), float(v2))


def ratio21_cdf(alpha, v1, v2, x):
    """CDF of the limit of ``lambda_(2) / lambda_(1)``: zero below ``v2/v1``, ``x**(alpha/2)`` above."""
    _check_v12(v1, v2)
    x = np.asarray(x, dtype=float)
    rho = v2 / v1
    out = np.where(x >= rho, np.clip(x, 0, 1) ** (alpha / 2.0), 0.0)
    return _scalar(np.where(x >= 1, 1.0, out))


def ratio21_limit_sample(alpha, v1, v2, rng, size=None):
    """Draws of ``rho 1{U < rho**(alpha/2)} + U**(2/alpha) 1{U >= rho**(alpha/2)}``, ``rho = v2/v1``."""
    _check_v12(v1, v2)
    rng = rand_heavy.make_rng(rng)
    rho = v2 / v1
    u = rng.random(size)
    out = np.where(u < rho ** (alpha / 2.0), rho, u ** (2.0 / alpha))
    return _scalar(out)


def trace_ratio_bias_bound(alpha, K):
    """Upper bound ``K**(1 - 2/alpha) / (2/alpha - 1)`` for the truncated tail of ``sum Gamma_i**(-2/alpha)``."""
    e = 2.0 / alpha
    return K ** (1.0 - e) / (e - 1.0)


def trace_ratio_limit_sample(alpha, v, K, rng, size=None):
    """Draws of ``(v_1 / sum v_j) Gamma_1**(-2/alpha) / sum_{i<=K} Gamma_i**(-2/alpha)``.

    Truncating the series at ``K`` makes the draws biased upward; the absolute
    bias of the denominator is at most :func:`trace_ratio_bias_bound`.

    Returns ``(samples, bias_bound)``.
    """
    if not 0 < alpha < 2:
        raise ValueError("the trace ratio limit needs alpha in (0, 2)")
    if K < 100:
        raise ValueError("K must be >= 100")
    v = np.sort(np.asarray(v, dtype=float))[::-1]
    if not v[0] > 0:
        raise ValueError("v_1 must be positive")
    factor = v[0] / v[v > 0].sum()
    rng = rand_heavy.make_rng(rng)
    n = 1 if size is None else int(size)
    out = np.empty(n)
    chunk = max(1, 2_000_000 // K)
    for start in range(0, n, chunk):
        m = min(chunk, n - start)
        g = gamma_points(K, rng, m) ** (-2.0 / alpha)
        out[start : start + m] = factor * g[:, 0] / g.sum(axis=1)
    bound = trace_ratio_bias_bound(alpha, K)
    return (float(out[0]) if size is None else out), bound


def top_limit_points(alpha, v, k, rng, size=None):
    """The ``k`` largest values ``d_(1) >= ... >= d_(k)`` of ``{Gamma_i**(-2/alpha) v_j}``."""
    v = np.asarray(v, dtype=float)
    v = np.sort(v[v > 0])[::-1]
    if v.size == 0:
        raise ValueError("v needs a positive entry")
    n = 1 if size is None else int(size)
    g = gamma_points(k, rng, n) ** (-2.0 / alpha)
    pts = (g[:, :, None] * v[None, None, :]).reshape(n, -1)
    out = -np.sort(-pts, axis=1)[:, :k]
    return out[0] if size is None else out


def joint_lag_points(alpha, v_by_lag, K, rng):
    """Points ``Gamma_i**(-2/alpha) (v_j(0), ..., v_j(s))`` for ``i <= K``.

    ``v_by_lag`` has shape ``(r, s+1)``; returns shape ``(K, r, s+1)``.
    """
    v = np.atleast_2d(np.asarray(v_by_lag, dtype=float))
    g = gamma_points(K, rng) ** (-2.0 / alpha)
    return g[:, None, None] * v[None, :, :]


def conditional_atom_prob(x, alpha, v1=8.0, v2=2.0):
    """``G(x) = P(Gamma_1/Gamma_2 <= (v2/v1)**(alpha/2) | Gamma_1 < (x/v1)**(-alpha/2))``.

    Uses ``Gamma_1 = U Gamma_2`` with ``U`` uniform and independent of
    ``Gamma_2 ~ Gamma(2, 1)``.
    """
    _check_v12(v1, v2)
    x = float(_positive(x))
    y = (x / v1) ** (-alpha / 2.0)
    c = (v2 / v1) ** (alpha / 2.0)

    def joint(u):
        if u == 0:
            return 1.0
        z = y / u
        return 1.0 - math.exp(-z) * (1.0 + z)

    num, _ = integrate.quad(joint, 0.0, c, epsabs=1e-13, epsrel=1e-11, limit=200)
    den = 1.0 - math.exp(-y)
    return num / den


def mp_edges(gamma):
    r = math.sqrt(gamma)
    return (1 - r) ** 2, (1 + r) ** 2


def mp_density(gamma, x):
    """Absolutely continuous part of the Marchenko-Pastur law with ratio ``gamma``."""
    if not gamma > 0:
        raise ValueError("gamma must be positive")
    a, b = mp_edges(gamma)
    x = np.asarray(x, dtype=float)
    inside = (x >= a) & (x <= b) & (x > 0)
    xs = np.where(inside, x, 1.0)
    val = np.sqrt(np.clip((b - xs) * (xs - a), 0, None)) / (2 * math.pi * xs * gamma)
    return _scalar(np.where(inside, val, 0.0))


def mp_point_mass(gamma):
    """Mass at the origin, ``1 - 1/gamma`` when ``gamma > 1``."""
    return max(0.0, 1.0 - 1.0 / gamma)


class NagaevRangeError(ValueError):
    pass


@dataclass(frozen=True)
class NagaevResult:
    x: np.ndarray
    ratio: np.ndarray
    exceed_prob: np.ndarray
    exceed_count: np.ndarray
    replicates: int
    limit: float = 0.5


def nagaev_ratio(model, n, x_grid, replicates, seed, min_multiple=5.0, chunk=1_000_000):
    """Empirical ``P(S_n > x) / (n P(|Z| > x))`` for iid sums of length ``n``.

    Only ``x >= min_multiple * a_n`` is admitted; for symmetric models the
    ratio tends to ``p_+ = 1/2``.
    """
    if not model.heavy:
        raise rand_heavy.UnsupportedVariantError("nagaev_ratio needs a heavy-tailed model")
    if not model.alpha < 2:
        raise ValueError("nagaev_ratio is set up for alpha in (0, 2)")
    x = np.atleast_1d(np.asarray(x_grid, dtype=float))
    an = rand_heavy.a_of(model, n)
    if np.any(x < min_multiple * an):
        raise NagaevRangeError(f"x must be >= {min_multiple} * a_n = {min_multiple * an:.6g}")
    rng = rand_heavy.make_rng(seed)
    rows = max(1, chunk // n)
    counts = np.zeros(x.size, dtype=np.int64)
    done = 0
    while done < replicates:
        m = min(rows, replicates - done)
        S = rand_heavy.sample(model, m * n, rng, shape=(m, n)).sum(axis=1)
        counts += (S[:, None] > x[None, :]).sum(axis=0)
        done += m
    prob = counts / replicates
    denom = np.array([n * rand_heavy.tail_prob(model, xi) for xi in x])
    return NagaevResult(x, prob / denom, prob, counts, replicates)


def pp_counts(normalized_spectrum, x_grid):
    """``N_n(x, inf) = #{i : lambda_i / a_np**2 > x}`` for each ``x``."""
    lam = np.asarray(normalized_spectrum, dtype=float)
    x = np.atleast_1d(np.asarray(x_grid, dtype=float))
    return (lam[None, :] > x[:, None]).sum(axis=1)


def poisson_mean(x, alpha, v=(1.0,)):
    """Mean of the limit count on ``(x, inf)``: ``sum_j (x / v_j)**(-alpha/2)``."""
    x = _positive(x)
    v = np.asarray(v, dtype=float)
    v = v[v > 0]
    return _scalar(np.sum((x[..., None] / v) ** (-alpha / 2.0), axis=-1))


@dataclass(frozen=True)
class PPCheck:
    x: np.ndarray
    mean_count: np.ndarray
    poisson_mean: np.ndarray

    @property
    def rel_error(self):
        return np.abs(self.mean_count - self.poisson_mean) / self.poisson_mean


def pp_count_check(spectra, x_grid, alpha, v=(1.0,)):
    """Ensemble mean of ``N_n(x, inf)`` against the Poisson mean.

    ``spectra`` is one normalized spectrum or a sequence of them.
    """
    x = np.atleast_1d(np.asarray(x_grid, dtype=float))
    arr = spectra if isinstance(spectra, (list, tuple)) else [spectra]
    arr = [np.asarray(s) for s in arr]
    if arr and arr[0].ndim == 2:
        arr = list(arr[0])
    counts = np.array([pp_counts(s, x) for s in arr])
    return PPCheck(x, counts.mean(axis=0), np.atleast_1d(poisson_mean(x, alpha, v)))


def write_curve_csv(path, columns):
    """Write named equal-length columns, e.g. ``{"x": xs, "cdf": ys}``."""
    names = list(columns)
    cols = [np.asarray(columns[k], dtype=float) for k in names]
    with open(path, "w", newline="") as fh:
        fh.write(",".join(names) + "\n")
        for row in zip(*cols):
            fh.write(",".join(f"{v:.17g}" for v in row) + "\n")
