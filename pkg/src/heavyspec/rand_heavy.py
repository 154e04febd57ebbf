"""Noise laws with regularly varying tails and their normalizing sequences.

Four noise families are supported:

* ``ParetoSymmetric(alpha)``: uniform on ``[-1/4, 1/4]`` with mass 1/2 and
  Pareto tails, ``P(|Z| > x) = (4x)**(-alpha) / 2`` for ``x >= 1/4``.
* ``StudentT(nu)``: the standard (unscaled) t density, tail index ``nu``.
* ``ThreePoint``: +-sqrt(3) with probability 1/6 each, 0 otherwise. Its first
  four moments coincide with those of the standard normal.
* ``StandardNormal``.

Only the first two are heavy tailed; asking for their tail function or
normalizing constants on the light-tailed laws raises
:class:`UnsupportedVariantError`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate

__all__ = [
    "TailModel",
    "UnsupportedVariantError",
    "pareto",
    "student_t",
    "three_point",
    "standard_normal",
    "make_rng",
    "sample",
    "density",
    "tail_prob",
    "a_of",
    "NormalizingSeq",
    "model_from_dict",
    "model_to_dict",
]

KINDS = ("pareto", "student_t", "three_point", "normal")


class UnsupportedVariantError(ValueError):
    """A light-tailed model was used where a heavy-tailed one is required."""


@dataclass(frozen=True)
class TailModel:
    kind: str
    alpha: float | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown noise kind {self.kind!r}")
        if self.kind in ("pareto", "student_t"):
            if self.alpha is None or not self.alpha > 0:
                raise ValueError(f"{self.kind} requires a positive tail index")
        elif self.alpha is not None:
            raise ValueError(f"{self.kind} takes no tail index")

    @property
    def heavy(self) -> bool:
        return self.kind in ("pareto", "student_t")

    def __str__(self):
        if self.heavy:
            return f"{self.kind}({self.alpha:g})"
        return self.kind


def pareto(alpha):
    return TailModel("pareto", float(alpha))


def student_t(nu):
    return TailModel("student_t", float(nu))


def three_point():
    return TailModel("three_point")


def standard_normal():
    return TailModel("normal")


def model_from_dict(d):
    """Build a model from its config form, e.g. ``{"kind": "pareto", "alpha": 1.6}``."""
    d = dict(d)
    kind = d.pop("kind")
    alpha = d.pop("alpha", None)
    if d:
        raise ValueError(f"unknown noise keys {sorted(d)}")
    return TailModel(kind, None if alpha is None else float(alpha))


def model_to_dict(model):
    out = {"kind": model.kind}
    if model.alpha is not None:
        out["alpha"] = model.alpha
    return out


def make_rng(seed):
    """Counter-based generator keyed by ``seed``.

    Philox streams with distinct keys do not overlap, so replicate ``r`` of an
    ensemble can simply use key ``base_seed + r``.
    """
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.Generator(np.random.Philox(key=int(seed) % 2**64))


def _pareto_quantile(u, alpha):
    z = u - 0.5
    lo = u < 0.25
    hi = u > 0.75
    z[lo] = -0.25 * (4.0 * u[lo]) ** (-1.0 / alpha)
    z[hi] = 0.25 * (4.0 * (1.0 - u[hi])) ** (-1.0 / alpha)
    return z


def sample(model, count, seed, shape=None):
    """Draw ``count`` iid variables from ``model``.

    ``seed`` is an integer key or an existing ``numpy.random.Generator``; the
    Pareto law is sampled by exact inversion of its CDF. If ``shape`` is given
    the draws are returned reshaped to it.
    """
    count = int(count)
    if count < 1:
        raise ValueError("count must be >= 1")
    rng = make_rng(seed)
    if model.kind == "pareto":
        # random() lies in [0, 1); flip so that u is in (0, 1]
        u = 1.0 - rng.random(count)
        out = _pareto_quantile(u, model.alpha)
    elif model.kind == "student_t":
        out = rng.standard_t(model.alpha, size=count)
    elif model.kind == "three_point":
        u = rng.random(count)
        out = np.where(u < 1 / 6, -math.sqrt(3.0), np.where(u < 2 / 6, math.sqrt(3.0), 0.0))
    else:
        out = rng.standard_normal(count)
    if shape is not None:
        out = out.reshape(shape)
    return out


def _t_density(x, nu):
    logc = math.lgamma((nu + 1) / 2) - math.lgamma(nu / 2) - 0.5 * math.log(nu * math.pi)
    return math.exp(logc) * (1.0 + x * x / nu) ** (-(nu + 1) / 2)


def density(model, x):
    """Density of ``model`` at ``x`` (continuous models only)."""
    x = float(x)
    if model.kind == "pareto":
        ax = abs(x)
        if ax <= 0.25:
            return 1.0
        return model.alpha / (4.0 * ax) ** (model.alpha + 1)
    if model.kind == "student_t":
        return _t_density(x, model.alpha)
    if model.kind == "normal":
        return math.exp(-0.5 * x * x) / math.sqrt(2 * math.pi)
    raise UnsupportedVariantError("three_point has no density")


def _require_heavy(model):
    if not model.heavy:
        raise UnsupportedVariantError(f"{model.kind} is not a heavy-tailed model")


def _t_tail(x, nu):
    # P(|T| > x) = 2 * int_x^inf f.  Substituting y = 1/t keeps the integrand
    # bounded: int_x^inf f(t) dt = int_0^{1/x} f(1/y) / y^2 dy.
    g = lambda y: _t_density(1.0 / y, nu) / (y * y) if y > 0 else 0.0
    if x >= 1.0:
        val, _ = integrate.quad(g, 0.0, 1.0 / x, epsabs=1e-13, epsrel=1e-12, limit=200)
        return 2.0 * val
    core, _ = integrate.quad(lambda t: _t_density(t, nu), x, 1.0, epsabs=1e-13, epsrel=1e-12)
    tail, _ = integrate.quad(g, 0.0, 1.0, epsabs=1e-13, epsrel=1e-12, limit=200)
    return 2.0 * (core + tail)


def tail_prob(model, x):
    """``P(|Z| > x)`` for a heavy-tailed model.

    Closed form for the Pareto law, adaptive quadrature of the density for the
    t law (absolute error well below 1e-8).
    """
    _require_heavy(model)
    x = float(x)
    if not x > 0:
        raise ValueError("x must be positive")
    if model.kind == "pareto":
        if x <= 0.25:
            return 1.0 - 2.0 * x
        return 0.5 * (4.0 * x) ** (-model.alpha)
    return _t_tail(x, model.alpha)


def a_of(model, k):
    """Solve ``tail_prob(model, a) = 1/k``.

    Exact for the Pareto law, ``a_k = (k/2)**(1/alpha) / 4`` when ``k >= 2``.
    For the t law the root is bracketed and refined by bisection to a
    relative width of 1e-12.
    """
    _require_heavy(model)
    k = float(k)
    if not k >= 1:
        raise ValueError("k must be >= 1")
    if model.kind == "pareto":
        if k >= 2:
            return (k / 2.0) ** (1.0 / model.alpha) / 4.0
        return 0.5 * (1.0 - 1.0 / k)
    if k == 1:
        return 0.0
    target = 1.0 / k
    lo, hi = 0.0, 1.0
    while tail_prob(model, hi) > target:
        lo, hi = hi, hi * 2.0
    while hi - lo > 1e-12 * hi:
        mid = 0.5 * (lo + hi)
        if mid == lo or mid == hi:
            break
        if tail_prob(model, mid) > target:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


class NormalizingSeq:
    """Cached ``k -> a_k`` for one model."""

    def __init__(self, model):
        _require_heavy(model)
        self.model = model
        self._cache = {}

    def __call__(self, k):
        k = int(k)
        if k not in self._cache:
            self._cache[k] = a_of(self.model, k)
        return self._cache[k]
