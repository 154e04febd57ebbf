"""Monte Carlo ensembles over simulated panels.

Replicate ``r`` draws its noise from ``make_rng(base_seed + r)`` (a Philox
generator keyed by that integer), so every replicate is reproducible on its
own and the ensemble does not depend on execution order or worker count.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from dataclasses import field as dc_field

import numpy as np

from . import approx, estim, limits, linfield, rand_heavy, spectra, tracyw

__all__ = [
    "STATISTICS",
    "EnsembleSpec",
    "EnsembleSummary",
    "EnsembleFailure",
    "iid_spec",
    "run_ensemble",
    "replicate_statistic",
    "ks_distance",
    "atom_mass",
    "ecdf",
]

FAILURE_TOLERANCE = 0.01


class EnsembleFailure(RuntimeError):
    """More than 1% of replicates raised."""


@dataclass(frozen=True)
class EnsembleSpec:
    """What to simulate, which statistic to record and how often.

    ``params`` are keyword arguments of the statistic (see :data:`STATISTICS`).
    ``field.seed`` is ignored; replicate ``r`` uses ``base_seed + r``.
    """

    field: linfield.FieldSpec
    statistic: str
    replicates: int
    base_seed: int = 0
    params: dict = dc_field(default_factory=dict)
    method: str = spectra.DEFAULT_METHOD

    def __post_init__(self):
        if self.replicates < 1:
            raise ValueError("replicates must be >= 1")
        if self.statistic not in STATISTICS:
            raise ValueError(f"unknown statistic {self.statistic!r}; choose from {sorted(STATISTICS)}")

    def to_dict(self):
        f = self.field
        return {
            "field": {
                "coeffs": [[k, l, h] for (k, l), h in f.coeffs.items()],
                "noise": rand_heavy.model_to_dict(f.noise),
                "p": f.p,
                "n": f.n,
                "s_max": f.s_max,
            },
            "statistic": self.statistic,
            "replicates": self.replicates,
            "base_seed": self.base_seed,
            "params": _jsonable(self.params),
            "method": self.method,
        }

    @classmethod
    def from_dict(cls, d):
        f = d["field"]
        coeffs = linfield.CoeffMatrix({(int(k), int(l)): h for k, l, h in f["coeffs"]})
        fs = linfield.FieldSpec(coeffs, rand_heavy.model_from_dict(f["noise"]), int(f["p"]), int(f["n"]), int(f.get("s_max", 0)))
        return cls(fs, d["statistic"], int(d["replicates"]), int(d.get("base_seed", 0)), dict(d.get("params", {})), d.get("method", spectra.DEFAULT_METHOD))


def iid_spec(noise, p, n, s_max=0):
    """Field spec whose panels are the noise itself."""
    return linfield.FieldSpec(linfield.identity_coeffs(), noise, p, n, s_max)


# statistics --------------------------------------------------------------


class _Context:
    """Per-ensemble constants shared by all replicates."""

    def __init__(self, spec):
        self.spec = spec
        f = spec.field
        self.a2 = rand_heavy.a_of(f.noise, f.n * f.p) ** 2 if f.noise.heavy else None
        self._v = {}

    def v(self, s):
        if s not in self._v:
            self._v[s] = linfield.m_matrix(self.spec.field.coeffs, s).singular_values
        return self._v[s]

    def need_a2(self):
        if self.a2 is None:
            raise rand_heavy.UnsupportedVariantError("statistic needs a heavy-tailed noise model")
        return self.a2


def _spectrum(sample, ctx, lag):
    if lag > sample.spec.s_max:
        raise ValueError(f"lag {lag} exceeds s_max = {sample.spec.s_max}")
    if lag == 0:
        return spectra.covariance_eigs(sample[0].data, ctx.a2, ctx.spec.method).values
    return spectra.autocov_singular_values(sample[0].data, sample[lag].data, lag, ctx.a2, ctx.spec.method).values


def _stat_top_k(sample, ctx, k=1, lag=0):
    lam = _spectrum(sample, ctx, lag)[: int(k)]
    return lam / ctx.need_a2()


def _stat_gap(sample, ctx, lag=0):
    lam = _spectrum(sample, ctx, lag)
    return np.array([(lam[0] - lam[1]) / lam[0]])


def _stat_ratio21(sample, ctx, lag=0, exponent=1.0):
    lam = _spectrum(sample, ctx, lag)
    return np.array([(lam[1] / lam[0]) ** float(exponent)])


def _stat_trace_ratio(sample, ctx):
    lam = _spectrum(sample, ctx, 0)
    return np.array([lam[0] / lam.sum()])


def _approx(sample, ctx, kind, lag):
    stats = approx.order_stats(sample.core)
    return approx.approx_set(stats, ctx.v(lag), kind, lag=lag)


def _stat_approx_error(sample, ctx, kind="gamma_right", lag=0, k=1):
    lam = _spectrum(sample, ctx, lag)
    err = approx.sup_error(lam, _approx(sample, ctx, kind, lag), ctx.need_a2()).errors
    return err[: int(k)]


def _stat_sup_error(sample, ctx, kind="delta", lag=0):
    """One sup error per kind; ``kind`` may be a list to share the spectrum."""
    lam = _spectrum(sample, ctx, lag)
    kinds = [kind] if isinstance(kind, str) else list(kind)
    return np.array([approx.sup_error(lam, _approx(sample, ctx, k, lag), ctx.need_a2()).sup for k in kinds])


def _stat_pp_counts(sample, ctx, x_grid=(2.0, 4.0, 8.0), lag=0):
    lam = _spectrum(sample, ctx, lag) / ctx.need_a2()
    return limits.pp_counts(lam, x_grid).astype(float)


def _stat_tw(sample, ctx):
    lam = _spectrum(sample, ctx, 0)
    f = ctx.spec.field
    return np.array([float(tracyw.tw_normalize(lam[0], f.p, f.n))])


def _stat_lamyao_ratio(sample, ctx, s1_max=None):
    s1_max = sample.spec.s_max if s1_max is None else int(s1_max)
    return estim.lamyao_report(sample.panels, s1_max)["ratio"]


def _stat_omega_sup_error(sample, ctx, s0=0, s1=None, kind="delta"):
    s1 = sample.spec.s_max if s1 is None else int(s1)
    w = spectra.sum_squares_eigs(sample.panels, int(s0), s1, ctx.spec.method)
    vsum = linfield.sum_squares_m(ctx.spec.field.coeffs, int(s0), s1)
    om = approx.omega_set(approx.order_stats(sample.core), vsum, kind=kind)
    return np.array([approx.sup_error(w, om, ctx.need_a2() ** 2).sup])


def _stat_constant(sample, ctx, value=0.0):
    return np.array([float(value)])


STATISTICS = {
    "top_k": _stat_top_k,
    "gap": _stat_gap,
    "ratio21": _stat_ratio21,
    "trace_ratio": _stat_trace_ratio,
    "approx_error": _stat_approx_error,
    "sup_error": _stat_sup_error,
    "pp_counts": _stat_pp_counts,
    "tw": _stat_tw,
    "lamyao_ratio": _stat_lamyao_ratio,
    "omega_sup_error": _stat_omega_sup_error,
    "constant": _stat_constant,
}


def replicate_statistic(spec, r, ctx=None):
    """Statistic vector of replicate ``r`` (seed ``base_seed + r``)."""
    ctx = ctx or _Context(spec)
    sample = linfield.simulate_field(spec.field, rand_heavy.make_rng(spec.base_seed + r))
    out = np.atleast_1d(np.asarray(STATISTICS[spec.statistic](sample, ctx, **spec.params), dtype=float))
    return out


def _run_chunk(spec, indices):
    ctx = _Context(spec)
    out = []
    for r in indices:
        try:
            out.append((r, replicate_statistic(spec, r, ctx), None))
        except Exception as exc:  # recorded, judged against the tolerance below
            out.append((r, None, f"{type(exc).__name__}: {exc}"))
    return out


def run_ensemble(spec, workers=1, order=None):
    """Run all replicates and summarize.

    ``order`` optionally permutes the execution order (results are always
    collected by replicate index).
    """
    idx = np.arange(spec.replicates) if order is None else np.asarray(order)
    if sorted(idx.tolist()) != list(range(spec.replicates)):
        raise ValueError("order must be a permutation of the replicate indices")
    if workers <= 1:
        results = _run_chunk(spec, idx.tolist())
    else:
        chunks = [c.tolist() for c in np.array_split(idx, workers * 4) if c.size]
        results = []
        with ProcessPoolExecutor(max_workers=workers) as pool:
            for part in pool.map(_run_chunk, [spec] * len(chunks), chunks):
                results.extend(part)
    results.sort(key=lambda t: t[0])
    failures = [(r, msg) for r, _, msg in results if msg is not None]
    if len(failures) > FAILURE_TOLERANCE * spec.replicates:
        raise EnsembleFailure(f"{len(failures)} of {spec.replicates} replicates failed; first: {failures[0][1]}")
    ok = [(r, v) for r, v, msg in results if msg is None]
    width = max(v.size for _, v in ok)
    values = np.full((len(ok), width), np.nan)
    for row, (_, v) in enumerate(ok):
        values[row, : v.size] = v
    return EnsembleSummary(values, np.array([r for r, _ in ok]), tuple(failures), spec.to_dict())


# summaries ---------------------------------------------------------------


def ecdf(samples):
    """Sorted samples and the right-continuous empirical CDF at them."""
    x = np.sort(np.asarray(samples, dtype=float).ravel())
    return x, np.arange(1, x.size + 1) / x.size


def ks_distance(samples, cdf, support=None, cdf_left=None):
    """``sup |F_emp - cdf|`` evaluated at the sample points.

    Both one-sided gaps are checked at every point. ``support=(lo, hi)``
    restricts the supremum to sample points inside the interval (the
    empirical CDF still uses all samples). ``cdf_left`` gives left limits
    for laws with atoms; it defaults to ``cdf``.
    """
    x = np.sort(np.asarray(samples, dtype=float).ravel())
    m = x.size
    if m < 1:
        raise ValueError("need at least one sample")
    F = np.asarray(cdf(x), dtype=float)
    Fl = F if cdf_left is None else np.asarray(cdf_left(x), dtype=float)
    upper = np.arange(1, m + 1) / m - F
    lower = Fl - np.arange(m) / m
    if support is not None:
        keep = (x >= support[0]) & (x <= support[1])
        if not np.any(keep):
            raise ValueError("no samples inside the support window")
        upper, lower = upper[keep], lower[keep]
    return float(max(np.max(upper), np.max(lower), 0.0))


def atom_mass(samples, location, epsilon):
    """Fraction of samples within ``epsilon`` of ``location``."""
    if not epsilon > 0:
        raise ValueError("epsilon must be positive")
    x = np.asarray(samples, dtype=float).ravel()
    return float(np.mean(np.abs(x - location) <= epsilon))


@dataclass(frozen=True)
class EnsembleSummary:
    """Per-replicate statistic vectors (one row per successful replicate)."""

    values: np.ndarray
    replicate_ids: np.ndarray
    failures: tuple
    spec: dict

    def column(self, j=0):
        return self.values[:, j]

    def ecdf(self, j=0):
        return ecdf(self.column(j))

    def histogram(self, j=0, bins="fd"):
        """Bin edges and bin masses (summing to one); Freedman-Diaconis by default."""
        x = self.column(j)
        edges = np.histogram_bin_edges(x, bins=bins)
        counts, edges = np.histogram(x, bins=edges)
        return edges, counts / x.size

    def kde(self, grid, j=0):
        """Gaussian kernel density with Silverman's bandwidth."""
        from scipy.stats import gaussian_kde

        return gaussian_kde(self.column(j), bw_method="silverman")(np.asarray(grid, dtype=float))

    def ks(self, cdf, j=0, **kw):
        return ks_distance(self.column(j), cdf, **kw)

    def atom(self, location, epsilon, j=0):
        return {"location": float(location), "epsilon": float(epsilon), "mass": atom_mass(self.column(j), location, epsilon)}

    def mean(self):
        return np.mean(self.values, axis=0)

    def median(self):
        return np.median(self.values, axis=0)

    def to_json(self, path=None, **extra):
        doc = {
            "metadata": self.spec,
            "replicates_ok": int(self.values.shape[0]),
            "failures": [{"replicate": int(r), "error": msg} for r, msg in self.failures],
            "mean": self.mean().tolist(),
            "median": self.median().tolist(),
        }
        doc.update(_jsonable(extra))
        text = json.dumps(doc, indent=2, sort_keys=True)
        if path is not None:
            with open(path, "w") as fh:
                fh.write(text + "\n")
        return doc

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            cols = ",".join(f"stat_{j}" for j in range(self.values.shape[1]))
            fh.write(f"replicate_id,{cols}\n")
            for r, row in zip(self.replicate_ids, self.values):
                fh.write(f"{r}," + ",".join(f"{v:.17g}" for v in row) + "\n")


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, float) and not math.isfinite(obj):
        return str(obj)
    return obj
