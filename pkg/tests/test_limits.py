import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import integrate, stats

from heavyspec import limits as lm
from heavyspec import rand_heavy as rh


def test_frechet_cdf_values():
    assert lm.frechet_cdf(0.8, 1.0) == pytest.approx(math.exp(-1), rel=1e-15)
    assert lm.frechet_cdf(1.0, 2.0) == pytest.approx(math.exp(-0.5), rel=1e-15)
    with pytest.raises(ValueError):
        lm.frechet_cdf(1.0, 0.0)
    with pytest.raises(ValueError):
        lm.frechet_cdf(1.0, -1.0)


def test_kth_max_values():
    assert lm.kth_max_cdf(1, 1.6, 1.7) == pytest.approx(lm.frechet_cdf(0.8, 1.7), rel=1e-15)
    assert lm.kth_max_cdf(2, 2.0, 1.0) == pytest.approx(2 * math.exp(-1), rel=1e-15)
    assert lm.kth_max_cdf(2, 2.0, 1.0) == pytest.approx(0.7358, abs=1e-4)
    with pytest.raises(ValueError):
        lm.kth_max_cdf(0, 1.0, 1.0)


@given(st.integers(1, 6), st.floats(0.2, 3.9), st.floats(0.01, 100.0))
def test_kth_max_monotone_in_k(k, alpha, x):
    assert lm.kth_max_cdf(k + 1, alpha, x) >= lm.kth_max_cdf(k, alpha, x) - 1e-15


def test_samplers_match_cdfs():
    rng = np.random.default_rng(11)
    s = lm.frechet_sample(1.6, rng, 100_000)
    assert stats.kstest(s, lambda x: lm.frechet_cdf(0.8, x)).statistic < 0.01
    s3 = lm.kth_max_sample(3, 1.0, rng, 100_000)
    assert stats.kstest(s3, lambda x: lm.kth_max_cdf(3, 1.0, x)).statistic < 0.01


def test_gamma_points_increasing():
    g = lm.gamma_points(10, 0, 50)
    assert g.shape == (50, 10) and np.all(np.diff(g, axis=1) > 0)


def test_ratio_law():
    assert lm.ratio_law_cdf(1, 2.0, 0.25) == pytest.approx(0.25, rel=1e-15)
    assert lm.ratio_law_cdf(3, 1.0, 0.5) == pytest.approx(0.5**1.5, rel=1e-15)
    with pytest.raises(ValueError):
        lm.ratio_law_cdf(1, 1.0, 1.0)
    # the law of (G_i/G_{i+1})**(2/alpha) by simulation
    rng = np.random.default_rng(2)
    g = lm.gamma_points(4, rng, 100_000)
    r = (g[:, 2] / g[:, 3]) ** (2 / 1.5)
    assert stats.kstest(r, lambda x: lm.ratio_law_cdf(3, 1.5, np.clip(x, 1e-300, 1 - 1e-16))).statistic < 0.01


@given(st.integers(1, 40), st.floats(0.1, 3.9), st.floats(0.001, 0.999))
def test_ratio_quantile_round_trip(i, alpha, q):
    x = lm.ratio_law_quantile(i, alpha, q)
    if 0 < x < 1:
        assert lm.ratio_law_cdf(i, alpha, x) == pytest.approx(q, rel=1e-12)


def test_gap_limit():
    g = lm.gap_limit(1.5, 8.0, 2.0)
    assert g.atom_location == 0.75
    assert g.atom_mass == pytest.approx(0.25**0.75, rel=1e-15)
    assert g.atom_mass == pytest.approx(0.35355, abs=1e-5)
    # continuous part plus atom is a probability measure
    assert g.continuous_cdf(0.75) + g.atom_mass == pytest.approx(1.0, rel=1e-14)
    assert g.cdf(0.75) == 1.0 and g.cdf_left(0.75) == pytest.approx(1 - g.atom_mass)
    assert g.cdf(-0.1) == 0.0
    z = lm.gap_limit(1.5, 1.0, 0.0)
    assert z.atom_location == 1.0 and z.atom_mass == 0.0
    with pytest.raises(ValueError):
        lm.gap_limit(1.0, 1.0, 2.0)


@given(st.floats(0.2, 3.9), st.floats(0.0, 1.0))
def test_gap_cdf_nondecreasing(alpha, rho):
    g = lm.gap_limit(alpha, 1.0, rho)
    xs = np.linspace(-0.1, 1.1, 241)
    c = g.cdf(xs)
    assert np.all(np.diff(c) >= -1e-15) and c[0] == 0 and c[-1] == 1


def test_ratio21_atom_by_simulation():
    alpha, v1, v2 = 1.2, 8.0, 2.0
    s = lm.ratio21_limit_sample(alpha, v1, v2, 5, 100_000)
    p = 0.25**0.6
    frac = np.mean(s == 0.25)
    assert abs(frac - p) < 3 * math.sqrt(p * (1 - p) / 1e5)
    assert lm.ratio21_cdf(alpha, v1, v2, 0.2) == 0.0
    assert lm.ratio21_cdf(alpha, v1, v2, 0.25) == pytest.approx(p)
    # the gap sampler is the mirror image
    g = lm.gap_limit(alpha, v1, v2).sample(5, 10)
    assert np.allclose(g, 1 - lm.ratio21_limit_sample(alpha, v1, v2, 5, 10))


def test_trace_ratio():
    assert lm.trace_ratio_bias_bound(1.0, 100) == pytest.approx(0.01)
    s, bound = lm.trace_ratio_limit_sample(1.0, [8.0, 2.0], 1000, 3, 2000)
    assert bound == pytest.approx(1e-3)
    assert np.all(s > 0) and np.all(s <= 0.8 + 1e-15)
    with pytest.raises(ValueError):
        lm.trace_ratio_limit_sample(2.0, [1.0], 1000, 0, 1)
    with pytest.raises(ValueError):
        lm.trace_ratio_limit_sample(1.0, [1.0], 50, 0, 1)


def test_top_limit_points():
    pts = lm.top_limit_points(1.0, [8.0, 2.0, 0.0], 4, 1, 100)
    assert pts.shape == (100, 4) and np.all(np.diff(pts, axis=1) <= 0)
    j = lm.joint_lag_points(1.0, [[8.0, 5.0], [2.0, 0.0]], 7, 1)
    assert j.shape == (7, 2, 2)


def test_conditional_atom_prob():
    # G(x) is a probability; conditioning on a large top point pushes it below the unconditional mass
    unc = 0.25**0.5
    vals = [lm.conditional_atom_prob(x, 1.0) for x in (1.0, 10.0, 100.0, 1e4)]
    assert all(0 <= v <= 1 for v in vals)
    assert vals[0] == pytest.approx(unc, abs=0.05)
    # Monte Carlo cross-check
    rng = np.random.default_rng(4)
    g = lm.gamma_points(2, rng, 400_000)
    x = 40.0
    cond = g[:, 0] < (x / 8.0) ** -0.5
    mc = np.mean(g[cond, 0] / g[cond, 1] <= unc)
    se = math.sqrt(mc * (1 - mc) / cond.sum())
    assert abs(lm.conditional_atom_prob(x, 1.0) - mc) < 4 * se


def test_mp_law():
    assert lm.mp_density(1.0, 2.0) == pytest.approx(1 / (2 * math.pi), rel=1e-14)
    for gamma in (0.25, 1.0, 4.0):
        a, b = lm.mp_edges(gamma)
        mass, _ = integrate.quad(lambda x: lm.mp_density(gamma, x), max(a, 1e-14), b, limit=200)
        assert mass == pytest.approx(min(1.0, 1 / gamma), abs=1e-6)
        assert mass + lm.mp_point_mass(gamma) == pytest.approx(1.0, abs=1e-6)
    assert lm.mp_density(0.5, 100.0) == 0.0
    with pytest.raises(ValueError):
        lm.mp_density(0.0, 1.0)


def test_nagaev_range_and_small_run():
    m = rh.pareto(1.6)
    an = rh.a_of(m, 500)
    with pytest.raises(lm.NagaevRangeError):
        lm.nagaev_ratio(m, 500, [2 * an], 10, 0)
    with pytest.raises(rh.UnsupportedVariantError):
        lm.nagaev_ratio(rh.standard_normal(), 500, [1.0], 10, 0)
    r = lm.nagaev_ratio(m, 500, [10 * an], 2000, 0)
    assert r.replicates == 2000 and r.exceed_count[0] >= 0
    assert r.exceed_prob[0] == r.exceed_count[0] / 2000


def test_pp_counts_and_poisson_mean():
    lam = np.array([10.0, 5.0, 3.0, 1.0, 0.5])
    assert list(lm.pp_counts(lam, [2, 4, 8])) == [3, 2, 1]
    assert lm.poisson_mean(4.0, 1.0) == pytest.approx(0.5)
    assert lm.poisson_mean(4.0, 1.0, [8.0, 2.0]) == pytest.approx(math.sqrt(2) + math.sqrt(0.5))
    chk = lm.pp_count_check([lam, lam], [2, 4], 2.0)
    assert np.allclose(chk.mean_count, [3, 2]) and np.allclose(chk.poisson_mean, [0.5, 0.25])
    assert np.allclose(chk.rel_error, [5.0, 7.0])


def test_write_curve_csv(tmp_path):
    lm.write_curve_csv(tmp_path / "c.csv", {"x": [1.0, 2.0], "cdf": [0.5, 0.75]})
    assert (tmp_path / "c.csv").read_text().splitlines() == ["x,cdf", "1,0.5", "2,0.75"]
