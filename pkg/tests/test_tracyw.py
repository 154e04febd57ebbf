import math

import numpy as np
import pytest
from scipy import integrate

from heavyspec import tracyw as tw

from oracles import fredholm_f1


def _ai_series(x, terms=80):
    # independent route: Ai = c1 f - c2 g from the power series solutions of y'' = x y
    c1 = 1 / (3 ** (2 / 3) * math.gamma(2 / 3))
    c2 = 1 / (3 ** (1 / 3) * math.gamma(1 / 3))
    f = g = 0.0
    tf, tg = 1.0, x
    for k in range(terms):
        f += tf
        g += tg
        tf *= x**3 / ((3 * k + 2) * (3 * k + 3))
        tg *= x**3 / ((3 * k + 3) * (3 * k + 4))
    return c1 * f - c2 * g


def test_airy_values():
    assert tw.airy_ai(0.0) == pytest.approx(_ai_series(0.0), rel=1e-15)
    for x in (-5.0, -1.3, 0.7, 2.0):
        assert tw.airy_ai(x) == pytest.approx(_ai_series(x), abs=1e-12)
    assert 0 < tw.airy_ai(8.0) < 1e-6
    with pytest.raises(ValueError):
        tw.airy_ai(21.0)
    with pytest.raises(ValueError):
        tw.airy_ai_prime(-25.0)


def test_airy_ode_by_finite_differences():
    h = 1e-3
    for x in np.linspace(0.0, 4.0, 9):
        d2 = (tw.airy_ai(x + h) - 2 * tw.airy_ai(x) + tw.airy_ai(x - h)) / h**2
        assert abs(d2 - x * tw.airy_ai(x)) < 1e-6 * max(1.0, abs(tw.airy_ai(x))) + 1e-8
        dp = (tw.airy_ai(x + h) - tw.airy_ai(x - h)) / (2 * h)
        assert abs(dp - tw.airy_ai_prime(x)) < 1e-6


def test_airy_branches_agree_at_crossovers():
    for x, asym in ((tw.SERIES_LIMIT, tw._asym_pos), (tw.SERIES_LIMIT_NEG, tw._asym_neg)):
        assert np.allclose(tw._maclaurin(x), asym(x), rtol=0, atol=6e-12)


def test_airy_against_scipy():
    from scipy.special import airy

    x = np.linspace(-20.0, 20.0, 4001)
    ai, aip, _, _ = airy(x)
    assert np.max(np.abs(tw.airy_ai(x) - ai)) < 3e-12
    assert np.max(np.abs(tw.airy_ai_prime(x) - aip)) < 3e-12


def test_painleve_initial_data_and_tail():
    g = tw.solve_painleve()
    assert g.q[0] == tw.airy_ai(8.0) and g.dq[0] == tw.airy_ai_prime(8.0)
    assert 0.999 <= g.at(4.0) / tw.airy_ai(4.0) <= 1.001
    assert g.x[-1] == pytest.approx(-8.0)
    # q behaves like sqrt(-x/2) on the left
    assert g.at(-8.0) == pytest.approx(2.0, rel=0.02)


def test_painleve_step_halving():
    a = tw.solve_painleve(h=1e-3)
    b = tw.solve_painleve(h=5e-4)
    assert abs(a.at(-2.0) - b.at(-2.0)) < 1e-8


def test_painleve_blow_up_detected():
    with pytest.raises(tw.PainleveBlowUp):
        tw.solve_painleve(x0=8.0, x_min=-8.0, h=1e-3, blow_up=1.0)
    with pytest.raises(ValueError):
        tw.solve_painleve(x0=4.0)


def test_f1_against_fredholm_oracle():
    s = np.linspace(-6.0, 4.0, 21)
    ours = tw.tw1_cdf(s)
    ref = np.array([fredholm_f1(v) for v in s])
    assert np.max(np.abs(ours - ref)) < 1e-8


def test_f1_shape():
    s = np.arange(-8.0, 8.0 + 1e-9, 0.1)
    F = tw.tw1_cdf(s)
    assert np.all(np.diff(F) > -1e-14)
    assert F[0] < 1e-10 and F[-1] > 1 - 1e-6
    # known location: median of F1 near -1.27, mean near -1.2065
    assert tw.tw1_cdf(-1.2686) == pytest.approx(0.5, abs=2e-3)
    with pytest.raises(ValueError):
        tw.tw1_cdf(8.5)
    with pytest.raises(ValueError):
        tw.tw1_cdf(-9.0)


def test_f1_step_halving():
    s = np.linspace(-6.0, 4.0, 51)
    assert np.max(np.abs(tw.tw1_cdf(s, h=1e-3) - tw.tw1_cdf(s, h=5e-4))) < 1e-6


def test_pdf():
    mass, _ = integrate.quad(tw.tw1_pdf, -8.0, 8.0, limit=400)
    assert mass == pytest.approx(1.0, abs=1e-4)
    mean, _ = integrate.quad(lambda s: s * tw.tw1_pdf(s), -8.0, 8.0, limit=400)
    assert mean == pytest.approx(-1.2065, abs=1e-3)
    h = 1e-4
    for s in (-3.0, -1.0, 1.0):
        fd = (tw.tw1_cdf(s + h) - tw.tw1_cdf(s - h)) / (2 * h)
        assert tw.tw1_pdf(s) == pytest.approx(fd, rel=1e-5)


def test_tw_normalize():
    p, n = 50, 250
    g = p / n
    edge = n * (1 + math.sqrt(g)) ** 2
    assert tw.tw_normalize(edge, p, n) == pytest.approx(0.0, abs=1e-12)
    assert tw.tw_normalize(edge + n, p, n) > 0
