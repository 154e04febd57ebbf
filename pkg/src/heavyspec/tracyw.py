"""Tracy-Widom (order 1) distribution through the Hastings-McLeod solution of Painleve II.

    F1(s) = exp(-1/2 int_s^inf [q(x) + (x - s) q(x)^2] dx),
    q'' = x q + 2 q^3,   q(x) ~ Ai(x) as x -> inf.

``q`` is obtained by shooting: start at ``x0`` with ``(Ai(x0), Ai'(x0))`` and
integrate leftward with classical RK4 on a uniform grid.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import cumulative_simpson, simpson

__all__ = [
    "airy_ai",
    "airy_ai_prime",
    "PainleveGrid",
    "PainleveBlowUp",
    "solve_painleve",
    "TracyWidom1",
    "tw1",
    "tw1_cdf",
    "tw1_pdf",
    "tw_normalize",
]

AI0 = 3.0 ** (-2.0 / 3.0) / math.gamma(2.0 / 3.0)
AIP0 = -(3.0 ** (-1.0 / 3.0)) / math.gamma(1.0 / 3.0)
SERIES_LIMIT = 5.5  # positive side
SERIES_LIMIT_NEG = -7.0  # below this the oscillatory expansion is more accurate
X_RANGE = 20.0


def _maclaurin(x):
    # Ai = Ai(0) f + Ai'(0) g with f, g the two power-series solutions
    x3 = x * x * x
    f = t = 1.0
    g = u = x
    fp = 0.0
    w = 0.5 * x * x
    gp = z = 1.0
    k = 0
    while True:
        t *= x3 / ((3 * k + 2) * (3 * k + 3))
        u *= x3 / ((3 * k + 3) * (3 * k + 4))
        if k > 0:
            w *= x3 / ((3 * k) * (3 * k + 2))
        z *= x3 / ((3 * k + 1) * (3 * k + 3))
        f += t
        g += u
        fp += w
        gp += z
        k += 1
        if max(abs(t), abs(u), abs(w), abs(z)) < 1e-17 * max(1.0, abs(f), abs(g)) or k > 400:
            break
    return AI0 * f + AIP0 * g, AI0 * fp + AIP0 * gp


def _asym_coeffs(kmax):
    u = [1.0]
    for k in range(1, kmax + 1):
        u.append(u[-1] * (6 * k - 5) * (6 * k - 3) * (6 * k - 1) / (216.0 * k * (2 * k - 1)))
    v = [1.0] + [-(6 * k + 1) / (6 * k - 1) * u[k] for k in range(1, kmax + 1)]
    return u, v


_U, _V = _asym_coeffs(60)


def _asym_sum(coef, zeta, sign):
    # sum of coef_k (sign/zeta)^k, truncated at the smallest term
    total = 0.0
    prev = math.inf
    r = 1.0
    for c in coef:
        term = c * r
        if abs(term) > prev:
            break
        total += term
        prev = abs(term)
        if prev < 1e-17 * abs(total):
            break
        r *= sign / zeta
    return total


def _asym_pos(x):
    zeta = 2.0 / 3.0 * x**1.5
    e = math.exp(-zeta) / (2.0 * math.sqrt(math.pi))
    ai = e / x**0.25 * _asym_sum(_U, zeta, -1.0)
    aip = -e * x**0.25 * _asym_sum(_V, zeta, -1.0)
    return ai, aip


def _split_even_odd(coef, zeta):
    # P = sum (-1)^k c_{2k} / zeta^{2k},  Q = sum (-1)^k c_{2k+1} / zeta^{2k+1}
    P = Q = 0.0
    prev = math.inf
    for k, c in enumerate(coef):
        term = c / zeta**k
        if abs(term) > prev:
            break
        prev = abs(term)
        sgn = (-1) ** (k // 2)
        if k % 2 == 0:
            P += sgn * term
        else:
            Q += sgn * term
        if prev < 1e-17:
            break
    return P, Q


def _asym_neg(x):
    y = -x
    zeta = 2.0 / 3.0 * y**1.5
    ph = zeta + math.pi / 4.0
    P, Q = _split_even_odd(_U, zeta)
    R, S = _split_even_odd(_V, zeta)
    ai = (math.sin(ph) * P - math.cos(ph) * Q) / (math.sqrt(math.pi) * y**0.25)
    aip = -(y**0.25) * (math.cos(ph) * R + math.sin(ph) * S) / math.sqrt(math.pi)
    return ai, aip


def _airy_pair(x):
    x = float(x)
    if SERIES_LIMIT_NEG <= x <= SERIES_LIMIT:
        return _maclaurin(x)
    if x > 0:
        return _asym_pos(x)
    return _asym_neg(x)


def _airy_eval(x, which):
    if np.any(np.abs(x) > X_RANGE):
        raise ValueError(f"Airy functions are implemented for |x| <= {X_RANGE:g}")
    if np.ndim(x):
        return np.array([_airy_pair(v)[which] for v in np.ravel(x)]).reshape(np.shape(x))
    return _airy_pair(x)[which]


def airy_ai(x):
    """Airy function ``Ai(x)`` for ``|x| <= 20``.

    Maclaurin series on ``[-7, 5.5]``, asymptotic expansions outside
    (truncated at the smallest term); absolute error below 3e-12 for both
    ``Ai`` and ``Ai'``, largest near the negative crossover.
    """
    return _airy_eval(x, 0)


def airy_ai_prime(x):
    """Derivative ``Ai'(x)``, same method and range as :func:`airy_ai`."""
    return _airy_eval(x, 1)


class PainleveBlowUp(RuntimeError):
    """``|q|`` exceeded the blow-up threshold: the shooting data drifted off Hastings-McLeod."""


@dataclass(frozen=True)
class PainleveGrid:
    """Hastings-McLeod solution on ``x0 = x[0] > x[1] > ... > x[-1] = x_min``."""

    x: np.ndarray
    q: np.ndarray
    dq: np.ndarray
    h: float

    def at(self, x):
        """``q`` at the grid node nearest to ``x``."""
        j = int(round((self.x[0] - x) / self.h))
        if not 0 <= j < self.x.size:
            raise ValueError(f"{x} is outside the grid")
        return float(self.q[j])


@functools.lru_cache(maxsize=8)
def solve_painleve(x0=8.0, x_min=-8.0, h=1e-3, blow_up=1e3):
    """RK4 integration of ``q'' = x q + 2 q^3`` from ``x0`` down to ``x_min``."""
    if x0 < 6:
        raise ValueError("x0 must be >= 6 for the Airy initial data to be accurate")
    if not x_min < x0:
        raise ValueError("x_min must be below x0")
    steps = int(round((x0 - x_min) / h))
    if not math.isclose(steps * h, x0 - x_min, rel_tol=1e-9):
        raise ValueError("h must divide x0 - x_min")
    xs = x0 - h * np.arange(steps + 1)
    q = np.empty(steps + 1)
    dq = np.empty(steps + 1)
    y, yp = _airy_pair(x0)
    q[0], dq[0] = y, yp
    step = -h
    x = x0
    for j in range(1, steps + 1):
        k1q, k1p = yp, x * y + 2 * y**3
        xm = x + 0.5 * step
        y2, p2 = y + 0.5 * step * k1q, yp + 0.5 * step * k1p
        k2q, k2p = p2, xm * y2 + 2 * y2**3
        y3, p3 = y + 0.5 * step * k2q, yp + 0.5 * step * k2p
        k3q, k3p = p3, xm * y3 + 2 * y3**3
        y4, p4 = y + step * k3q, yp + step * k3p
        xe = x + step
        k4q, k4p = p4, xe * y4 + 2 * y4**3
        y = y + step / 6.0 * (k1q + 2 * k2q + 2 * k3q + k4q)
        yp = yp + step / 6.0 * (k1p + 2 * k2p + 2 * k3p + k4p)
        x = x0 - j * h
        if not abs(y) < blow_up:
            raise PainleveBlowUp(f"|q| > {blow_up:g} at x = {x:.4f}")
        q[j], dq[j] = y, yp
    for a in (xs, q, dq):
        a.setflags(write=False)
    return PainleveGrid(xs, q, dq, h)


class TracyWidom1:
    """``F1`` on ``[x_min, x0]`` from a cached Painleve grid.

    The integrals ``int_s^x0 q``, ``int_s^x0 x q^2`` and ``int_s^x0 q^2`` are
    accumulated once by composite Simpson on the grid and interpolated between
    nodes by cubic Hermite polynomials (their derivatives are known
    exactly). The part beyond ``x0``, where ``q = Ai`` to double precision, is
    added by Simpson quadrature of the Airy function on ``[x0, x0 + 16]``.
    """

    def __init__(self, x0=8.0, x_min=-8.0, h=1e-3):
        self.grid = grid = solve_painleve(x0, x_min, h)
        # integrate from x0 leftward: reverse to increasing x for scipy
        x = grid.x[::-1]
        q = grid.q[::-1]
        integrands = (q, x * q * q, q * q)
        self._cum = []
        for f in integrands:
            c = cumulative_simpson(f, x=x, initial=0.0)
            self._cum.append((c[-1] - c)[::-1])
        self._deriv = [-grid.q, -grid.x * grid.q**2, -grid.q**2]
        tx = np.linspace(x0, x0 + 16.0, 3201)
        ai = np.array([_airy_pair(v)[0] for v in tx])
        self._tail = [simpson(ai, x=tx), simpson(tx * ai * ai, x=tx), simpson(ai * ai, x=tx)]
        self.x0, self.x_min, self.h = x0, x_min, h

    def _integrals(self, s):
        g = self.grid
        pos = (self.x0 - s) / self.h
        j = np.clip(np.floor(pos).astype(int), 0, g.x.size - 2)
        t = pos - j  # fraction of a step from node j toward node j+1
        # Hermite basis on [x_j, x_j - h] in the variable t, dx/dt = -h
        h00 = 2 * t**3 - 3 * t**2 + 1
        h10 = t**3 - 2 * t**2 + t
        h01 = -2 * t**3 + 3 * t**2
        h11 = t**3 - t**2
        out = []
        for c, d, tail in zip(self._cum, self._deriv, self._tail):
            val = h00 * c[j] + h10 * (-self.h) * d[j] + h01 * c[j + 1] + h11 * (-self.h) * d[j + 1]
            out.append(val + tail)
        return out

    def _check(self, s):
        s = np.asarray(s, dtype=float)
        if np.any((s < self.x_min - 1e-12) | (s > self.x0 + 1e-12)):
            raise ValueError(f"s must lie in [{self.x_min}, {self.x0}]")
        return s

    def cdf(self, s):
        s = self._check(s)
        i0, i1, i2 = self._integrals(s)
        out = np.exp(-0.5 * (i0 + i1 - s * i2))
        return float(out) if out.ndim == 0 else out

    def pdf(self, s):
        """``F1'(s) = F1(s) (q(s) + int_s^inf q^2) / 2``."""
        s = self._check(s)
        i0, i1, i2 = self._integrals(s)
        F = np.exp(-0.5 * (i0 + i1 - s * i2))
        g = self.grid
        qs = np.interp(-s, -g.x, g.q)
        out = 0.5 * F * (qs + i2)
        return float(out) if out.ndim == 0 else out


@functools.lru_cache(maxsize=4)
def tw1(x0=8.0, x_min=-8.0, h=1e-3):
    return TracyWidom1(x0, x_min, h)


def tw1_cdf(s, h=1e-3):
    """``F1(s)`` for ``s`` in ``[-8, 8]`` (default grid)."""
    return tw1(h=h).cdf(s)


def tw1_pdf(s, h=1e-3):
    return tw1(h=h).pdf(s)


def tw_normalize(lam1, p, n):
    """Centered and scaled largest eigenvalue of ``X X'`` for Gaussian ``p x n`` data.

    ``n**(2/3) gamma**(1/6) / (1 + sqrt(gamma))**(4/3) * (lam1/n - (1 + sqrt(p/n))**2)``
    with ``gamma = p/n``.
    """
    g = p / n
    scale = n ** (2.0 / 3.0) * g ** (1.0 / 6.0) / (1.0 + math.sqrt(g)) ** (4.0 / 3.0)
    return scale * (np.asarray(lam1, dtype=float) / n - (1.0 + math.sqrt(g)) ** 2)
