"""Independent reference computations used by the tests."""

import itertools
import math

import numpy as np


def _bisect(f, lo, hi, iters=200):
    flo = f(lo)
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        fm = f(mid)
        if fm == 0:
            return mid
        if (fm > 0) == (flo > 0):
            lo, flo = mid, fm
        else:
            hi = mid
    return 0.5 * (lo + hi)


def charpoly_eigs(a):
    """Eigenvalues of a symmetric matrix of dimension <= 3 from its characteristic polynomial.

    The cubic ``det(x I - a)`` is split into monotone pieces at the roots of
    its derivative and each piece is bisected; a double root is taken at the
    critical point itself.
    """
    a = np.asarray(a, dtype=float)
    d = a.shape[0]
    if d == 1:
        return np.array([a[0, 0]])
    if d == 2:
        t, det = a[0, 0] + a[1, 1], a[0, 0] * a[1, 1] - a[0, 1] * a[1, 0]
        disc = math.sqrt(max(t * t / 4 - det, 0.0))
        return np.array([t / 2 + disc, t / 2 - disc])
    c2 = np.trace(a)
    c1 = sum(a[i, i] * a[j, j] - a[i, j] * a[j, i] for i, j in itertools.combinations(range(3), 2))
    c0 = (
        a[0, 0] * (a[1, 1] * a[2, 2] - a[1, 2] * a[2, 1])
        - a[0, 1] * (a[1, 0] * a[2, 2] - a[1, 2] * a[2, 0])
        + a[0, 2] * (a[1, 0] * a[2, 1] - a[1, 1] * a[2, 0])
    )
    f = lambda x: ((x - c2) * x + c1) * x - c0
    R = 1.0 + max(np.abs(a).sum(axis=1))
    # f'(x) = 3x^2 - 2 c2 x + c1
    disc = max(c2 * c2 - 3 * c1, 0.0)
    d1, d2 = (c2 - math.sqrt(disc)) / 3, (c2 + math.sqrt(disc)) / 3
    roots = []
    for lo, hi in ((-R, d1), (d1, d2), (d2, R)):
        if hi <= lo:
            roots.append(lo)
            continue
        if (f(lo) > 0) != (f(hi) > 0):
            roots.append(_bisect(f, lo, hi))
        else:
            roots.append(lo if abs(f(lo)) < abs(f(hi)) else hi)
    return np.sort(roots)[::-1]


def brute_top_products(a, b, m):
    prods = sorted((x * y for x in a for y in b), reverse=True)
    return np.array(prods[:m])


def fredholm_f1(s, m=80):
    """F1(s) = det(I - K) with K(x, y) = Ai((x + y) / 2) / 2 on (s, inf), by Nystrom.

    Gauss-Legendre nodes on (-1, 1) are mapped to (s, inf) by
    y = s + 10 tan(pi (x + 1) / 4).
    """
    from scipy.special import airy

    x, w = np.polynomial.legendre.leggauss(m)
    t = np.pi / 4 * (x + 1)
    y = s + 10 * np.tan(t)
    wy = w * 10 * np.pi / 4 / np.cos(t) ** 2
    K = 0.5 * airy((y[:, None] + y[None, :]) / 2)[0]
    r = np.sqrt(wy)
    return float(np.linalg.det(np.eye(m) - r[:, None] * K * r[None, :]))


def brute_field(coeffs, Z, row0, col0, p, n, s):
    """X_n(s)[i-1, t-1] = sum_{k,l} h_kl Z_{i-k, t+s-l} by explicit loops."""
    X = np.zeros((p, n))
    for i in range(1, p + 1):
        for t in range(1, n + 1):
            acc = 0.0
            for (k, l), h in coeffs.items():
                acc += h * Z[i - k - row0, t + s - l - col0]
            X[i - 1, t - 1] = acc
    return X
