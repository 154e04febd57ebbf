"""Sample (auto)covariance matrices and their eigen/singular values.

Two eigensolvers are available behind :func:`sym_eigen`:

``"jacobi"``
    Cyclic Jacobi rotations in round-robin (parallel) order: in each round the
    index set is split into disjoint pairs and all pairs are rotated at once.
    Iterates until the off-diagonal Frobenius mass drops below
    ``1e-12 * ||m||_F``, with at most :data:`SWEEP_CAP` sweeps.
``"lapack"``
    ``numpy.linalg.eigh``. Used by default for the ``p x p`` covariance
    spectra inside Monte Carlo loops where a pure-numpy Jacobi sweep would
    dominate run time.

All spectra are returned in descending order; ties keep their solver order.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "SWEEP_CAP",
    "ConvergenceError",
    "SpectrumResult",
    "as_matrix",
    "as_symmetric",
    "sym_eigen",
    "autocov",
    "singular_values",
    "covariance_eigs",
    "autocov_singular_values",
    "spectral_norm",
    "frobenius_norm",
    "diag_gap",
    "sum_squares_matrix",
    "sum_squares_eigs",
    "write_spectra_csv",
]

SWEEP_CAP = 30
DEFAULT_METHOD = "lapack"


class ConvergenceError(RuntimeError):
    """Jacobi iteration did not reach tolerance within the sweep cap."""


@dataclass(frozen=True)
class SpectrumResult:
    """Descending eigen- or singular values of one (auto)covariance matrix.

    ``a2`` is the normalization ``a_np**2``; it is carried along but never
    applied to ``values``.
    """

    values: np.ndarray
    lag: int = 0
    a2: float | None = None
    is_eigen: bool = True
    is_singular: bool = False

    @property
    def normalized(self):
        if self.a2 is None:
            raise ValueError("no normalization attached")
        return self.values / self.a2

    def __len__(self):
        return len(self.values)


def as_matrix(x):
    """Array view of an ndarray, array-like or an object carrying ``.data`` (a panel)."""
    if not isinstance(x, np.ndarray) and hasattr(x, "data"):
        x = x.data
    return np.asarray(x, dtype=float)


def as_symmetric(m, tol=1e-12):
    """Validate near-symmetry (relative to the largest entry) and symmetrize."""
    m = np.asarray(m, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError("matrix has non-finite entries")
    scale = max(1.0, float(np.max(np.abs(m)))) if m.size else 1.0
    if m.size and np.max(np.abs(m - m.T)) > tol * scale:
        raise ValueError("matrix is not symmetric")
    return 0.5 * (m + m.T)


def _round_robin(m):
    """Pairings of ``0..m-1`` (``m`` even) so every pair meets once per sweep."""
    players = list(range(m))
    rounds = []
    for _ in range(m - 1):
        half = m // 2
        P = np.array(players[:half])
        Q = np.array(players[::-1][:half])
        rounds.append((P, Q))
        players = [players[0]] + [players[-1]] + players[1:-1]
    return rounds


def _jacobi(a, tol, sweep_cap):
    m = a.shape[0]
    size = m + (m % 2)
    A = np.zeros((size, size))
    A[:m, :m] = a
    V = np.eye(size)
    norm = np.sqrt(np.sum(a * a))
    if norm == 0:
        return np.zeros(m), np.eye(m)
    threshold = tol * norm
    rounds = _round_robin(size)
    for _ in range(sweep_cap + 1):
        off = np.sqrt(np.sum(A * A, where=~np.eye(size, dtype=bool)))
        if off < threshold:
            return np.diag(A)[:m].copy(), V[:m, :m].copy()
        for P, Q in rounds:
            apq = A[P, Q]
            active = apq != 0
            if not np.any(active):
                continue
            P, Q, apq = P[active], Q[active], apq[active]
            # t = sign(tau) / (|tau| + sqrt(1 + tau^2)), tau = d / (2 apq), scaled to avoid overflow
            d = A[Q, Q] - A[P, P]
            sign = np.where(np.sign(d) * np.sign(apq) >= 0, 1.0, -1.0)
            t = sign * np.abs(2.0 * apq) / (np.abs(d) + np.hypot(d, 2.0 * apq))
            c = 1.0 / np.sqrt(1.0 + t * t)
            s = t * c
            Ap, Aq = A[:, P], A[:, Q]
            A[:, P] = Ap * c - Aq * s
            A[:, Q] = Ap * s + Aq * c
            Rp, Rq = A[P, :], A[Q, :]
            A[P, :] = c[:, None] * Rp - s[:, None] * Rq
            A[Q, :] = s[:, None] * Rp + c[:, None] * Rq
            A[P, Q] = 0.0
            A[Q, P] = 0.0
            Vp, Vq = V[:, P], V[:, Q]
            V[:, P] = Vp * c - Vq * s
            V[:, Q] = Vp * s + Vq * c
    raise ConvergenceError(f"Jacobi did not converge in {sweep_cap} sweeps (off-diagonal mass {off:.3e})")


def sym_eigen(m, method="jacobi", tol=1e-12, sweep_cap=SWEEP_CAP):
    """Eigen-decomposition of a symmetric matrix.

    Returns
    -------
    values : ndarray
        Eigenvalues in descending order.
    vectors : ndarray
        Orthonormal eigenvectors as columns, matching ``values``.
    """
    a = as_symmetric(m)
    if a.shape[0] == 0:
        return np.zeros(0), np.zeros((0, 0))
    if method == "jacobi":
        w, V = _jacobi(a, tol, sweep_cap)
    elif method == "lapack":
        w, V = np.linalg.eigh(a)
    else:
        raise ValueError(f"unknown method {method!r}")
    order = np.argsort(-w, kind="stable")
    return w[order], V[:, order]


def _eigvals_desc(a, method):
    if method == "lapack":
        return np.linalg.eigvalsh(a)[::-1]
    return sym_eigen(a, method)[0]


def autocov(X0, Xs):
    """``X_n(0) X_n(s)'``; not symmetric for ``s > 0``."""
    X0 = as_matrix(X0)
    Xs = as_matrix(Xs)
    if X0.shape != Xs.shape:
        raise ValueError(f"shape mismatch {X0.shape} vs {Xs.shape}")
    return X0 @ Xs.T


def singular_values(a, method=None):
    """Descending singular values: square roots of the eigenvalues of ``a a'``."""
    a = np.atleast_2d(np.asarray(a, dtype=float))
    g = a @ a.T
    w = _eigvals_desc(0.5 * (g + g.T), method or "jacobi")
    return np.sqrt(np.clip(w, 0.0, None))


def covariance_eigs(X, a2=None, method=DEFAULT_METHOD):
    """Eigenvalues of ``X X'`` (length ``p``).

    When ``p > n`` the ``n x n`` matrix ``X' X`` is diagonalized instead and
    the spectrum is padded with ``p - n`` zeros.
    """
    X = as_matrix(X)
    p, n = X.shape
    if p <= n:
        g = X @ X.T
    else:
        g = X.T @ X
    w = _eigvals_desc(0.5 * (g + g.T), method)
    if p > n:
        w = np.concatenate([w, np.zeros(p - n)])
    return SpectrumResult(w, 0, a2, True, False)


def autocov_singular_values(X0, Xs, lag=0, a2=None, method=DEFAULT_METHOD):
    """Singular values of ``X_n(0) X_n(s)'`` as a :class:`SpectrumResult`."""
    A = autocov(X0, Xs)
    g = A @ A.T
    w = _eigvals_desc(0.5 * (g + g.T), method)
    return SpectrumResult(np.sqrt(np.clip(w, 0.0, None)), lag, a2, lag == 0, True)


def spectral_norm(a):
    a = np.atleast_2d(np.asarray(a, dtype=float))
    if not a.size:
        return 0.0
    return float(singular_values(a, "lapack")[0])


def frobenius_norm(a):
    return float(np.sqrt(np.sum(np.asarray(a, dtype=float) ** 2)))


@dataclass(frozen=True)
class DiagGap:
    gap: float
    weyl_max_shift: float
    weyl_holds: bool


def diag_gap(X, a2, method=DEFAULT_METHOD):
    """Normalized off-diagonal mass ``||X X' - diag(X X')||_2 / a2`` plus a Weyl check.

    ``weyl_max_shift`` is ``max_i |lambda_(i) - lambda_(i)(diag)| / a2``, which
    Weyl's inequality bounds by ``gap``.
    """
    X = as_matrix(X)
    g = X @ X.T
    g = 0.5 * (g + g.T)
    d = np.diag(g).copy()
    off = g - np.diag(d)
    w = _eigvals_desc(off, method)
    norm = float(max(abs(w[0]), abs(w[-1]))) if w.size else 0.0
    lam = _eigvals_desc(g, method)
    shift = float(np.max(np.abs(lam - np.sort(d)[::-1]))) if d.size else 0.0
    slack = 1e-10 * max(1.0, float(np.max(np.abs(g))) if g.size else 1.0)
    return DiagGap(norm / a2, shift / a2, shift <= norm + slack)


def sum_squares_matrix(panels, s0, s1):
    """``sum_{s=s0}^{s1} A_n(s) A_n(s)'`` with ``A_n(s) = X_n(0) X_n(s)'``."""
    if not 0 <= s0 <= s1:
        raise ValueError("need 0 <= s0 <= s1")
    if s1 >= len(panels):
        raise ValueError(f"lag {s1} not available (have {len(panels)} panels)")
    X0 = panels[0]
    total = None
    for s in range(s0, s1 + 1):
        A = autocov(X0, panels[s])
        term = A @ A.T
        total = term if total is None else total + term
    return 0.5 * (total + total.T)


def sum_squares_eigs(panels, s0, s1, method=DEFAULT_METHOD):
    """Descending eigenvalues ``w_(i)(s0, s1)`` of the summed squared autocovariances."""
    return _eigvals_desc(sum_squares_matrix(panels, s0, s1), method)


def write_spectra_csv(rows, path):
    """Write ``(replicate_id, s, i, lambda, normalized_lambda)`` rows.

    ``rows`` is an iterable of ``(replicate_id, SpectrumResult)``.
    """
    with open(path, "w", newline="") as fh:
        fh.write("replicate_id,s,i,lambda,normalized_lambda\n")
        for rep, spec in rows:
            a2 = spec.a2 if spec.a2 else float("nan")
            for i, lam in enumerate(spec.values, start=1):
                fh.write(f"{rep},{spec.lag},{i},{lam:.17g},{lam / a2:.17g}\n")
