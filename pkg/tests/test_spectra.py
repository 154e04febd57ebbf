import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra import numpy as hnp

from heavyspec import rand_heavy as rh
from heavyspec import spectra as sp

from oracles import charpoly_eigs


def test_diagonal():
    w, V = sp.sym_eigen([[2.0, 0.0], [0.0, 8.0]])
    assert np.array_equal(w, [8.0, 2.0])
    assert np.allclose(np.abs(V), [[0, 1], [1, 0]])


def test_charpoly_oracle_100_cases():
    rng = np.random.default_rng(2024)
    worst = 0.0
    for case in range(100):
        d = 1 + case % 3
        a = rng.integers(-9, 10, size=(d, d)).astype(float)
        a = a + a.T
        worst = max(worst, np.max(np.abs(sp.sym_eigen(a)[0] - charpoly_eigs(a))))
    assert worst < 1e-9


@pytest.mark.parametrize("d", [2, 5, 17, 64, 200])
def test_jacobi_residual_and_orthogonality(d):
    rng = np.random.default_rng(d)
    a = rng.normal(size=(d, d))
    a = a + a.T
    w, V = sp.sym_eigen(a)
    nrm = np.linalg.norm(a)
    assert np.linalg.norm(a @ V - V * w) < 1e-9 * nrm
    assert np.max(np.abs(V.T @ V - np.eye(d))) < 1e-10
    assert np.all(np.diff(w) <= 0)


def test_jacobi_vs_lapack():
    rng = np.random.default_rng(7)
    a = rng.standard_t(1.5, size=(40, 60))
    g = a @ a.T
    wj = sp.sym_eigen(g, "jacobi")[0]
    wl = sp.sym_eigen(g, "lapack")[0]
    assert np.allclose(wj, wl, rtol=1e-10, atol=1e-10 * wl[0])


def test_jacobi_repeated_eigenvalues():
    w, V = sp.sym_eigen(np.eye(5) * 3.0)
    assert np.allclose(w, 3.0)
    q = np.linalg.qr(np.random.default_rng(1).normal(size=(4, 4)))[0]
    a = q @ np.diag([5.0, 5.0, 1.0, 1.0]) @ q.T
    assert np.allclose(sp.sym_eigen(a)[0], [5, 5, 1, 1], atol=1e-12)


@pytest.mark.filterwarnings("error::RuntimeWarning")
@pytest.mark.parametrize("eps", [5e-324, -1e-300, 1e-200])
def test_jacobi_tiny_off_diagonal(eps):
    a = np.array([[1e10, eps], [eps, -1e10]])
    w, V = sp.sym_eigen(a)
    assert np.allclose(w, [1e10, -1e10], rtol=1e-15)
    assert np.allclose(V.T @ V, np.eye(2), atol=1e-15)


def test_sweep_cap_reported():
    rng = np.random.default_rng(3)
    a = rng.normal(size=(30, 30))
    with pytest.raises(sp.ConvergenceError):
        sp.sym_eigen(a + a.T, sweep_cap=1)


def test_symmetry_check():
    with pytest.raises(ValueError):
        sp.sym_eigen([[1.0, 2.0], [2.1, 1.0]])
    with pytest.raises(ValueError):
        sp.sym_eigen(np.ones((2, 3)))
    with pytest.raises(ValueError):
        sp.sym_eigen([[np.nan, 0], [0, 1]])
    with pytest.raises(ValueError):
        sp.sym_eigen(np.eye(2), method="qr")
    w, _ = sp.sym_eigen([[1.0, 2.0], [2.0 + 1e-14, 1.0]])
    assert np.allclose(w, [3, -1])


def test_autocov():
    assert np.array_equal(sp.autocov(np.eye(2), np.eye(2)), np.eye(2))
    rng = np.random.default_rng(0)
    X0 = rng.integers(-5, 6, size=(2, 3)).astype(float)
    Xs = rng.integers(-5, 6, size=(2, 3)).astype(float)
    ref = np.zeros((2, 2))
    for i in range(2):
        for j in range(2):
            for t in range(3):
                ref[i, j] += X0[i, t] * Xs[j, t]
    assert np.array_equal(sp.autocov(X0, Xs), ref)
    g = sp.autocov(X0, X0)
    assert np.min(np.linalg.eigvalsh(g)) >= -1e-10
    with pytest.raises(ValueError):
        sp.autocov(X0, np.ones((2, 4)))


def test_singular_values():
    assert np.allclose(sp.singular_values([[1, 2], [-2, -4]]), [5, 0], atol=1e-7)
    assert np.allclose(sp.singular_values(np.eye(2)), [1, 1])
    rng = np.random.default_rng(5)
    a = rng.normal(size=(3, 5))
    assert np.allclose(sp.singular_values(a), sp.singular_values(a.T)[:3])
    assert np.allclose(sp.singular_values(a), np.linalg.svd(a, compute_uv=False))


def test_gram_switch():
    rng = np.random.default_rng(9)
    X = rng.normal(size=(2, 5))
    a = sp.covariance_eigs(X).values
    b = sp.covariance_eigs(X.T).values
    assert b.size == 5 and np.allclose(b[2:], 0)
    assert np.allclose(a, b[:2], rtol=1e-10)
    Y = rng.standard_t(2.0, size=(30, 12))
    w = sp.covariance_eigs(Y, method="jacobi").values
    ref = np.linalg.eigvalsh(Y @ Y.T)[::-1]
    assert np.allclose(w[:12], ref[:12], rtol=1e-9)
    assert np.sum(w > 1e-9 * w[0]) <= 12


def test_spectrum_result_normalization():
    r = sp.covariance_eigs(np.eye(2) * 2, a2=4.0)
    assert np.allclose(r.normalized, [1, 1])
    with pytest.raises(ValueError):
        sp.covariance_eigs(np.eye(2)).normalized


def test_autocov_singular_values_flags():
    rng = np.random.default_rng(2)
    X = rng.normal(size=(4, 10))
    r = sp.autocov_singular_values(X[:, :-1], X[:, 1:], lag=1)
    assert r.is_singular and not r.is_eigen and r.lag == 1
    assert np.allclose(r.values, np.linalg.svd(X[:, :-1] @ X[:, 1:].T, compute_uv=False))


def test_norms():
    a = np.diag([3.0, -4.0])
    assert sp.spectral_norm(a) == pytest.approx(4.0)
    assert sp.frobenius_norm(a) == pytest.approx(5.0)
    assert sp.spectral_norm(np.zeros((2, 2))) == 0.0 and sp.frobenius_norm(np.zeros((2, 2))) == 0.0


@given(hnp.arrays(np.float64, (3, 3), elements=st.floats(-100, 100)))
def test_norm_inequality(a):
    assert sp.spectral_norm(a) <= sp.frobenius_norm(a) * (1 + 1e-12) + 1e-12


def test_diag_gap():
    X = np.array([[1.0, 0, 0], [0, 2.0, 0]])
    g = sp.diag_gap(X, 1.0)
    assert g.gap == 0.0 and g.weyl_holds
    rng = np.random.default_rng(4)
    g = sp.diag_gap(rng.normal(size=(6, 8)), 2.0)
    assert g.weyl_holds and g.weyl_max_shift <= g.gap + 1e-12


@given(st.integers(0, 10**6))
def test_weyl_inequality(seed):
    rng = np.random.default_rng(seed)
    A = rng.normal(size=(5, 5))
    B = rng.normal(size=(5, 5))
    A, B = A + A.T, B + B.T
    lhs = np.max(np.abs(sp.sym_eigen(A + B)[0] - sp.sym_eigen(A)[0]))
    assert lhs <= sp.spectral_norm(B) + 1e-10


@pytest.mark.slow
def test_diag_gap_small_and_decreasing():
    model = rh.pareto(1.6)
    med = {}
    for n in (500, 1000):
        a2 = rh.a_of(model, 200 * n) ** 2
        vals = [sp.diag_gap(rh.sample(model, 200 * n, 50_000 + r, shape=(200, n)), a2).gap for r in range(100)]
        med[n] = np.median(vals)
    assert med[1000] < 0.15
    assert med[1000] < med[500]


def test_sum_squares():
    rng = np.random.default_rng(0)
    panels = [rng.integers(-3, 4, size=(2, 3)).astype(float) for _ in range(3)]
    ref = sum(panels[0] @ P.T @ (panels[0] @ P.T).T for P in panels[1:3])
    assert np.array_equal(sp.sum_squares_matrix(panels, 1, 2), ref)
    assert np.allclose(sp.sum_squares_eigs(panels, 1, 2), np.linalg.eigvalsh(ref)[::-1])
    lam = sp.covariance_eigs(panels[0]).values
    assert np.allclose(sp.sum_squares_eigs(panels, 0, 0), lam**2)
    with pytest.raises(ValueError):
        sp.sum_squares_matrix(panels, 2, 1)
    with pytest.raises(ValueError):
        sp.sum_squares_matrix(panels, 0, 3)


@given(st.integers(0, 10**6), st.integers(0, 3))
def test_sum_squares_nonnegative_definite(seed, s1):
    rng = np.random.default_rng(seed)
    X = rng.standard_t(1.5, size=(4, 12))
    panels = [X[:, s : s + 8] for s in range(4)]
    w = sp.sum_squares_eigs(panels, 0, s1)
    assert w[-1] >= -1e-8 * w.sum()


def test_write_spectra_csv(tmp_path):
    r = sp.covariance_eigs(np.diag([2.0, 1.0]), a2=2.0)
    sp.write_spectra_csv([(0, r)], tmp_path / "s.csv")
    lines = (tmp_path / "s.csv").read_text().splitlines()
    assert lines[0] == "replicate_id,s,i,lambda,normalized_lambda"
    assert lines[1] == "0,0,1,4,2"
