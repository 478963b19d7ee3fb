import numpy as np
import pytest

from kgranger.errors import EigenFailureError
from kgranger.linalg import (
    _jacobi_sweeps_loops,
    _jacobi_sweeps_numpy,
    jacobi_eigh,
    symmetric_eigh,
)


def _random_symmetric(n, seed):
    rng = np.random.default_rng(seed)
    a = rng.standard_normal((n, n))
    return (a + a.T) / 2.0


@pytest.mark.parametrize("n", [1, 2, 3, 8, 40])
def test_jacobi_matches_lapack(n):
    a = _random_symmetric(n, seed=n)
    vals, vecs = jacobi_eigh(a)
    ref = np.linalg.eigvalsh(a)[::-1]
    np.testing.assert_allclose(vals, ref, atol=1e-10)
    np.testing.assert_allclose(vecs.T @ vecs, np.eye(n), atol=1e-10)
    np.testing.assert_allclose(vecs @ np.diag(vals) @ vecs.T, a, atol=1e-10)


def test_eigenvalues_nonincreasing():
    vals, _ = jacobi_eigh(_random_symmetric(17, seed=3))
    assert np.all(np.diff(vals) <= 1e-12)


def test_diagonal_matrix_is_immediate():
    vals, vecs = jacobi_eigh(np.diag([3.0, 1.0, 2.0]))
    np.testing.assert_allclose(vals, [3.0, 2.0, 1.0])
    # eigenvectors are signed unit basis vectors
    np.testing.assert_allclose(np.abs(vecs), np.eye(3)[:, [0, 2, 1]], atol=1e-14)


def test_zero_matrix():
    vals, vecs = jacobi_eigh(np.zeros((4, 4)))
    np.testing.assert_allclose(vals, np.zeros(4))
    np.testing.assert_allclose(vecs, np.eye(4))


def test_loop_and_numpy_sweeps_agree():
    a = _random_symmetric(12, seed=9)
    tol = 1e-12 * np.linalg.norm(a)
    a1, v1 = a.copy(), np.eye(12)
    a2, v2 = a.copy(), np.eye(12)
    s1 = _jacobi_sweeps_loops(a1, v1, tol, 100)
    s2 = _jacobi_sweeps_numpy(a2, v2, tol, 100)
    assert s1[2] and s2[2]
    np.testing.assert_allclose(np.diag(a1), np.diag(a2), atol=1e-12)
    np.testing.assert_allclose(v1, v2, atol=1e-12)


def test_sweep_cap_raises_eigen_failure():
    a = _random_symmetric(20, seed=1)
    with pytest.raises(EigenFailureError):
        jacobi_eigh(a, max_sweeps=1)


def test_rejects_asymmetric_input():
    with pytest.raises(ValueError):
        jacobi_eigh(np.array([[1.0, 2.0], [0.0, 1.0]]))


def test_dispatch_auto_uses_lapack_above_limit():
    a = _random_symmetric(200, seed=5)
    vals, vecs = symmetric_eigh(a, solver="auto")
    ref = np.linalg.eigvalsh(a)[::-1]
    np.testing.assert_allclose(vals, ref, atol=1e-10)
    np.testing.assert_allclose(vecs @ np.diag(vals) @ vecs.T, a, atol=1e-9)


def test_dispatch_solvers_agree():
    a = _random_symmetric(30, seed=7)
    vj, _ = symmetric_eigh(a, solver="jacobi")
    vl, _ = symmetric_eigh(a, solver="lapack")
    np.testing.assert_allclose(vj, vl, atol=1e-10)


def test_unknown_solver_rejected():
    with pytest.raises(ValueError):
        symmetric_eigh(np.eye(2), solver="qr")
