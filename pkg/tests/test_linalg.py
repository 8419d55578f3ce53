import numpy as np
import pytest

from bandvote.errors import DimensionError, SingularMatrixError, SymmetryError
from bandvote.linalg import solve_linear, sym_eig


def charpoly_roots(a):
    """Eigenvalues via Faddeev-LeVerrier characteristic polynomial + np.roots.

    Independent of the eigh path: only matrix products, traces and a
    companion-matrix root finder are involved. Usable for small n.
    """
    a = np.asarray(a, dtype=float)
    n = a.shape[0]
    coeffs = np.zeros(n + 1)
    coeffs[0] = 1.0
    m = np.zeros_like(a)
    for k in range(1, n + 1):
        m = a @ m + coeffs[k - 1] * np.eye(n)
        coeffs[k] = -np.trace(a @ m) / k
    return np.sort(np.real(np.roots(coeffs)))[::-1]


def test_identity_eigenvalues():
    spec = sym_eig(np.eye(3))
    assert np.allclose(spec.eigenvalues, [1.0, 1.0, 1.0])


def test_diagonal_eigenvalues_sorted_descending():
    spec = sym_eig(np.diag([2.0, 3.0]))
    assert np.allclose(spec.eigenvalues, [3.0, 2.0])


def test_random_symmetric_matches_charpoly_oracle():
    rng = np.random.default_rng(7)
    for _ in range(20):
        b = rng.normal(size=(5, 5))
        a = 0.5 * (b + b.T)
        spec = sym_eig(a)
        assert np.allclose(spec.eigenvalues, charpoly_roots(a), atol=1e-8)


def test_reconstruction_and_orthonormality():
    rng = np.random.default_rng(3)
    b = rng.normal(size=(6, 6))
    a = 0.5 * (b + b.T)
    spec = sym_eig(a, need_vectors=True)
    q = spec.eigenvectors
    assert np.abs(q.T @ q - np.eye(6)).max() < 1e-8
    assert np.abs(spec.reconstruct() - a).max() <= 1e-8 * np.linalg.norm(a)


def test_trace_preservation():
    rng = np.random.default_rng(11)
    for _ in range(50):
        b = rng.normal(size=(8, 8))
        a = 0.5 * (b + b.T)
        spec = sym_eig(a)
        assert abs(spec.eigenvalues.sum() - np.trace(a)) <= 1e-8 * max(abs(np.trace(a)), 1.0)


def test_psd_inputs_have_nonnegative_eigenvalues():
    rng = np.random.default_rng(13)
    for _ in range(50):
        b = rng.normal(size=(6, 4))
        a = b @ b.T
        spec = sym_eig(a)
        assert spec.eigenvalues.min() >= -1e-10 * np.linalg.norm(a)


def test_rejects_nonsquare_and_asymmetric():
    with pytest.raises(DimensionError):
        sym_eig(np.ones((2, 3)))
    with pytest.raises(SymmetryError):
        sym_eig(np.array([[1.0, 2.0], [0.0, 1.0]]))


def test_rejects_nonfinite():
    with pytest.raises(ValueError):
        sym_eig(np.array([[np.nan, 0.0], [0.0, 1.0]]))


def test_solve_identity_and_diagonal():
    assert np.allclose(solve_linear(np.eye(2), [3.0, 4.0]), [3.0, 4.0])
    assert np.allclose(solve_linear(np.diag([2.0, 4.0]), [2.0, 8.0]), [1.0, 2.0])


def test_solve_residual_bound_random():
    rng = np.random.default_rng(5)
    for _ in range(1000):
        a = rng.normal(size=(6, 6)) + 6.0 * np.eye(6)
        b = rng.normal(size=6)
        x = solve_linear(a, b)
        res = np.linalg.norm(a @ x - b)
        assert res <= 1e-8 * (np.linalg.norm(a) * np.linalg.norm(x) + np.linalg.norm(b))


def test_solve_singular_raises():
    a = np.array([[1.0, 2.0], [2.0, 4.0]])
    with pytest.raises(SingularMatrixError):
        solve_linear(a, [1.0, 1.0])


def test_solve_shape_mismatch():
    with pytest.raises(DimensionError):
        solve_linear(np.ones((2, 3)), [1.0, 2.0])
    with pytest.raises(DimensionError):
        solve_linear(np.eye(2), [1.0, 2.0, 3.0])
