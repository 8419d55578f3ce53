"""Dense real-matrix primitives: symmetric eigendecomposition and linear solves.

Matrices are plain float64 numpy arrays throughout; the helpers here add the
validation the rest of the pipeline relies on (finiteness, symmetry,
singularity detection) on top of LAPACK-backed numerics.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import DimensionError, SingularMatrixError, SymmetryError

SYMMETRY_RTOL = 1e-10
PIVOT_RTOL = 1e-12


def as_matrix(a, name: str = "matrix") -> np.ndarray:
    """Validate and return ``a`` as a finite 2-D float64 array."""
    m = np.asarray(a, dtype=float)
    if m.ndim != 2 or m.shape[0] < 1 or m.shape[1] < 1:
        raise DimensionError(f"{name} must be 2-D with at least one row and column, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError(f"{name} contains non-finite entries")
    return m


def as_vector(b, name: str = "vector") -> np.ndarray:
    v = np.asarray(b, dtype=float).ravel()
    if v.size < 1:
        raise DimensionError(f"{name} must be non-empty")
    if not np.all(np.isfinite(v)):
        raise ValueError(f"{name} contains non-finite entries")
    return v


@dataclass(frozen=True)
class SymmetricSpectrum:
    """Eigenvalues (descending) and optional orthonormal eigenvectors."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray | None = None

    def reconstruct(self) -> np.ndarray:
        if self.eigenvectors is None:
            raise ValueError("spectrum was computed without eigenvectors")
        q = self.eigenvectors
        return (q * self.eigenvalues) @ q.T


def sym_eig(a, need_vectors: bool = False) -> SymmetricSpectrum:
    """Eigendecomposition of a symmetric matrix, eigenvalues sorted descending."""
    m = as_matrix(a)
    if m.shape[0] != m.shape[1]:
        raise DimensionError(f"expected a square matrix, got shape {m.shape}")
    scale = max(np.abs(m).max(), 1.0)
    if np.abs(m - m.T).max() > SYMMETRY_RTOL * scale:
        raise SymmetryError("matrix is not symmetric within tolerance")
    sym = 0.5 * (m + m.T)
    if need_vectors:
        vals, vecs = np.linalg.eigh(sym)
        order = np.argsort(vals)[::-1]
        return SymmetricSpectrum(vals[order], vecs[:, order])
    vals = np.linalg.eigvalsh(sym)
    return SymmetricSpectrum(vals[::-1].copy())


def solve_linear(a, b) -> np.ndarray:
    """Solve ``Ax = b`` by partial-pivot LU, raising on numerical singularity."""
    m = as_matrix(a, "A")
    v = as_vector(b, "b")
    if m.shape[0] != m.shape[1]:
        raise DimensionError(f"A must be square, got shape {m.shape}")
    if m.shape[0] != v.size:
        raise DimensionError(f"A is {m.shape} but b has length {v.size}")
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", scipy.linalg.LinAlgWarning)
        lu, piv = scipy.linalg.lu_factor(m, check_finite=False)
    norm = np.linalg.norm(m)
    if np.abs(np.diag(lu)).min() <= PIVOT_RTOL * max(norm, np.finfo(float).tiny):
        raise SingularMatrixError("pivot below tolerance; matrix is numerically singular")
    return scipy.linalg.lu_solve((lu, piv), v, check_finite=False)
