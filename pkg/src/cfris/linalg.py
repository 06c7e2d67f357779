"""Complex dense linear-algebra kernels shared by every module.

All tolerances are relative to the trace or Frobenius norm of the input;
large-scale fading spans many orders of magnitude in linear units, so
absolute thresholds would be meaningless.
"""

from dataclasses import dataclass

import numpy as np

from .exceptions import DimensionError, ModelError, SingularMatrixError

PSD_TOL = 1e-10         # relative (to trace) tolerance on negative eigenvalues
PIVOT_TOL = 1e-14       # relative pivot threshold declaring singularity


@dataclass
class HermitianEig:
    """Eigendecomposition of a Hermitian matrix, eigenvalues descending."""

    eigenvalues: np.ndarray   # real, shape (n,), sorted descending
    eigenvectors: np.ndarray  # orthonormal columns, shape (n, n)

    def reconstruct(self):
        u = self.eigenvectors
        return (u * self.eigenvalues) @ u.conj().T


def hermitian_eig(a):
    """Eigendecompose a Hermitian matrix (symmetrized internally)."""
    a = np.asarray(a, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionError(f"expected a square matrix, got shape {a.shape}")
    a = 0.5 * (a + a.conj().T)
    vals, vecs = np.linalg.eigh(a)
    order = np.argsort(vals)[::-1]
    return HermitianEig(vals[order], vecs[:, order])


def solve_pd(a, b):
    """Solve A x = b for Hermitian positive-definite A via Cholesky.

    Raises SingularMatrixError when a pivot falls below
    PIVOT_TOL * trace(A) / dim.
    """
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionError(f"expected a square matrix, got shape {a.shape}")
    if b.shape[0] != a.shape[0]:
        raise DimensionError(f"rhs length {b.shape[0]} does not match matrix dim {a.shape[0]}")
    a = 0.5 * (a + a.conj().T)
    n = a.shape[0]
    try:
        chol = np.linalg.cholesky(a)
    except np.linalg.LinAlgError as exc:
        raise SingularMatrixError("Cholesky factorization failed; matrix is not PD") from exc
    threshold = PIVOT_TOL * np.real(np.trace(a)) / n
    if np.min(np.real(np.diagonal(chol)) ** 2) < threshold:
        raise SingularMatrixError("pivot below singularity threshold")
    y = np.linalg.solve(chol, b)
    return np.linalg.solve(chol.conj().T, y)


def psd_sqrt(cov):
    """PSD square root via eigendecomposition with negative-eigenvalue clamping.

    Correlation matrices from the local-scattering construction can be
    numerically rank-deficient; eigenvalues above -PSD_TOL*trace are clamped
    to zero, anything more negative raises ModelError.
    """
    cov = np.asarray(cov, dtype=complex)
    eig = hermitian_eig(cov)
    trace = np.real(np.trace(cov))
    if np.min(eig.eigenvalues) < -PSD_TOL * max(trace, 0.0):
        raise ModelError("covariance has a significantly negative eigenvalue")
    vals = np.clip(eig.eigenvalues, 0.0, None)
    return (eig.eigenvectors * np.sqrt(vals)) @ eig.eigenvectors.conj().T


def sample_complex_gaussian(cov, rng, size=None):
    """Draw circularly-symmetric complex Gaussian vectors with covariance cov.

    Returns shape (n,) when size is None, else (size, n). Deterministic
    given the rng state.
    """
    root = psd_sqrt(cov)
    n = root.shape[0]
    shape = (n,) if size is None else (size, n)
    w = (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2.0)
    return w @ root.T  # root Hermitian, so this is (root @ w^T)^T


def sample_real_gaussian(cov, rng, size=None):
    """Real multivariate normal with PSD covariance, clamped like psd_sqrt."""
    root = np.real(psd_sqrt(cov))
    n = root.shape[0]
    shape = (n,) if size is None else (size, n)
    return rng.standard_normal(shape) @ root.T


def min_relative_eigenvalue(a):
    """min eigenvalue divided by trace; used in PSD assertions in tests."""
    eig = hermitian_eig(a)
    trace = np.real(np.trace(a))
    if trace <= 0:
        return float(np.min(eig.eigenvalues))
    return float(np.min(eig.eigenvalues) / trace)
