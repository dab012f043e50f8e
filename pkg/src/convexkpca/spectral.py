"""Symmetric eigendecomposition, top-k spectra and spectral deflation.

Eigenvectors follow one sign convention everywhere: the entry of largest
absolute value in each eigenvector is positive (first such index on ties).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConvergenceFailure, NotPSD, SourceMismatch
from .kernels import KernelMatrix, KernelSpec, feature_map

PSD_TOL = 1e-10
NONZERO_TOL = 1e-10


def _matrix(K) -> np.ndarray:
    A = K.K if isinstance(K, KernelMatrix) else np.asarray(K, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise SourceMismatch(f"expected a square matrix, got shape {A.shape}")
    return A


@dataclass(frozen=True)
class Spectrum:
    """All eigenpairs of a symmetric matrix, eigenvalues descending."""

    values: np.ndarray
    vectors: np.ndarray

    @property
    def n(self) -> int:
        return self.values.shape[0]

    def reconstruct(self) -> np.ndarray:
        return (self.vectors * self.values) @ self.vectors.T


@dataclass(frozen=True)
class SpectrumTopK:
    k: int
    eigenvalues: np.ndarray  # (k,)
    eigenvectors: np.ndarray  # (N, k)
    next_eigenvalue: float  # lambda_{k+1}
    n: int
    full: Spectrum | None = None

    @property
    def lambda_max(self) -> float:
        return float(self.eigenvalues[0]) if self.k else self.next_eigenvalue


def fix_signs(vectors: np.ndarray) -> np.ndarray:
    """Flip columns so each one's largest-magnitude entry is positive."""
    V = np.array(vectors, dtype=float, copy=True)
    if V.size == 0:
        return V
    idx = np.argmax(np.abs(V), axis=0)
    signs = np.sign(V[idx, np.arange(V.shape[1])])
    signs[signs == 0] = 1.0
    return V * signs


def eig_sym(K) -> Spectrum:
    """Full eigendecomposition of a symmetric matrix, sorted descending.

    Backed by LAPACK's symmetric driver (Householder tridiagonalisation
    followed by implicit-shift QR / divide and conquer). LAPACK caps the
    QR sweeps at 30*N; exceeding it surfaces as ConvergenceFailure.
    """
    A = _matrix(K)
    if not np.all(np.isfinite(A)):
        raise ConvergenceFailure("matrix has non-finite entries")
    try:
        w, V = np.linalg.eigh(A)
    except np.linalg.LinAlgError as exc:
        raise ConvergenceFailure(str(exc)) from exc
    order = np.argsort(-w, kind="stable")
    return Spectrum(w[order], fix_signs(V[:, order]))


def top_k(K, k: int, full: Spectrum | None = None) -> SpectrumTopK:
    """The k largest eigenpairs plus lambda_{k+1}.

    Pass ``full`` to reuse an existing decomposition of the same matrix.
    Eigenvalues in [-tol, 0) are clamped to 0, with tol = 1e-10 * max(1, lambda_1);
    anything more negative raises NotPSD.
    """
    A = _matrix(K)
    n = A.shape[0]
    if not 0 <= k < n:
        raise ValueError(f"k must satisfy 0 <= k < N={n}, got {k}")
    spec = full if full is not None else eig_sym(A)
    if spec.n != n:
        raise SourceMismatch(f"spectrum has size {spec.n}, matrix has {n}")
    tol = PSD_TOL * max(1.0, float(spec.values[0]))
    if spec.values[-1] < -tol:
        raise NotPSD(f"minimum eigenvalue {spec.values[-1]:.3e} below -{tol:.1e}")
    values = np.maximum(spec.values, 0.0)
    clamped = Spectrum(values, spec.vectors)
    return SpectrumTopK(
        k=k,
        eigenvalues=values[:k].copy(),
        eigenvectors=spec.vectors[:, :k].copy(),
        next_eigenvalue=float(values[k]),
        n=n,
        full=clamped,
    )


@dataclass(frozen=True)
class DeflatedKernel:
    Kp: np.ndarray
    k: int
    source: KernelMatrix | None
    spectrum: SpectrumTopK

    @property
    def n(self) -> int:
        return self.Kp.shape[0]


def deflate(K, spec: SpectrumTopK) -> DeflatedKernel:
    """Remove the top-k eigencomponents: Kp = K - sum_l lambda_l u_l u_l^T."""
    A = _matrix(K)
    if spec.n != A.shape[0] or spec.eigenvectors.shape[0] != A.shape[0]:
        raise SourceMismatch(
            f"spectrum is for N={spec.n}, kernel matrix has N={A.shape[0]}"
        )
    source = K if isinstance(K, KernelMatrix) else None
    if spec.k == 0:
        return DeflatedKernel(A.copy(), 0, source, spec)
    U = spec.eigenvectors
    Kp = A - (U * spec.eigenvalues) @ U.T
    Kp = 0.5 * (Kp + Kp.T)
    return DeflatedKernel(Kp, spec.k, source, spec)


def covariance_spectrum(data, spec: KernelSpec) -> np.ndarray:
    """Nonzero eigenvalues of sum_i phi(x_i) phi(x_i)^T, descending.

    Only defined for kernels with an explicit feature map.
    """
    Phi = feature_map(data, spec)
    C = Phi.T @ Phi
    w = np.linalg.eigvalsh(0.5 * (C + C.T))[::-1]
    if w.size == 0 or w[0] <= 0:
        return np.empty(0)
    return w[w > NONZERO_TOL * w[0]]


def nonzero_eigenvalues(K) -> np.ndarray:
    w = eig_sym(K).values
    if w[0] <= 0:
        return np.empty(0)
    return w[w > NONZERO_TOL * w[0]]
