"""Gram matrices for Gaussian, linear and polynomial kernels.

The Gaussian kernel is ``exp(-||x - y||^2 / (2 sigma^2))`` by default; set
``KernelSpec.denominator = "sigma2"`` for ``exp(-||x - y||^2 / sigma^2)``.
A bandwidth of ``None`` means "use the median pairwise distance".
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Literal

import numpy as np
from scipy.spatial.distance import cdist, pdist, squareform

from .errors import (
    AllPointsIdentical,
    DimensionMismatch,
    NonFiniteEntry,
    NotEnoughPoints,
    NotExplicitFeatureMap,
)

MEDIAN = None  # bandwidth sentinel

KernelKind = Literal["gaussian", "linear", "polynomial"]


@dataclass(frozen=True)
class KernelSpec:
    kind: KernelKind = "gaussian"
    bandwidth: float | None = MEDIAN
    degree: int = 2
    offset: float = 1.0
    denominator: Literal["2sigma2", "sigma2"] = "2sigma2"

    def __post_init__(self):
        if self.kind not in ("gaussian", "linear", "polynomial"):
            raise ValueError(f"unknown kernel kind {self.kind!r}")
        if self.bandwidth is not None and not self.bandwidth > 0:
            raise ValueError(f"bandwidth must be positive, got {self.bandwidth}")
        if self.kind == "polynomial" and self.degree < 1:
            raise ValueError(f"polynomial degree must be >= 1, got {self.degree}")
        if self.denominator not in ("2sigma2", "sigma2"):
            raise ValueError(f"unknown bandwidth convention {self.denominator!r}")

    @property
    def explicit(self) -> bool:
        """True when the kernel has a finite-dimensional feature map."""
        return self.kind in ("linear", "polynomial")


@dataclass(frozen=True)
class KernelMatrix:
    K: np.ndarray
    spec: KernelSpec

    @property
    def n(self) -> int:
        return self.K.shape[0]


def as_data(data) -> np.ndarray:
    """Validate and return a float (N, d) data matrix."""
    X = np.asarray(data, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    if X.ndim != 2:
        raise DimensionMismatch(f"data must be 2-D, got shape {X.shape}")
    if X.shape[1] < 1:
        raise DimensionMismatch("data needs at least one feature column")
    if not np.all(np.isfinite(X)):
        raise NonFiniteEntry("data contains NaN or Inf")
    return X


def median_bandwidth(data) -> float:
    """Median of the N(N-1)/2 pairwise Euclidean distances."""
    X = as_data(data)
    if X.shape[0] < 2:
        raise NotEnoughPoints(f"need at least 2 points, got {X.shape[0]}")
    med = float(np.median(pdist(X)))
    if med == 0.0:
        raise AllPointsIdentical("median pairwise distance is 0")
    return med


def resolve(spec: KernelSpec, data) -> KernelSpec:
    """Return ``spec`` with the median-heuristic bandwidth filled in if needed."""
    if spec.kind == "gaussian" and spec.bandwidth is None:
        return replace(spec, bandwidth=median_bandwidth(data))
    return spec


def _gaussian(sqdist: np.ndarray, spec: KernelSpec) -> np.ndarray:
    scale = 2.0 * spec.bandwidth**2 if spec.denominator == "2sigma2" else spec.bandwidth**2
    return np.exp(-sqdist / scale)


def _evaluate(A: np.ndarray, B: np.ndarray, spec: KernelSpec) -> np.ndarray:
    with np.errstate(over="ignore", invalid="ignore"):
        if spec.kind == "gaussian":
            return _gaussian(cdist(A, B, "sqeuclidean"), spec)
        if spec.kind == "linear":
            return A @ B.T
        return (A @ B.T + spec.offset) ** spec.degree


def _check_finite(K: np.ndarray) -> np.ndarray:
    if not np.all(np.isfinite(K)):
        raise NonFiniteEntry("kernel matrix has NaN or Inf entries")
    return K


def gram(data, spec: KernelSpec | None = None) -> KernelMatrix:
    X = as_data(data)
    spec = resolve(spec or KernelSpec(), X)
    if spec.kind == "gaussian":
        K = _gaussian(squareform(pdist(X, "sqeuclidean")), spec)
        np.fill_diagonal(K, 1.0)
    else:
        K = _evaluate(X, X, spec)
    with np.errstate(over="ignore", invalid="ignore"):
        K = 0.5 * (K + K.T)
    return KernelMatrix(_check_finite(K), spec)


def gram_cross(train, test, spec: KernelSpec | None = None) -> np.ndarray:
    """Rectangular kernel block with entry (i, j) = k(test_i, train_j)."""
    A = as_data(train)
    B = as_data(test)
    if A.shape[1] != B.shape[1]:
        raise DimensionMismatch(f"train has d={A.shape[1]}, test has d={B.shape[1]}")
    spec = resolve(spec or KernelSpec(), A)
    return _check_finite(_evaluate(B, A, spec))


def feature_map(data, spec: KernelSpec) -> np.ndarray:
    """Explicit features Phi (N, d') with Phi @ Phi.T == gram(data, spec).K.

    The polynomial map is the ``degree``-fold tensor power of
    ``[x, sqrt(offset)]``, so its width is ``(d + 1) ** degree``.
    """
    X = as_data(data)
    if spec.kind == "linear":
        return X.copy()
    if spec.kind != "polynomial":
        raise NotExplicitFeatureMap(f"{spec.kind} kernel has no finite feature map")
    if spec.offset < 0:
        raise NotExplicitFeatureMap("negative offset gives an indefinite polynomial kernel")
    aug = np.hstack([X, np.full((X.shape[0], 1), np.sqrt(spec.offset))])
    phi = aug
    for _ in range(spec.degree - 1):
        phi = np.einsum("ni,nj->nij", phi, aug).reshape(X.shape[0], -1)
    return phi


def center(K: KernelMatrix) -> KernelMatrix:
    """Double-centred kernel H K H with H = I - 11^T/N (off by default everywhere)."""
    A = K.K
    row = A.mean(axis=0)
    C = A - row[None, :] - row[:, None] + A.mean()
    return KernelMatrix(0.5 * (C + C.T), K.spec)
