"""Bias-free LS-SVM baselines.

Semi-LSSVM regresses onto y over all N points (target 0 for unlabeled
ones); Subs-LSSVM trains on the labeled subset only and scores the rest
through the cross kernel. Both solve (K + I/gamma) alpha = targets, which
is positive definite for every gamma > 0.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np
from scipy import linalg

from .errors import DimensionMismatch, NoLabels, SolveFailure
from .kernels import KernelMatrix, KernelSpec, as_data, gram, gram_cross, resolve
from .semikpca import as_labels, sign

GRID_SIZE = 40
GRID_DECADES = 3  # grid spans [1e-3, 1e3] * d/N


class LssvmMode(str, enum.Enum):
    SEMI = "SemiZeroTarget"
    SUBS = "LabeledSubset"


@dataclass(frozen=True)
class LssvmModel:
    alpha: np.ndarray
    gamma: float
    mode: LssvmMode
    decision_values: np.ndarray = field(repr=False)  # over all N points
    support: np.ndarray = field(repr=False)  # indices the alpha entries refer to


def _solve(K: np.ndarray, targets: np.ndarray, gamma: float) -> np.ndarray:
    if not gamma > 0:
        raise ValueError(f"gamma must be positive, got {gamma}")
    M = np.array(K, dtype=float, copy=True)
    M[np.diag_indices(M.shape[0])] += 1.0 / gamma
    try:
        return linalg.cho_solve(linalg.cho_factor(M, lower=True, check_finite=False), targets)
    except linalg.LinAlgError as exc:
        raise SolveFailure(f"Cholesky of K + I/gamma failed at gamma={gamma:.6g}") from exc


def _kernel(K) -> np.ndarray:
    return K.K if isinstance(K, KernelMatrix) else np.asarray(K, dtype=float)


def fit_semi_lssvm_many(K, Y, gamma: float) -> tuple[np.ndarray, np.ndarray]:
    """Semi-LSSVM for every column of Y with one factorisation; returns (A, K @ A)."""
    A = _kernel(K)
    Y = np.asarray(Y, dtype=float)
    if Y.shape[0] != A.shape[0]:
        raise DimensionMismatch(f"{A.shape[0]} points but {Y.shape[0]} labels")
    alpha = _solve(A, Y, gamma)
    return alpha, A @ alpha


def fit_semi_lssvm(K, y, gamma: float) -> LssvmModel:
    A = _kernel(K)
    y = as_labels(y)
    if y.shape[0] != A.shape[0]:
        raise DimensionMismatch(f"{A.shape[0]} points but {y.shape[0]} labels")
    alpha = _solve(A, y, gamma)
    return LssvmModel(alpha, float(gamma), LssvmMode.SEMI, A @ alpha, np.arange(A.shape[0]))


def fit_subs_lssvm(data, y, spec: KernelSpec | None, gamma: float) -> LssvmModel:
    """LS-SVM on the labeled points; the bandwidth comes from the full dataset."""
    X = as_data(data)
    y = as_labels(y)
    if y.shape[0] != X.shape[0]:
        raise DimensionMismatch(f"{X.shape[0]} points but {y.shape[0]} labels")
    labeled = np.flatnonzero(y)
    if labeled.size == 0:
        raise NoLabels("Subs-LSSVM needs at least one labeled point")
    spec = resolve(spec or KernelSpec(), X)
    K_LL = gram(X[labeled], spec).K
    alpha = _solve(K_LL, y[labeled], gamma)
    cross = gram_cross(X[labeled], X, spec)
    return LssvmModel(alpha, float(gamma), LssvmMode.SUBS, cross @ alpha, labeled)


def fit_subs_lssvm_kernel(K, y, gamma: float) -> LssvmModel:
    """Subs-LSSVM from a precomputed full Gram matrix (same model, no re-evaluation)."""
    A = _kernel(K)
    y = as_labels(y)
    labeled = np.flatnonzero(y)
    if labeled.size == 0:
        raise NoLabels("Subs-LSSVM needs at least one labeled point")
    alpha = _solve(A[np.ix_(labeled, labeled)], y[labeled], gamma)
    return LssvmModel(alpha, float(gamma), LssvmMode.SUBS, A[:, labeled] @ alpha, labeled)


def predict(model: LssvmModel) -> np.ndarray:
    return sign(model.decision_values)


def fixed_gamma_rule(mode: LssvmMode | str, d: int, n: int) -> float:
    """10 d/N for Semi-LSSVM, 100 d/N for Subs-LSSVM."""
    if d < 1 or n < 1:
        raise ValueError("d and N must be >= 1")
    if not isinstance(mode, LssvmMode):
        mode = {"semi": LssvmMode.SEMI, "subs": LssvmMode.SUBS}.get(str(mode).lower()) or LssvmMode(mode)
    return (10.0 if mode is LssvmMode.SEMI else 100.0) * d / n


def gamma_grid(d: int, n: int, size: int = GRID_SIZE) -> np.ndarray:
    base = d / n
    if size == 1:
        return np.array([base])
    return np.geomspace(base * 10.0**-GRID_DECADES, base * 10.0**GRID_DECADES, size)
