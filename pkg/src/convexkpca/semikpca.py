"""Semi-KPCA: semi-supervised classification on a deflated kernel.

Given labels y in {-1, 0, +1} (0 = unlabeled), the classifier solves

    (I / gamma - Kp) alpha = y,    Kp = K - sum_{l <= k} lambda_l u_l u_l^T,

and predicts sign(Kp alpha) on the same N points. The system is positive
definite exactly when gamma < 1/lambda_{k+1}; past that limit the primal
objective is unbounded and fitting refuses to proceed.
"""

from __future__ import annotations

import contextlib
import logging
import warnings
from dataclasses import dataclass, field
from typing import Literal

import numpy as np
from scipy import linalg

from .errors import ConvexKpcaError, DimensionMismatch, RankDeficient, SolveFailure, UnboundedProblem
from .kernels import KernelSpec, gram
from .spectral import DeflatedKernel, SpectrumTopK, deflate, top_k

log = logging.getLogger(__name__)

GUARD_TOL = 1e-12
RANK_TOL = 1e-12
GAMMA_FLOOR = 1e-3  # lower end of gamma ranges, in units of 1/lambda_1
UPPER_SHRINK = 1e-6  # keep grid/heuristic gammas strictly inside the interval
GRID_SIZE = 40


def as_labels(y) -> np.ndarray:
    y = np.asarray(y)
    if y.ndim != 1:
        raise DimensionMismatch(f"labels must be a vector, got shape {y.shape}")
    yf = y.astype(float)
    if not np.all(np.isin(yf, (-1.0, 0.0, 1.0))):
        raise ValueError("labels must take values in {-1, 0, +1}")
    return yf


def sign(values: np.ndarray) -> np.ndarray:
    """Entrywise sign with sign(0) = +1."""
    return np.where(np.asarray(values) >= 0, 1, -1)


def accuracy(pred, truth, where=None) -> float:
    """Percentage of matching entries, optionally restricted to a mask."""
    pred = np.asarray(pred)
    truth = np.asarray(truth)
    if where is not None:
        pred, truth = pred[where], truth[where]
    if truth.size == 0:
        return float("nan")
    return 100.0 * float(np.mean(pred == truth))


@dataclass(frozen=True)
class SemiKpcaModel:
    alpha: np.ndarray
    gamma: float
    k: int
    deflated: DeflatedKernel = field(repr=False)
    decision_values: np.ndarray = field(repr=False)


def convex_interval(spec: SpectrumTopK) -> tuple[float, float]:
    """The open interval (0, 1/lambda_{k+1}) on which Semi-KPCA is strongly convex."""
    lam = spec.next_eigenvalue
    if lam <= 0 or lam <= RANK_TOL * spec.lambda_max:
        raise RankDeficient(f"lambda_{spec.k + 1} = {lam:.3e} is numerically zero")
    return 0.0, 1.0 / lam


def check_gamma(spec: SpectrumTopK, gamma: float) -> None:
    if not gamma > 0:
        raise ValueError(f"gamma must be positive, got {gamma}")
    lam = spec.next_eigenvalue
    if lam > 0 and gamma >= (1.0 / lam) * (1 - GUARD_TOL):
        raise UnboundedProblem(
            f"gamma={gamma:.6g} >= 1/lambda_{spec.k + 1}={1.0 / lam:.6g}: unbounded problem"
        )


def fit_many(deflated: DeflatedKernel, Y, gamma: float) -> tuple[np.ndarray, np.ndarray]:
    """Solve (I/gamma - Kp) A = Y for every column of Y with one factorisation.

    Returns (A, Kp @ A).
    """
    check_gamma(deflated.spectrum, gamma)
    Y = np.asarray(Y, dtype=float)
    n = deflated.n
    if Y.shape[0] != n:
        raise DimensionMismatch(f"labels have length {Y.shape[0]}, kernel has N={n}")
    M = -deflated.Kp
    M[np.diag_indices(n)] += 1.0 / gamma
    try:
        factor = linalg.cho_factor(M, lower=True, check_finite=False)
    except linalg.LinAlgError as exc:
        raise SolveFailure(f"Cholesky of I/gamma - Kp failed at gamma={gamma:.6g}") from exc
    A = linalg.cho_solve(factor, Y, check_finite=False)
    return A, deflated.Kp @ A


def fit(deflated: DeflatedKernel, y, gamma: float) -> SemiKpcaModel:
    y = as_labels(y)
    alpha, f = fit_many(deflated, y, gamma)
    return SemiKpcaModel(alpha, float(gamma), deflated.k, deflated, f)


def predict(model: SemiKpcaModel) -> np.ndarray:
    return sign(model.decision_values)


def heuristic_gamma(spec: SpectrumTopK, k: int | None = None) -> float:
    """Log-scale midpoint of the convexity interval.

    For k >= 1 the interval is (1/lambda_1, 1/lambda_{k+1}); for k = 0 the
    lower end is the floor 1e-3/lambda_1.
    """
    if k is not None and k != spec.k:
        raise ValueError(f"spectrum was computed for k={spec.k}, got k={k}")
    _, upper = convex_interval(spec)
    lam1 = spec.lambda_max
    lower = GAMMA_FLOOR / lam1 if spec.k == 0 else 1.0 / lam1
    gamma = float(np.sqrt(lower * upper))
    if gamma >= upper * (1 - GUARD_TOL):
        warnings.warn(
            f"lambda_1 == lambda_{spec.k + 1}: convexity interval collapses, "
            "heuristic gamma shrunk below the limit",
            RuntimeWarning,
            stacklevel=2,
        )
        gamma = upper * (1 - UPPER_SHRINK)
    return gamma


def gamma_grid(spec: SpectrumTopK, size: int = GRID_SIZE) -> np.ndarray:
    """Log-spaced gammas from 1e-3/lambda_1 to just below 1/lambda_{k+1}."""
    _, upper = convex_interval(spec)
    lo = GAMMA_FLOOR / spec.lambda_max
    hi = upper * (1 - UPPER_SHRINK)
    if size == 1:
        return np.array([hi])
    return np.geomspace(lo, hi, size)


@dataclass(frozen=True)
class GammaPolicy:
    kind: Literal["fixed", "heuristic", "best"] = "heuristic"
    value: float | None = None
    grid_size: int = GRID_SIZE

    def __post_init__(self):
        if self.kind not in ("fixed", "heuristic", "best"):
            raise ValueError(f"unknown gamma policy {self.kind!r}")
        if self.kind == "fixed" and not (self.value is not None and self.value > 0):
            raise ValueError("fixed gamma policy needs a positive value")
        if self.grid_size < 1:
            raise ValueError("grid_size must be >= 1")


@dataclass
class PipelineResult:
    predictions: np.ndarray
    gamma: float
    model: SemiKpcaModel
    diagnostics: dict


@contextlib.contextmanager
def _stage(name: str):
    try:
        yield
    except ConvexKpcaError as exc:
        exc.stage = name
        if exc.args and isinstance(exc.args[0], str):
            exc.args = (f"[{name}] {exc.args[0]}",) + exc.args[1:]
        raise


def fit_predict_pipeline(
    data,
    y,
    spec: KernelSpec | None = None,
    k: int = 1,
    policy: GammaPolicy | None = None,
    truth=None,
) -> PipelineResult:
    """gram -> top_k -> guard -> deflate -> fit -> predict.

    ``policy.kind == "best"`` picks the grid gamma with the highest accuracy
    on the unlabeled points against ``truth``; this peeks at test labels and
    is only meaningful as an oracle upper bound.
    """
    policy = policy or GammaPolicy()
    with _stage("labels"):
        y = as_labels(y)
    with _stage("gram"):
        K = gram(data, spec)
        if K.n != y.shape[0]:
            raise DimensionMismatch(f"{K.n} points but {y.shape[0]} labels")
    with _stage("top_k"):
        spectrum = top_k(K, k)
    with _stage("gamma"):
        if policy.kind == "fixed":
            gammas = np.array([policy.value])
        elif policy.kind == "heuristic":
            gammas = np.array([heuristic_gamma(spectrum)])
        else:
            if truth is None:
                raise ValueError("best-gamma policy needs ground-truth labels")
            gammas = gamma_grid(spectrum, policy.grid_size)
        for g in gammas:
            check_gamma(spectrum, g)
    with _stage("deflate"):
        deflated = deflate(K, spectrum)

    unlabeled = y == 0
    best = None
    scores = []
    for g in gammas:
        with _stage("fit"):
            model = fit(deflated, y, g)
        pred = predict(model)
        acc = accuracy(pred, truth, unlabeled) if truth is not None else float("nan")
        scores.append(acc)
        # first grid point wins ties
        if best is None or acc > best[0]:
            best = (acc, model, pred)
    acc, model, pred = best
    diagnostics = {
        "bandwidth": K.spec.bandwidth,
        "lambda_1": spectrum.lambda_max,
        "lambda_next": spectrum.next_eigenvalue,
        "gamma_upper": 1.0 / spectrum.next_eigenvalue if spectrum.next_eigenvalue > 0 else np.inf,
        "grid": gammas,
        "grid_accuracy": np.array(scores),
        "accuracy": acc,
    }
    log.debug("semikpca k=%d gamma=%.4g acc=%.2f", k, model.gamma, acc)
    return PipelineResult(pred, model.gamma, model, diagnostics)
