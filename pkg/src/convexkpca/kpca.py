"""Constrained convex KPCA: regime classification and component extraction.

With the top-k eigendirections projected out, the KPCA objective
``1/2 <w, w> - gamma/2 sum_i <w, phi(x_i)>^2`` is

* bounded with the unique minimiser w = 0 when gamma < 1/lambda_{k+1},
* minimised by the whole line through v_{k+1} when gamma = 1/lambda_{k+1},
* unbounded below when gamma > 1/lambda_{k+1}.

There is no iterative optimiser here: the minimisers are eigenvectors, so
this module exposes the eigendecomposition plus certificates of which
regime a given gamma falls into.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, RankDeficient
from .spectral import Spectrum, deflate, top_k

REGIME_TOL = 1e-9
RANK_TOL = 1e-10


class Regime(str, enum.Enum):
    TRIVIAL_ONLY = "TrivialOnly"
    EIGENCOMPONENT = "EigencomponentSolutions"
    UNBOUNDED = "Unbounded"

    @property
    def convex(self) -> bool:
        return self is not Regime.UNBOUNDED


@dataclass(frozen=True)
class KpcaRegime:
    k: int
    gamma: float
    critical_gamma: float
    regime: Regime
    certificate: float  # min eigenvalue of I - gamma * Kp


@dataclass(frozen=True)
class ComponentScores:
    component_index: int
    eigenvalue: float
    scores: np.ndarray


def classify_regime(K, k: int, gamma: float, full: Spectrum | None = None) -> KpcaRegime:
    if not gamma > 0:
        raise ValueError(f"gamma must be positive, got {gamma}")
    spec = top_k(K, k, full=full)
    lam = spec.next_eigenvalue
    critical = 1.0 / lam if lam > 0 else np.inf
    if np.isinf(critical) or gamma < critical * (1 - REGIME_TOL):
        regime = Regime.TRIVIAL_ONLY
    elif abs(gamma - critical) <= REGIME_TOL * critical:
        regime = Regime.EIGENCOMPONENT
    else:
        regime = Regime.UNBOUNDED
    Kp = deflate(K, spec).Kp
    M = np.eye(Kp.shape[0]) - gamma * Kp
    certificate = float(np.linalg.eigvalsh(0.5 * (M + M.T))[0])
    return KpcaRegime(k, float(gamma), float(critical), regime, certificate)


def principal_scores(K, k: int, full: Spectrum | None = None) -> ComponentScores:
    """Unit-norm sample scores of the (k+1)-th kernel principal component.

    At gamma = 1/lambda_{k+1} every minimiser has e_i proportional to these.
    """
    spec = top_k(K, k, full=full)
    lam = spec.next_eigenvalue
    if lam <= RANK_TOL * spec.lambda_max or lam <= 0:
        raise RankDeficient(f"lambda_{k + 1} = {lam:.3e} is numerically zero")
    u = spec.full.vectors[:, k].copy()
    return ComponentScores(k + 1, lam, u / np.linalg.norm(u))


def kpca_objective(K, alpha, gamma: float, k: int, full: Spectrum | None = None) -> float:
    """Objective value at w = (I - Pi_k) sum_j alpha_j phi(x_j), in dual form:
    1/2 a^T Kp a - gamma/2 a^T Kp^2 a.
    """
    a = np.asarray(alpha, dtype=float)
    Kp = deflate(K, top_k(K, k, full=full)).Kp
    if a.shape != (Kp.shape[0],):
        raise DimensionMismatch(f"alpha has shape {a.shape}, expected ({Kp.shape[0]},)")
    f = Kp @ a
    return float(0.5 * a @ f - 0.5 * gamma * f @ f)
