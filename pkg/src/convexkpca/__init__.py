"""Convex Kernel PCA and the Semi-KPCA semi-supervised classifier."""

from .kernels import KernelMatrix, KernelSpec, gram, gram_cross, median_bandwidth
from .kpca import classify_regime, kpca_objective, principal_scores
from .semikpca import GammaPolicy, fit, fit_predict_pipeline, heuristic_gamma, predict
from .spectral import deflate, eig_sym, top_k

__all__ = [
    "GammaPolicy",
    "KernelMatrix",
    "KernelSpec",
    "classify_regime",
    "deflate",
    "eig_sym",
    "fit",
    "fit_predict_pipeline",
    "gram",
    "gram_cross",
    "heuristic_gamma",
    "kpca_objective",
    "median_bandwidth",
    "predict",
    "principal_scores",
    "top_k",
]

__version__ = "0.1.0"
