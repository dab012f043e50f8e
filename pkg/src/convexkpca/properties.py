"""Randomised property suites behind ``convexkpca check``.

Each property takes a seeded ``numpy.random.Generator``, builds a small
random instance and raises ``AssertionError`` when the property fails.
Expected values are computed independently of the code path under test
wherever possible (explicit feature maps, full eigendecompositions, the
closed-form spectral solution).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import baselines, kpca, semikpca
from .errors import UnboundedProblem
from .kernels import KernelSpec, gram
from .spectral import covariance_spectrum, deflate, eig_sym, nonzero_eigenvalues, top_k

GAMMA_FACTORS = (0.5, 1 - 1e-8, 1.0, 1.5)
CERT_TOL = 1e-9


def random_data(rng, n_max: int = 30, d_max: int = 5, n_min: int = 5) -> np.ndarray:
    n = int(rng.integers(n_min, n_max + 1))
    d = int(rng.integers(1, d_max + 1))
    return rng.standard_normal((n, d)) * rng.uniform(0.5, 3.0)


def random_gram(rng, n_max: int = 30):
    return gram(random_data(rng, n_max), KernelSpec())


def spectral_solution(Kp_spectrum_values, Kp_spectrum_vectors, y, gamma, k):
    """f = sum_{l>k} lambda_l / (1/gamma - lambda_l) (u_l^T y) u_l."""
    lam = Kp_spectrum_values[k:]
    U = Kp_spectrum_vectors[:, k:]
    return U @ (lam / (1.0 / gamma - lam) * (U.T @ y))


def random_labels(rng, n: int) -> np.ndarray:
    return rng.integers(-1, 2, size=n).astype(float)


# ------------------------------------------------------------------ props


def prop_kernel_covariance_spectrum(rng):
    X = random_data(rng, n_max=30, d_max=6, n_min=2)
    for spec in (KernelSpec("linear"), KernelSpec("polynomial", degree=2, offset=1.0)):
        a = nonzero_eigenvalues(gram(X, spec))
        b = covariance_spectrum(X, spec)
        assert a.shape == b.shape, f"{spec.kind}: {a.size} vs {b.size} nonzero eigenvalues"
        rel = np.max(np.abs(a - b) / np.maximum(np.abs(a), np.abs(b)))
        assert rel <= 1e-8, f"{spec.kind}: relative eigenvalue mismatch {rel:.2e}"


def prop_spectral_reconstruction(rng):
    K = random_gram(rng)
    s = eig_sym(K)
    err = np.max(np.abs(s.reconstruct() - K.K))
    assert err <= 1e-10 * max(1.0, s.values[0]), f"reconstruction error {err:.2e}"
    gram_ = s.vectors.T @ s.vectors
    assert np.max(np.abs(gram_ - np.eye(K.n))) <= 1e-8, "eigenvectors not orthonormal"


def prop_deflation_exactness(rng):
    K = random_gram(rng)
    for k in range(0, min(3, K.n - 1)):
        spec = top_k(K, k)
        Kp = deflate(K, spec).Kp
        lam_max = np.linalg.eigvalsh(Kp)[-1]
        assert abs(lam_max - spec.next_eigenvalue) <= 1e-8, (
            f"k={k}: lambda_max(Kp)={lam_max:.12g} vs lambda_k+1={spec.next_eigenvalue:.12g}"
        )
        for j in range(k):
            u = spec.eigenvectors[:, j]
            assert u @ Kp @ u <= 1e-8, f"k={k}: deflated direction {j} keeps energy"


def prop_kpca_regime_certificate(rng):
    K = random_gram(rng, n_max=50)
    for k in range(3):
        lam = top_k(K, k).next_eigenvalue
        for c in GAMMA_FACTORS:
            r = kpca.classify_regime(K, k, c / lam)
            convex = r.certificate >= -CERT_TOL
            assert r.regime.convex == convex, (
                f"k={k} c={c}: regime {r.regime.value} but min-eig(I - gamma Kp)={r.certificate:.3e}"
            )


def prop_kpca_recovery(rng):
    K = random_gram(rng)
    full = eig_sym(K)
    r = int(np.sum(full.values > 1e-10 * full.values[0]))
    for k in range(min(5, r)):
        s = kpca.principal_scores(K, k)
        u = full.vectors[:, k]
        cos = abs(s.scores @ u) / (np.linalg.norm(s.scores) * np.linalg.norm(u))
        assert cos >= 1 - 1e-8, f"component {k + 1}: cosine {cos:.12f}"


def prop_semikpca_guard(rng):
    K = random_gram(rng, n_max=50)
    for k in range(3):
        spec = top_k(K, k)
        D = deflate(K, spec)
        y = random_labels(rng, K.n)
        for c in GAMMA_FACTORS:
            gamma = c / spec.next_eigenvalue
            # strongly convex iff I - gamma Kp is positive definite
            M = np.eye(K.n) - gamma * D.Kp
            strongly_convex = np.linalg.eigvalsh(M)[0] > CERT_TOL
            try:
                semikpca.fit(D, y, gamma)
                fitted = True
            except UnboundedProblem:
                fitted = False
            assert fitted == strongly_convex, (
                f"k={k} c={c}: fit {'accepted' if fitted else 'refused'} gamma, "
                f"strongly convex={strongly_convex}"
            )


def prop_dual_spectral_equivalence(rng):
    K = random_gram(rng, n_max=40)
    k = int(rng.integers(0, 3))
    spec = top_k(K, k)
    D = deflate(K, spec)
    gamma = 0.5 / spec.next_eigenvalue
    y = random_labels(rng, K.n)
    model = semikpca.fit(D, y, gamma)
    full = eig_sym(K)
    f = spectral_solution(np.maximum(full.values, 0), full.vectors, y, gamma, k)
    dev = np.max(np.abs(model.decision_values - f))
    assert dev <= 1e-8, f"k={k}: |Kp alpha - spectral| = {dev:.2e}"


def prop_kkt_consistency(rng):
    K = random_gram(rng, n_max=40)
    k = int(rng.integers(0, 3))
    spec = top_k(K, k)
    gamma = rng.uniform(0.05, 0.95) / spec.next_eigenvalue
    y = random_labels(rng, K.n)
    model = semikpca.fit(deflate(K, spec), y, gamma)
    e = model.alpha / gamma
    res = np.max(np.abs(e - model.decision_values - y))
    assert res <= 1e-8, f"e - f - y residual {res:.2e}"


def prop_reduction_zero_labels(rng):
    K = random_gram(rng)
    k = int(rng.integers(0, 2))
    spec = top_k(K, k)
    model = semikpca.fit(deflate(K, spec), np.zeros(K.n), 0.5 / spec.next_eigenvalue)
    assert np.all(model.alpha == 0), "alpha is not exactly zero"
    assert np.all(semikpca.predict(model) == 1), "tie-break predictions are not all +1"


def prop_baseline_coincidence(rng):
    X = random_data(rng)
    y = np.where(rng.standard_normal(X.shape[0]) >= 0, 1.0, -1.0)
    gamma = float(rng.uniform(0.1, 10.0))
    semi = baselines.fit_semi_lssvm(gram(X), y, gamma)
    subs = baselines.fit_subs_lssvm(X, y, KernelSpec(), gamma)
    dev = np.max(np.abs(semi.decision_values - subs.decision_values))
    assert dev <= 1e-8, f"Semi vs Subs decision values differ by {dev:.2e}"


def prop_permutation_equivariance(rng):
    X = random_data(rng)
    n = X.shape[0]
    y = random_labels(rng, n)
    perm = rng.permutation(n)
    K1, K2 = gram(X), gram(X[perm])
    s1, s2 = top_k(K1, 1), top_k(K2, 1)
    gamma = 0.5 / s1.next_eigenvalue
    m1 = semikpca.fit(deflate(K1, s1), y, gamma)
    m2 = semikpca.fit(deflate(K2, s2), y[perm], gamma)
    assert np.max(np.abs(m1.alpha[perm] - m2.alpha)) <= 1e-8, "alpha not permutation-equivariant"
    l1 = baselines.fit_semi_lssvm(K1, y, 1.0)
    l2 = baselines.fit_semi_lssvm(K2, y[perm], 1.0)
    assert np.max(np.abs(l1.alpha[perm] - l2.alpha)) <= 1e-8, "LS-SVM alpha not permutation-equivariant"


PROPERTIES: dict[str, Callable] = {
    "kernel_covariance_spectrum": prop_kernel_covariance_spectrum,
    "spectral_reconstruction": prop_spectral_reconstruction,
    "deflation_exactness": prop_deflation_exactness,
    "kpca_regime_certificate": prop_kpca_regime_certificate,
    "kpca_recovery": prop_kpca_recovery,
    "semikpca_guard": prop_semikpca_guard,
    "dual_spectral_equivalence": prop_dual_spectral_equivalence,
    "kkt_consistency": prop_kkt_consistency,
    "reduction_zero_labels": prop_reduction_zero_labels,
    "baseline_coincidence": prop_baseline_coincidence,
    "permutation_equivariance": prop_permutation_equivariance,
}


@dataclass
class CheckResult:
    name: str
    runs: int = 0
    failures: list[tuple[int, str]] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.failures


def run_checks(seeds: int = 20, names=None, base_seed: int = 0) -> list[CheckResult]:
    results = []
    for name in names or PROPERTIES:
        prop = PROPERTIES[name]
        res = CheckResult(name)
        for s in range(base_seed, base_seed + seeds):
            res.runs += 1
            try:
                prop(np.random.default_rng(s))
            except Exception as exc:  # any exception is a failed property
                res.failures.append((s, f"{type(exc).__name__}: {exc}"))
        results.append(res)
    return results


def format_checks(results: list[CheckResult]) -> str:
    width = max(len(r.name) for r in results)
    lines = []
    for r in results:
        status = "PASS" if r.passed else "FAIL"
        line = f"{r.name.ljust(width)}  {status}  {r.runs - len(r.failures)}/{r.runs}"
        if r.failures:
            seeds = ", ".join(str(s) for s, _ in r.failures[:10])
            line += f"  failing seeds: {seeds}\n    first: {r.failures[0][1]}"
        lines.append(line)
    return "\n".join(lines) + "\n"
