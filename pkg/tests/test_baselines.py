import numpy as np
import pytest

from convexkpca.baselines import (
    LssvmMode,
    fit_semi_lssvm,
    fit_semi_lssvm_many,
    fit_subs_lssvm,
    fit_subs_lssvm_kernel,
    fixed_gamma_rule,
    gamma_grid,
    predict,
)
from convexkpca.errors import NoLabels
from convexkpca.kernels import KernelSpec, gram


def test_identity_hand_solve():
    m = fit_semi_lssvm(np.eye(2), [1, 0], 1.0)
    np.testing.assert_allclose(m.alpha, [0.5, 0.0], rtol=0, atol=1e-15)
    np.testing.assert_allclose(m.decision_values, [0.5, 0.0], rtol=0, atol=1e-15)
    np.testing.assert_array_equal(predict(m), [1, 1])
    assert m.mode is LssvmMode.SEMI


def test_zero_labels():
    K = gram(np.random.default_rng(0).standard_normal((6, 2)))
    assert np.all(fit_semi_lssvm(K, np.zeros(6), 3.0).alpha == 0)


def test_residual():
    K = gram(np.random.default_rng(1).standard_normal((12, 3)))
    y = np.random.default_rng(2).integers(-1, 2, 12).astype(float)
    g = 2.5
    m = fit_semi_lssvm(K, y, g)
    res = np.linalg.norm((K.K + np.eye(12) / g) @ m.alpha - y)
    assert res <= 1e-8 * np.linalg.norm(y)


@pytest.mark.parametrize("gamma", [1e-6, 1e-2, 1.0, 1e4])
def test_semi_never_unbounded(gamma):
    K = gram(np.random.default_rng(3).standard_normal((10, 2)))
    fit_semi_lssvm(K, np.ones(10), gamma)


def test_single_labeled_point_spreads_its_label():
    X = np.random.default_rng(4).standard_normal((9, 2))
    y = np.zeros(9)
    y[4] = -1
    m = fit_subs_lssvm(X, y, KernelSpec(), 1.0)
    assert m.alpha.shape == (1,) and m.alpha[0] < 0
    np.testing.assert_array_equal(predict(m), -np.ones(9))
    np.testing.assert_array_equal(m.support, [4])


def test_subs_matches_hand_assembled_system():
    X = np.random.default_rng(5).standard_normal((10, 3))
    y = np.array([1, 0, 0, -1, 0, 1, 0, 0, -1, 0])
    spec = KernelSpec()
    K = gram(X, spec).K  # full-data bandwidth
    L = np.flatnonzero(y)
    alpha = np.linalg.solve(K[np.ix_(L, L)] + np.eye(L.size) / 0.7, y[L])
    m = fit_subs_lssvm(X, y, spec, 0.7)
    np.testing.assert_allclose(m.alpha, alpha, atol=1e-12)
    np.testing.assert_allclose(m.decision_values, K[:, L] @ alpha, atol=1e-12)
    k = fit_subs_lssvm_kernel(K, y, 0.7)
    np.testing.assert_allclose(k.decision_values, m.decision_values, atol=1e-12)


def test_subs_needs_labels():
    with pytest.raises(NoLabels):
        fit_subs_lssvm(np.eye(3), np.zeros(3), KernelSpec(), 1.0)
    with pytest.raises(NoLabels):
        fit_subs_lssvm_kernel(np.eye(3), np.zeros(3), 1.0)


def test_all_labeled_coincide():
    X = np.random.default_rng(6).standard_normal((20, 2))
    y = np.where(np.random.default_rng(7).standard_normal(20) > 0, 1, -1)
    a = fit_semi_lssvm(gram(X), y, 4.0)
    b = fit_subs_lssvm(X, y, KernelSpec(), 4.0)
    np.testing.assert_allclose(a.decision_values, b.decision_values, atol=1e-8)
    np.testing.assert_array_equal(predict(a), predict(b))


def test_many_columns_match_single():
    K = gram(np.random.default_rng(8).standard_normal((15, 2)))
    Y = np.random.default_rng(9).integers(-1, 2, (15, 4)).astype(float)
    A, F = fit_semi_lssvm_many(K, Y, 0.3)
    for j in range(4):
        np.testing.assert_allclose(F[:, j], fit_semi_lssvm(K, Y[:, j], 0.3).decision_values, atol=1e-12)


def test_fixed_rule():
    assert fixed_gamma_rule("semi", 2, 400) == pytest.approx(0.05)
    assert fixed_gamma_rule(LssvmMode.SUBS, 14, 690) == pytest.approx(2.029, abs=5e-4)
    assert fixed_gamma_rule("semi", 7, 7) == 10.0
    with pytest.raises(ValueError):
        fixed_gamma_rule("semi", 0, 5)


def test_grid_span():
    g = gamma_grid(2, 400)
    assert g.size == 40
    assert g[0] == pytest.approx(5e-6) and g[-1] == pytest.approx(5.0)
    assert gamma_grid(2, 400, 1).tolist() == [0.005]


def test_nonpositive_gamma():
    with pytest.raises(ValueError):
        fit_semi_lssvm(np.eye(2), [1, 0], -1.0)
