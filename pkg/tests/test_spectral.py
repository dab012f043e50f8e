import numpy as np
import pytest

from convexkpca.errors import NotExplicitFeatureMap, NotPSD, SourceMismatch
from convexkpca.kernels import KernelSpec, gram
from convexkpca.spectral import covariance_spectrum, deflate, eig_sym, nonzero_eigenvalues, top_k


def random_psd(n, seed, rank=None):
    rng = np.random.default_rng(seed)
    B = rng.standard_normal((n, rank or n))
    return B @ B.T


def test_identity_spectrum():
    s = eig_sym(np.eye(3))
    np.testing.assert_array_equal(s.values, [1.0, 1.0, 1.0])


def test_diagonal_spectrum_and_vectors():
    s = eig_sym(np.diag([3.0, 1.0, 2.0]))
    np.testing.assert_array_equal(s.values, [3.0, 2.0, 1.0])
    np.testing.assert_array_equal(s.vectors, np.eye(3)[:, [0, 2, 1]])


def test_random_symmetric_reconstruction():
    rng = np.random.default_rng(3)
    A = rng.standard_normal((6, 6))
    A = A + A.T
    s = eig_sym(A)
    np.testing.assert_allclose(s.reconstruct(), A, rtol=0, atol=1e-10)
    assert np.all(np.diff(s.values) <= 0)
    np.testing.assert_allclose(np.linalg.norm(s.vectors, axis=0), 1.0, atol=1e-12)


def test_sign_convention():
    rng = np.random.default_rng(12)
    A = random_psd(7, 12)
    V = eig_sym(A).vectors
    for j in range(V.shape[1]):
        i = np.argmax(np.abs(V[:, j]))
        assert V[i, j] > 0


def test_deterministic_vectors():
    A = gram(np.random.default_rng(1).standard_normal((20, 3))).K
    assert np.array_equal(eig_sym(A).vectors, eig_sym(A.copy()).vectors)


def test_top_k_zero():
    K = np.diag([5.0, 2.0, 1.0])
    s = top_k(K, 0)
    assert s.k == 0 and s.eigenvalues.size == 0 and s.eigenvectors.shape == (3, 0)
    assert s.next_eigenvalue == 5.0


def test_top_k_one_diag():
    s = top_k(np.diag([5.0, 2.0, 1.0]), 1)
    assert s.eigenvalues[0] == 5.0
    np.testing.assert_array_equal(s.eigenvectors[:, 0], [1.0, 0.0, 0.0])
    assert s.next_eigenvalue == 2.0


def test_top_k_agrees_with_full():
    K = gram(np.random.default_rng(9).standard_normal((10, 2)))
    full = eig_sym(K)
    s = top_k(K, 2)
    np.testing.assert_allclose(s.eigenvalues, full.values[:2], rtol=1e-12)
    np.testing.assert_allclose(s.eigenvectors, full.vectors[:, :2], atol=1e-12)
    assert s.next_eigenvalue == pytest.approx(full.values[2], rel=1e-12)


def test_top_k_range():
    with pytest.raises(ValueError):
        top_k(np.eye(3), 3)


def test_top_k_clamps_roundoff_negatives():
    K = random_psd(6, 0, rank=2)  # four eigenvalues are zero up to roundoff
    s = top_k(K, 2)
    assert np.all(s.full.values >= 0)


def test_top_k_rejects_indefinite():
    with pytest.raises(NotPSD):
        top_k(np.diag([1.0, -0.5]), 0)


def test_deflate_k0_is_identity_op():
    K = random_psd(5, 2)
    np.testing.assert_array_equal(deflate(K, top_k(K, 0)).Kp, K)


def test_deflate_rank_one_vanishes():
    u = np.random.default_rng(4).standard_normal(6)
    u /= np.linalg.norm(u)
    K = 3.0 * np.outer(u, u)
    Kp = deflate(K, top_k(K, 1)).Kp
    assert np.max(np.abs(Kp)) < 1e-10


def test_deflate_spectrum_shift():
    K = random_psd(8, 11)
    full = np.sort(np.linalg.eigvalsh(K))[::-1]
    Kp = deflate(K, top_k(K, 2)).Kp
    got = np.sort(np.linalg.eigvalsh(Kp))[::-1]
    expected = np.sort(np.concatenate([full[2:], [0.0, 0.0]]))[::-1]
    np.testing.assert_allclose(got, expected, atol=1e-8)


def test_deflated_directions_have_no_energy():
    K = gram(np.random.default_rng(6).standard_normal((15, 3)))
    s = top_k(K, 3)
    d = deflate(K, s)
    assert np.array_equal(d.Kp, d.Kp.T)
    for j in range(3):
        u = s.eigenvectors[:, j]
        assert u @ d.Kp @ u <= 1e-8
    assert np.linalg.eigvalsh(d.Kp)[-1] == pytest.approx(s.next_eigenvalue, abs=1e-8)


def test_deflate_source_mismatch():
    with pytest.raises(SourceMismatch):
        deflate(np.eye(4), top_k(np.eye(3), 1))


def test_covariance_single_point():
    np.testing.assert_allclose(covariance_spectrum([[2.0, 0.0]], KernelSpec("linear")), [4.0])


def test_covariance_orthogonal_rows():
    np.testing.assert_allclose(covariance_spectrum([[1.0, 0.0], [0.0, 1.0]], KernelSpec("linear")), [1.0, 1.0])


def test_covariance_matches_kernel_spectrum():
    X = np.random.default_rng(0).standard_normal((20, 5))
    spec = KernelSpec("linear")
    a = covariance_spectrum(X, spec)
    b = nonzero_eigenvalues(gram(X, spec))
    assert a.shape == b.shape == (5,)
    np.testing.assert_allclose(a, b, rtol=1e-10)


def test_covariance_gaussian_rejected():
    with pytest.raises(NotExplicitFeatureMap):
        covariance_spectrum(np.zeros((3, 2)), KernelSpec(bandwidth=1.0))
