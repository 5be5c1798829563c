"""Truncated SVD, dominant eigenpairs, orthonormalization."""

import numpy as np
import pytest

from orthotensor import orthonormalize, top_eig_abs, truncated_left_svd


def test_rank1_left_vector_recovered():
    u = np.array([1.0, 2.0, 2.0])
    v2 = np.multiply.outer(u, u).reshape(-1) / np.dot(u, u)
    v = np.array([3.0, 0.0, 4.0, 0.0])
    a = np.outer(v2, v)
    res = truncated_left_svd(a, 1)
    assert res.singular_values[0] == pytest.approx(np.linalg.norm(v), rel=1e-12)
    assert abs(np.dot(res.left_vectors[0], v2)) == pytest.approx(1.0, abs=1e-10)
    assert res.gap_next == pytest.approx(0.0, abs=1e-10)


def test_zero_matrix():
    res = truncated_left_svd(np.zeros((4, 6)), 1)
    assert res.singular_values[0] == 0.0
    assert res.gap_next == 0.0
    assert np.linalg.norm(res.left_vectors[0]) == pytest.approx(1.0, abs=1e-12)


@pytest.mark.parametrize("method", ["direct", "gram"])
def test_matches_full_svd_oracle(method):
    rng = np.random.default_rng(0)
    a = rng.standard_normal((9, 27))
    res = truncated_left_svd(a, 3, method=method)
    s_full = np.linalg.svd(a, compute_uv=False)
    np.testing.assert_allclose(res.singular_values, s_full[:3], rtol=1e-9)
    assert res.gap_next == pytest.approx(s_full[3], rel=1e-9)
    # left vectors orthonormal
    gram = res.left_vectors @ res.left_vectors.T
    np.testing.assert_allclose(gram, np.eye(3), atol=1e-10)


def test_reconstruction_with_right_vectors():
    rng = np.random.default_rng(1)
    a = rng.standard_normal((6, 8))
    res = truncated_left_svd(a, 6, method="direct")
    recon = (res.left_vectors.T * res.singular_values) @ res.right_vectors
    np.testing.assert_allclose(recon, a, rtol=1e-9, atol=1e-9)


def test_gram_route_reconstruction():
    rng = np.random.default_rng(2)
    a = rng.standard_normal((5, 40))
    res = truncated_left_svd(a, 5, method="gram")
    recon = (res.left_vectors.T * res.singular_values) @ res.right_vectors
    np.testing.assert_allclose(recon, a, rtol=1e-8, atol=1e-8)


def test_weyl_stability_under_perturbation():
    rng = np.random.default_rng(3)
    for trial in range(10):
        a = rng.standard_normal((6, 10))
        e = rng.standard_normal((6, 10)) * 0.01
        s_a = truncated_left_svd(a, 6).singular_values
        s_ae = truncated_left_svd(a + e, 6).singular_values
        shift = np.abs(s_a - s_ae)
        assert np.all(shift <= np.linalg.norm(e, 2) + 1e-12)


def test_invalid_rank_and_nonfinite():
    a = np.ones((3, 4))
    with pytest.raises(ValueError):
        truncated_left_svd(a, 0)
    with pytest.raises(ValueError):
        truncated_left_svd(a, 4)
    a_bad = a.copy()
    a_bad[0, 0] = np.nan
    with pytest.raises(FloatingPointError):
        truncated_left_svd(a_bad, 1)


def test_top_eig_abs_diagonal():
    pair = top_eig_abs(np.diag([3.0, -5.0]))
    assert pair.value == pytest.approx(-5.0, abs=1e-12)
    np.testing.assert_allclose(pair.vector, [0.0, 1.0], atol=1e-12)


def test_top_eig_abs_projector():
    u = np.array([2.0, -1.0, 2.0]) / 3.0
    pair = top_eig_abs(np.outer(u, u))
    assert pair.value == pytest.approx(1.0, abs=1e-12)
    assert abs(np.dot(pair.vector, u)) == pytest.approx(1.0, abs=1e-12)
    # sign canonicalization: first nonzero coordinate positive
    assert pair.vector[0] > 0


def test_top_eig_abs_full_decomposition_oracle():
    rng = np.random.default_rng(4)
    m = rng.standard_normal((6, 6))
    m = m + m.T
    pair = top_eig_abs(m)
    w, v = np.linalg.eigh(m)
    i = np.argmax(np.abs(w))
    assert pair.value == pytest.approx(w[i], rel=1e-10)
    assert abs(np.dot(pair.vector, v[:, i])) == pytest.approx(1.0, abs=1e-10)


def test_top_eig_abs_rayleigh_bound():
    rng = np.random.default_rng(5)
    m = rng.standard_normal((7, 7))
    m = m + m.T
    pair = top_eig_abs(m)
    for _ in range(100):
        x = rng.standard_normal(7)
        x /= np.linalg.norm(x)
        assert abs(pair.value) >= abs(x @ m @ x) - 1e-10


def test_orthonormalize_duplicate_collapse():
    e1 = np.array([1.0, 0.0, 0.0])
    out = orthonormalize([e1, e1])
    assert len(out) == 1
    np.testing.assert_allclose(out[0], e1, atol=1e-12)


def test_orthonormalize_idempotent_on_orthonormal_input():
    rng = np.random.default_rng(6)
    q, _ = np.linalg.qr(rng.standard_normal((5, 3)))
    out = orthonormalize(list(q.T))
    assert len(out) == 3
    for a, b in zip(out, q.T):
        np.testing.assert_allclose(a, b, atol=1e-12)


def test_orthonormalize_gram_and_span_oracle():
    v1 = np.array([1.0, 1.0, 0.0])
    v2 = np.array([1.0, 0.0, 0.0])
    out = orthonormalize([v1, v2])
    assert len(out) == 2
    basis = np.array(out)
    np.testing.assert_allclose(basis @ basis.T, np.eye(2), atol=1e-12)
    # original vectors lie in the span
    for v in (v1, v2):
        proj = basis.T @ (basis @ v)
        np.testing.assert_allclose(proj, v, atol=1e-12)


def test_orthonormalize_empty():
    assert orthonormalize([]) == []
