"""Planted instance generation: truth, noise models, reproducibility."""

from itertools import combinations_with_replacement

import numpy as np
import pytest

from orthotensor import (
    NoiseSpec,
    derive_subseeds,
    gen_instance,
    gen_noise,
    gen_truth,
    sod_tensor,
)


def test_gen_truth_canonical():
    truth = gen_truth(5, 3, 2, factor_mode="canonical", seed=0)
    np.testing.assert_array_equal(truth.factors, np.eye(5)[:2])
    assert np.all((0.8 <= truth.weights) & (truth.weights <= 1.2))


def test_gen_truth_full_rank_random_orthonormal():
    truth = gen_truth(6, 3, 6, factor_mode="random_orthonormal", seed=1)
    gram = truth.factors @ truth.factors.T
    np.testing.assert_allclose(gram, np.eye(6), atol=1e-12)


def test_gen_truth_deterministic():
    a = gen_truth(7, 4, 3, factor_mode="random_orthonormal", seed=9)
    b = gen_truth(7, 4, 3, factor_mode="random_orthonormal", seed=9)
    np.testing.assert_array_equal(a.factors, b.factors)
    np.testing.assert_array_equal(a.weights, b.weights)


def test_gen_truth_rejects_r_above_d():
    with pytest.raises(ValueError):
        gen_truth(3, 3, 4)


def test_gen_noise_zero_sigma():
    t = gen_noise(4, 3, NoiseSpec("gaussian", 0.0), seed=0)
    assert not t.data.any()


def test_gen_noise_bernoulli_support():
    sigma = 0.3
    t = gen_noise(4, 3, NoiseSpec("bernoulli", sigma), seed=1)
    vals = np.unique(np.abs(t.data))
    np.testing.assert_array_equal(vals, [sigma])


def test_gen_noise_symmetry_bit_exact():
    t = gen_noise(4, 3, NoiseSpec("student_t", 0.5), seed=2)
    arr = t.asarray()
    rng = np.random.default_rng(3)
    for _ in range(200):
        idx = tuple(rng.integers(0, 4, size=3))
        perm = tuple(idx[p] for p in rng.permutation(3))
        assert arr[idx] == arr[perm]


def test_gen_noise_gaussian_moments():
    d, k, sigma = 10, 3, 1.0
    t = gen_noise(d, k, NoiseSpec("gaussian", sigma), seed=4)
    arr = t.asarray()
    samples = np.array(
        [arr[idx] for idx in combinations_with_replacement(range(d), k)]
    )
    m = samples.size
    assert abs(samples.mean()) < 4 / np.sqrt(m)
    assert abs(samples.var() - sigma**2) < 0.1 * sigma**2


def test_gen_noise_deterministic():
    a = gen_noise(5, 3, NoiseSpec("gaussian", 0.1), seed=5)
    b = gen_noise(5, 3, NoiseSpec("gaussian", 0.1), seed=5)
    np.testing.assert_array_equal(a.data, b.data)


def test_instance_reconstructs_from_parts():
    spec = NoiseSpec("gaussian", 1e-2)
    inst = gen_instance(6, 3, 3, spec, factor_mode="random_orthonormal", seed=11)
    signal = sod_tensor(inst.truth, 3)
    noise = gen_noise(6, 3, spec, seed=inst.subseeds.noise)
    recon = signal.data + noise.data
    np.testing.assert_allclose(inst.tensor.data, recon, atol=1e-12)
    assert inst.noise_frob == pytest.approx(noise.frobenius_norm(), rel=1e-12)


def test_instance_bytes_reproducible():
    spec = NoiseSpec("bernoulli", 5e-3)
    a = gen_instance(5, 4, 2, spec, seed=12)
    b = gen_instance(5, 4, 2, spec, seed=12)
    np.testing.assert_array_equal(a.tensor.data, b.tensor.data)
    assert a.noise_spectral_lb == b.noise_spectral_lb


def test_noiseless_instance_is_exactly_decomposable():
    import orthotensor as ot

    inst = gen_instance(8, 3, 3, NoiseSpec("gaussian", 0.0), seed=13)
    ests = ot.decompose(inst.tensor, 3)
    assert ot.match_and_score(ests, inst.truth).max_loss < 1e-8


def test_subseed_derivation_stable():
    assert derive_subseeds(42) == derive_subseeds(42)
    assert derive_subseeds(42) != derive_subseeds(43)


def test_noise_spec_validation():
    with pytest.raises(ValueError):
        NoiseSpec("cauchy", 0.1)
    with pytest.raises(ValueError):
        NoiseSpec("gaussian", -0.1)
    with pytest.raises(ValueError):
        NoiseSpec("student_t", 0.1, df=3)
