"""Planted-instance generation: orthonormal factors, uniform weights, and
symmetric noise under three entry distributions.

Noise entries are drawn i.i.d. only at sorted multi-indices
(i_1 <= ... <= i_k), one of gaussian N(0, sigma^2), bernoulli +/- sigma,
or sigma times a Student t with 5 degrees of freedom; every permuted
position receives an exact copy, so symmetry holds bit-for-bit. The t
draws are not variance-normalized: sigma scales the raw t(5) variate,
whose variance is 5/3, so the entry variance is 5/3 * sigma^2.

Reproducibility contract: each instance seed is split into named
sub-seeds (weights+factors, noise, spectral-norm probe, method RNG) via
numpy's SeedSequence, so any part can be regenerated in isolation.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations_with_replacement
from typing import NamedTuple

import numpy as np

from .tensor import SymmetricTensor, rank1_tensor, spectral_norm_lb, symmetrize

NOISE_MODELS = ("gaussian", "bernoulli", "student_t")
FACTOR_MODES = ("canonical", "random_orthonormal")
STUDENT_T_DF = 5

# fixed probe parameters for the generator's noise spectral-norm estimate
_LB_RESTARTS = 8
_LB_ITERS = 100


class SubSeeds(NamedTuple):
    truth: int
    noise: int
    probe: int
    method: int


def derive_subseeds(seed: int) -> SubSeeds:
    """Named 64-bit sub-seeds derived from an instance seed."""
    words = np.random.SeedSequence(seed).generate_state(4, np.uint64)
    return SubSeeds(*(int(w) for w in words))


@dataclass(frozen=True)
class GroundTruth:
    """Planted orthonormal factors (rows) and positive weights."""

    factors: np.ndarray
    weights: np.ndarray

    @property
    def r(self) -> int:
        return self.factors.shape[0]

    @property
    def dim(self) -> int:
        return self.factors.shape[1]


@dataclass(frozen=True)
class NoiseSpec:
    model: str = "gaussian"
    sigma: float = 0.0
    df: int = STUDENT_T_DF

    def __post_init__(self):
        if self.model not in NOISE_MODELS:
            raise ValueError(f"unknown noise model {self.model!r}")
        if self.sigma < 0:
            raise ValueError("sigma must be >= 0")
        if self.model == "student_t" and self.df != STUDENT_T_DF:
            raise ValueError(f"student_t noise is fixed at {STUDENT_T_DF} df")


@dataclass(frozen=True)
class Instance:
    """A noisy planted tensor plus everything needed to score against it."""

    tensor: SymmetricTensor
    truth: GroundTruth
    noise_frob: float
    noise_spectral_lb: float
    seed: int
    subseeds: SubSeeds


def gen_truth(
    d: int, k: int, r: int, factor_mode: str = "canonical", seed: int = 0
) -> GroundTruth:
    """Planted factors and weights; weights are i.i.d. Unif[0.8, 1.2].

    canonical mode uses the first r standard basis vectors; random mode
    orthonormalizes a seeded Gaussian matrix (QR with the usual sign fix,
    so the draw is deterministic).
    """
    if r > d:
        raise ValueError(f"rank r={r} cannot exceed dimension d={d}")
    if r < 1 or k < 2:
        raise ValueError("need r >= 1 and k >= 2")
    if factor_mode not in FACTOR_MODES:
        raise ValueError(f"unknown factor_mode {factor_mode!r}")
    w_ss, f_ss = np.random.SeedSequence(seed).spawn(2)
    weights = np.random.default_rng(w_ss).uniform(0.8, 1.2, size=r)
    if factor_mode == "canonical":
        factors = np.eye(d)[:r]
    else:
        g = np.random.default_rng(f_ss).standard_normal((d, r))
        q, rr = np.linalg.qr(g)
        signs = np.sign(np.diag(rr))
        signs[signs == 0] = 1.0
        factors = (q * signs).T
    return GroundTruth(factors=factors, weights=weights)


def sod_tensor(truth: GroundTruth, k: int) -> SymmetricTensor:
    """The exactly decomposable signal tensor sum_i lambda_i u_i^{(x)k}."""
    d = truth.dim
    acc = np.zeros((d,) * k)
    for lam, u in zip(truth.weights, truth.factors):
        acc += rank1_tensor(lam, u, k).asarray()
    return SymmetricTensor.from_array(acc)


def gen_noise(d: int, k: int, spec: NoiseSpec, seed: int = 0) -> SymmetricTensor:
    """Symmetric noise tensor with entrywise distribution given by spec."""
    combos = np.array(
        list(combinations_with_replacement(range(d), k)), dtype=np.int64
    )
    m = combos.shape[0]
    rng = np.random.default_rng(seed)
    if spec.model == "gaussian":
        draws = rng.standard_normal(m) * spec.sigma
    elif spec.model == "bernoulli":
        draws = np.where(rng.integers(0, 2, size=m) == 1, spec.sigma, -spec.sigma)
    else:  # student_t: normal over sqrt of scaled chi-square, then sigma
        z = rng.standard_normal(m)
        chi2 = rng.chisquare(spec.df, size=m)
        draws = spec.sigma * z / np.sqrt(chi2 / spec.df)
    raw = np.zeros(d**k)
    flat = np.zeros(m, dtype=np.int64)
    for j in range(k - 1, -1, -1):
        flat = flat * d + combos[:, j]
    raw[flat] = draws
    return symmetrize(raw, k, d)


def gen_instance(
    d: int,
    k: int,
    r: int,
    spec: NoiseSpec,
    factor_mode: str = "canonical",
    seed: int = 0,
) -> Instance:
    """Assemble signal plus noise and record the noise diagnostics.

    noise_frob is exact; noise_spectral_lb is the power-iteration lower
    bound on the noise spectral norm with the generator's fixed probe
    parameters. Identical seeds produce identical instances byte for byte.
    """
    sub = derive_subseeds(seed)
    truth = gen_truth(d, k, r, factor_mode=factor_mode, seed=sub.truth)
    noise = gen_noise(d, k, spec, seed=sub.noise)
    tensor = SymmetricTensor(
        order=k, dim=d, data=sod_tensor(truth, k).data + noise.data
    )
    return Instance(
        tensor=tensor,
        truth=truth,
        noise_frob=noise.frobenius_norm(),
        noise_spectral_lb=spectral_norm_lb(
            noise, restarts=_LB_RESTARTS, iters=_LB_ITERS, seed=sub.probe
        ),
        seed=seed,
        subseeds=sub,
    )
