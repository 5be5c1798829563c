"""Scoring recovered factors against planted truth.

The vector loss is sign-invariant (min over the two sign choices), and
estimates are matched to truth factors by optimal assignment on absolute
inner products rather than greedily: the error bounds quantify over the
existence of a permutation, so scoring must find the best one.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment

from .pursuit import FactorEstimate
from .synth import GroundTruth
from .tensor import SymmetricTensor, spectral_norm_lb, subtract_rank1

UNIT_TOL = 1e-9

# fixed probe parameters for the residual spectral-norm estimate
_LB_RESTARTS = 8
_LB_ITERS = 100
_LB_SEED = 0


@dataclass(frozen=True)
class MatchResult:
    permutation: np.ndarray
    per_factor_loss: np.ndarray
    avg_loss: float
    lambda_losses: np.ndarray
    count_mismatch: bool = False

    @property
    def max_loss(self) -> float:
        return float(np.max(self.per_factor_loss))


def loss_vec(a: np.ndarray, b: np.ndarray) -> float:
    """min(|a - b|, |a + b|) for unit vectors; 0 iff a = +/- b."""
    a = np.asarray(a, dtype=np.float64).reshape(-1)
    b = np.asarray(b, dtype=np.float64).reshape(-1)
    if abs(np.linalg.norm(a) - 1.0) > UNIT_TOL or abs(np.linalg.norm(b) - 1.0) > UNIT_TOL:
        raise ValueError("loss_vec requires unit vectors")
    return float(min(np.linalg.norm(a - b), np.linalg.norm(a + b)))


def loss_scalar(a: float, b: float) -> float:
    return float(min(abs(a - b), abs(a + b)))


def match_and_score(
    estimates: list[FactorEstimate], truth: GroundTruth
) -> MatchResult:
    """Assign estimates to truth factors and compute per-factor losses.

    The assignment maximizes the total |<u_hat_i, u_j>| over permutations
    (Hungarian algorithm). When the counts differ, only min(len(estimates),
    truth.r) pairs are scored and the mismatch is flagged.
    """
    n_est = len(estimates)
    n_true = truth.r
    n = min(n_est, n_true)
    if n == 0:
        return MatchResult(
            permutation=np.empty(0, dtype=np.int64),
            per_factor_loss=np.empty(0),
            avg_loss=float("nan"),
            lambda_losses=np.empty(0),
            count_mismatch=n_est != n_true,
        )
    u_hats = np.array([est.u_hat for est in estimates])
    sims = np.abs(u_hats @ truth.factors.T)
    rows, cols = linear_sum_assignment(-sims)
    perm = np.full(n_est, -1, dtype=np.int64)
    perm[rows] = cols
    losses = []
    lam_losses = []
    for i, j in zip(rows, cols):
        losses.append(loss_vec(estimates[i].u_hat, truth.factors[j]))
        lam_losses.append(loss_scalar(estimates[i].lambda_hat, truth.weights[j]))
    per_factor = np.array(losses)
    return MatchResult(
        permutation=perm,
        per_factor_loss=per_factor,
        avg_loss=float(np.mean(per_factor)),
        lambda_losses=np.array(lam_losses),
        count_mismatch=n_est != n_true,
    )


def residual_norms(
    t: SymmetricTensor, estimates: list[FactorEstimate]
) -> tuple[float, float]:
    """Frobenius norm (exact) and spectral-norm lower bound (fixed probe)
    of the tensor minus the recovered rank-1 terms."""
    residual = t
    for est in estimates:
        residual = subtract_rank1(residual, est.lambda_hat, est.u_hat)
    return (
        residual.frobenius_norm(),
        spectral_norm_lb(
            residual, restarts=_LB_RESTARTS, iters=_LB_ITERS, seed=_LB_SEED
        ),
    )
