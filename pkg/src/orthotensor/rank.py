"""Estimating the number of factors when it is not known in advance.

The search space is relaxed to the top n = min(rank of the two-mode
unfolding, d) singular directions, the pursuit is run for all n rounds,
rounds whose objective stays close to 1 are kept, and the count is read
off the scree plot of the squared weight estimates: the selected rank is
the position of the largest successive drop ratio. A sentinel value
rank_tol * max(lambda^2) is appended so that "no drop at all" resolves to
keeping the whole filtered set.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .pursuit import FactorEstimate, PursuitOptions, decompose
from .tensor import SymmetricTensor, unfold

DEFAULT_OBJECTIVE_THRESHOLD = 0.9
DEFAULT_RANK_TOL = 1e-6


@dataclass(frozen=True)
class RankSelectionReport:
    n_relaxed: int
    candidates: list[FactorEstimate]
    filtered_set: list[int]
    sorted_lambda_sq: np.ndarray
    r_hat: int
    elbow_scores: np.ndarray
    objective_threshold: float
    rank_tol: float


def numerical_rank(a: np.ndarray, rel_tol: float) -> int:
    """Number of singular values at least rel_tol times the largest."""
    if not 0 < rel_tol < 1:
        raise ValueError("rel_tol must be in (0, 1)")
    s = np.linalg.svd(np.asarray(a, dtype=np.float64), compute_uv=False)
    if s.size == 0 or s[0] == 0.0:
        return 0
    return int(np.sum(s >= rel_tol * s[0]))


def select_rank(
    t: SymmetricTensor,
    objective_threshold: float = DEFAULT_OBJECTIVE_THRESHOLD,
    rank_tol: float = DEFAULT_RANK_TOL,
    opts: PursuitOptions | None = None,
) -> RankSelectionReport:
    """Estimate the factor count of a noisy tensor.

    objective_threshold and the elbow rule are heuristics: the noiseless
    analysis guarantees unit objectives for true factors, and the default
    0.9 leaves room for the noise-level degradation allowed by the
    signal-to-noise assumption.
    """
    if not 0 < objective_threshold < 1:
        raise ValueError("objective_threshold must be in (0, 1)")
    if not 0 < rank_tol < 1:
        raise ValueError("rank_tol must be in (0, 1)")
    # rank counting reads the raw per-round outputs; the decomposition's
    # final back-fitting sweep is irrelevant here and skipped
    opts = replace(opts or PursuitOptions(), final_polish=False)
    n = min(numerical_rank(unfold(t, 2), rank_tol), t.dim)
    if n == 0:
        return RankSelectionReport(
            n_relaxed=0,
            candidates=[],
            filtered_set=[],
            sorted_lambda_sq=np.empty(0),
            r_hat=0,
            elbow_scores=np.empty(0),
            objective_threshold=objective_threshold,
            rank_tol=rank_tol,
        )
    candidates = decompose(t, n, opts)
    filtered = [i for i, est in enumerate(candidates) if est.objective >= objective_threshold]
    if not filtered:
        return RankSelectionReport(
            n_relaxed=n,
            candidates=candidates,
            filtered_set=[],
            sorted_lambda_sq=np.empty(0),
            r_hat=0,
            elbow_scores=np.empty(0),
            objective_threshold=objective_threshold,
            rank_tol=rank_tol,
        )
    lam_sq = np.sort([candidates[i].lambda_hat ** 2 for i in filtered])[::-1]
    padded = np.append(lam_sq, rank_tol * lam_sq[0])
    with np.errstate(divide="ignore", invalid="ignore"):
        scores = np.where(padded[1:] > 0, lam_sq / padded[1:], np.inf)
    r_hat = int(np.argmax(scores)) + 1
    return RankSelectionReport(
        n_relaxed=n,
        candidates=candidates,
        filtered_set=filtered,
        sorted_lambda_sq=lam_sq,
        r_hat=r_hat,
        elbow_scores=scores,
        objective_threshold=objective_threshold,
        rank_tol=rank_tol,
    )
