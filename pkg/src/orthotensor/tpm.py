"""Tensor power method baseline with random restarts and tensor deflation.

One power step maps x to the normalized contraction of all but one mode
against x. Each extraction round runs several random unit starts, keeps
the candidate with the largest |T(x,...,x)|, records the signed weight,
and subtracts the recovered rank-1 term from the tensor before the next
round. The order-k generalization of the step is the standard one.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .linalg import canonical_sign
from .pursuit import FactorEstimate
from .tensor import (
    SymmetricTensor,
    contract_all_but_one,
    multilinear_eval,
    subtract_rank1,
)


class DegenerateStepError(RuntimeError):
    """The contraction vanished; the caller should restart elsewhere."""


@dataclass(frozen=True)
class TpmOptions:
    restarts: int = 10
    iters: int = 100
    seed: int = 0
    tol: float = 1e-10

    def __post_init__(self):
        if self.restarts < 1 or self.iters < 1:
            raise ValueError("restarts and iters must be >= 1")


def tpm_power_step(t: SymmetricTensor, x: np.ndarray) -> np.ndarray:
    """One normalized power iteration step from the unit vector x."""
    y = contract_all_but_one(t, x)
    norm = np.linalg.norm(y)
    if norm == 0.0:
        raise DegenerateStepError("power step contracted to zero")
    return y / norm


def _run_restart(
    t: SymmetricTensor, x: np.ndarray, iters: int, tol: float
) -> tuple[np.ndarray, int, bool]:
    for it in range(1, iters + 1):
        x_new = tpm_power_step(t, x)
        # sign oscillation counts as converged (even order, negative weight)
        if min(np.linalg.norm(x_new - x), np.linalg.norm(x_new + x)) <= tol:
            return x_new, it, True
        x = x_new
    return x, iters, False


def tpm_decompose(
    t: SymmetricTensor, r: int, opts: TpmOptions | None = None
) -> list[FactorEstimate]:
    """Extract r factors by restarted power iteration and deflation.

    Deterministic given opts.seed. Restarts that hit a zero contraction
    are replaced by fresh random starts; a round never fails outright,
    poor convergence simply shows up in the loss metrics downstream.
    """
    if r < 1:
        raise ValueError("r must be >= 1")
    opts = opts or TpmOptions()
    rng = np.random.default_rng(opts.seed)
    d = t.dim
    work = t
    estimates: list[FactorEstimate] = []
    for round_idx in range(r):
        best_val = -1.0
        best: tuple[np.ndarray, int, bool] | None = None
        for _ in range(opts.restarts):
            x0 = rng.standard_normal(d)
            x0 /= np.linalg.norm(x0)
            try:
                x, iters, converged = _run_restart(work, x0, opts.iters, opts.tol)
            except DegenerateStepError:
                x, iters, converged = x0, 0, False
            val = abs(multilinear_eval(work, x))
            if val > best_val:
                best_val = val
                best = (x, iters, converged)
        assert best is not None
        u_hat = canonical_sign(best[0])
        lambda_hat = multilinear_eval(work, u_hat)
        estimates.append(
            FactorEstimate(
                u_hat=u_hat,
                lambda_hat=float(lambda_hat),
                objective=float(best_val),
                iteration=round_idx,
                ascent_iters=best[1],
                converged=best[2],
            )
        )
        work = subtract_rank1(work, lambda_hat, u_hat)
    return estimates
