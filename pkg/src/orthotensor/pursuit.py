"""Successive factor extraction from the two-mode singular space.

The decomposition pipeline for a symmetric order-k tensor T with r factors:

1. unfold T along modes (1,2) and take the top-r left singular vectors,
   viewed as d x d matrices (the search space);
2. within the span of those matrices, maximize the spectral norm over
   unit-Frobenius combinations by coordinate ascent, which drives the
   maximizer towards a rank-1 matrix u u^T;
3. refine u by contracting the tensor itself against u^{(x)(k-2)} and
   re-extracting the dominant eigenvector (this undoes part of the noise
   amplification caused by merging modes 3..k);
4. restrict the search space to the orthogonal complement of vec(u u^T)
   and repeat.

Coordinate ascent alternates two closed-form block updates: x is the
dominant (by absolute eigenvalue) eigenvector of M(alpha), and the raw
coefficients alpha_j = x^T Mat(basis_j) x are renormalized to the unit
sphere. Each full sweep cannot decrease the objective.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.linalg import get_lapack_funcs

from .linalg import canonical_sign, orthonormalize, top_eig_abs, truncated_left_svd
from .tensor import (
    SymmetricTensor,
    contract_tail,
    multilinear_eval,
    subtract_rank1,
    unfold,
)

logger = logging.getLogger(__name__)

DEGENERATE_ALPHA_TOL = 1e-14

_syevd = get_lapack_funcs("syevd", (np.empty((1, 1)),))


def _top_eigvec_sym(m: np.ndarray) -> np.ndarray:
    """Eigenvector of largest |eigenvalue| of an already-symmetric matrix.

    Inner-loop variant of linalg.top_eig_abs without validation or sign
    canonicalization; the ascent objective is sign-blind in x.
    """
    w, v, info = _syevd(m, lower=1, overwrite_a=0)
    if info != 0:
        raise FloatingPointError("symmetric eigendecomposition did not converge")
    # tie goes to the most negative end, matching top_eig_abs's argmax
    return v[:, -1] if abs(w[-1]) > abs(w[0]) else v[:, 0]


class PursuitExhaustedError(RuntimeError):
    """Every available initialization collapsed to a degenerate update."""


@dataclass(frozen=True)
class PursuitOptions:
    """Knobs for the coordinate ascent.

    accept_objective is the value at which an ascent result is taken
    without trying further initializations: true factors score 1 without
    noise and lose at most ~1/c0 = 0.1 under the signal-to-noise
    assumption, so 0.9 separates them from local maxima of the deflated
    noise space.
    """

    tol: float = 1e-10
    max_iters: int = 500
    rank_rel_tol: float = 1e-8
    accept_objective: float = 0.9
    fallback_patience: int = 8
    refine_iters: int = 30
    refine_tol: float = 1e-12
    dedup_overlap: float = 0.8
    final_polish: bool = True

    def __post_init__(self):
        if self.tol <= 0:
            raise ValueError("tol must be positive")
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")
        if self.fallback_patience < 1:
            raise ValueError("fallback_patience must be >= 1")
        if self.refine_iters < 1:
            raise ValueError("refine_iters must be >= 1")


@dataclass(frozen=True)
class SingularSpaceBasis:
    """Orthonormal spanning set of the current search space.

    basis has shape (active, d*d); rows are orthonormal length-d^2 vectors.
    singular_values holds the original top-r singular values of the
    two-mode unfolding and is never touched by deflation; gap_next is the
    (r+1)-th singular value. no_drop_events counts deflations that failed
    to shrink the span (expected on noisy input, where the extracted
    direction is only approximately inside the space).
    """

    basis: np.ndarray
    singular_values: np.ndarray
    dim_d: int
    gap_next: float = 0.0
    no_drop_events: int = 0

    @property
    def active(self) -> int:
        return self.basis.shape[0]

    def matrices(self) -> np.ndarray:
        """Stack of shape (active, d, d): each basis vector as a matrix."""
        return self.basis.reshape(self.active, self.dim_d, self.dim_d).transpose(
            0, 2, 1
        )


@dataclass(frozen=True)
class AscentState:
    x: np.ndarray
    alpha: np.ndarray
    objective: float
    iters: int = 0
    converged: bool = True


@dataclass(frozen=True)
class FactorEstimate:
    """One recovered factor: unit vector, signed weight, and diagnostics.

    objective is the spectral norm of the pursued matrix at convergence,
    before tensor-side refinement; rank selection filters on it.
    """

    u_hat: np.ndarray
    lambda_hat: float
    objective: float
    iteration: int
    ascent_iters: int
    converged: bool


@dataclass(frozen=True)
class SnrDiagnostics:
    """Signal-to-noise check: the perturbation analysis needs the noise
    spectral norm below lambda_min / (c0 * d**((k-2)/2))."""

    eps_frob_ub: float
    lambda_min: float
    threshold: float
    satisfied: bool
    c0: float = 10.0


def snr_diagnostics(
    weights: np.ndarray, noise_frob: float, dim: int, order: int, c0: float = 10.0
) -> SnrDiagnostics:
    lam_min = float(np.min(np.abs(weights)))
    threshold = lam_min / (c0 * dim ** ((order - 2) / 2))
    return SnrDiagnostics(
        eps_frob_ub=float(noise_frob),
        lambda_min=lam_min,
        threshold=threshold,
        satisfied=bool(noise_frob <= threshold),
        c0=c0,
    )


def singular_space(t: SymmetricTensor, r: int) -> SingularSpaceBasis:
    """Top-r left singular vectors of the two-mode unfolding of t."""
    if t.order < 3:
        raise ValueError("two-mode unfolding requires an order >= 3 tensor")
    limit = min(t.dim**2, t.dim ** (t.order - 2))
    if not 1 <= r <= limit:
        raise ValueError(f"r must be in [1, {limit}], got {r}")
    svd = truncated_left_svd(unfold(t, 2), r, method="auto")
    return SingularSpaceBasis(
        basis=svd.left_vectors,
        singular_values=svd.singular_values,
        dim_d=t.dim,
        gap_next=svd.gap_next,
    )


def _ascend(
    mats: np.ndarray, start: int, tol: float, max_iters: int
) -> AscentState | None:
    """Coordinate ascent from basis index ``start``; None if the alpha
    update degenerates on the first sweep."""
    s = mats.shape[0]
    alpha = np.zeros(s)
    alpha[start] = 1.0
    objective = -np.inf
    x = _top_eigvec_sym(mats[start])
    converged = False
    iters = 0
    for iters in range(1, max_iters + 1):
        if iters > 1:
            m = np.tensordot(alpha, mats, axes=(0, 0))
            x = _top_eigvec_sym(m)
        raw = mats @ x @ x  # raw[j] = x^T Mat_j x
        norm = np.linalg.norm(raw)
        if norm < DEGENERATE_ALPHA_TOL:
            return None
        alpha = raw / norm
        new_objective = norm  # H(x, alpha) after normalization
        if new_objective - objective < tol and iters > 1:
            objective = new_objective
            converged = True
            break
        objective = new_objective
    return AscentState(
        x=x, alpha=alpha, objective=float(objective), iters=iters, converged=converged
    )


def _top_eigvecs_sym_batch(ms: np.ndarray) -> np.ndarray:
    """Row-wise largest-|eigenvalue| eigenvectors of a (n, d, d) stack."""
    w, v = np.linalg.eigh(ms)
    picks = np.where(np.abs(w[:, -1]) > np.abs(w[:, 0]), w.shape[1] - 1, 0)
    return v[np.arange(ms.shape[0]), :, picks]


def _ascend_batch(
    mats: np.ndarray, starts: list[int], tol: float, max_iters: int
) -> list[AscentState | None]:
    """Lockstep coordinate ascent from several init indices at once.

    Each trajectory follows the same updates as _ascend and freezes when
    it converges; the batch runs until every trajectory has stopped.
    Entries for degenerate runs come back as None.
    """
    n = len(starts)
    s, d, _ = mats.shape
    flat = mats.reshape(s, d * d)
    x = _top_eigvecs_sym_batch(mats[starts])
    alpha = np.zeros((n, s))
    objective = np.full(n, -np.inf)
    iters = np.zeros(n, dtype=int)
    converged = np.zeros(n, dtype=bool)
    dead = np.zeros(n, dtype=bool)
    running = np.ones(n, dtype=bool)
    for sweep in range(1, max_iters + 1):
        idx = np.nonzero(running)[0]
        if idx.size == 0:
            break
        if sweep > 1:
            ms = (alpha[idx] @ flat).reshape(idx.size, d, d)
            x[idx] = _top_eigvecs_sym_batch(ms)
        xi = x[idx]
        raw = (flat @ (xi[:, :, None] * xi[:, None, :]).reshape(idx.size, -1).T).T
        norms = np.linalg.norm(raw, axis=1)
        deg = norms < DEGENERATE_ALPHA_TOL
        if np.any(deg):
            dead[idx[deg]] = True
            running[idx[deg]] = False
            idx = idx[~deg]
            raw = raw[~deg]
            norms = norms[~deg]
            if idx.size == 0:
                continue
        alpha[idx] = raw / norms[:, None]
        done = (norms - objective[idx] < tol) & (sweep > 1)
        objective[idx] = norms
        iters[idx] = sweep
        if np.any(done):
            converged[idx[done]] = True
            running[idx[done]] = False
    out: list[AscentState | None] = []
    for i in range(n):
        if dead[i]:
            out.append(None)
        else:
            out.append(
                AscentState(
                    x=x[i],
                    alpha=alpha[i],
                    objective=float(objective[i]),
                    iters=int(iters[i]),
                    converged=bool(converged[i]),
                )
            )
    return out


def pursue_rank1(
    space: SingularSpaceBasis,
    init_index: int = 0,
    tol: float = 1e-10,
    max_iters: int = 500,
    accept_objective: float = 0.9,
    fallback_patience: int = 8,
) -> tuple[AscentState, np.ndarray, np.ndarray]:
    """Maximize the spectral norm over unit-Frobenius matrices in the span.

    Starts from the basis matrix at ``init_index`` (zero-based). When that
    ascent degenerates or stalls at a local maximum below
    accept_objective, the remaining indices are tried in ascending order
    (leftover signal concentrates at low indices after deflation) and the
    best result is kept; the first run reaching accept_objective is taken
    as is, and the scan stops early once a block of fallback_patience
    consecutive runs brings no improvement. Returns the final ascent
    state, the matrix M(alpha), and its dominant eigenvector.

    With a single active basis vector no optimization is needed and the
    basis matrix itself is returned after zero sweeps.
    """
    mats, states = _scan_space(
        space, init_index, tol, max_iters, accept_objective, fallback_patience
    )
    if not states:
        raise PursuitExhaustedError(
            "all basis initializations produced degenerate coefficient updates"
        )
    best = states[0]
    for state in states[1:]:
        if state.objective > best.objective:
            best = state
    m_hat = np.tensordot(best.alpha, mats, axes=(0, 0))
    u_hat = top_eig_abs(m_hat).vector
    return best, m_hat, u_hat


def _scan_space(
    space: SingularSpaceBasis,
    init_index: int,
    tol: float,
    max_iters: int,
    accept_objective: float,
    fallback_patience: int,
) -> tuple[np.ndarray, list[AscentState]]:
    """Ascent states collected by the initialization scan, in scan order.

    The scan starts at init_index, then walks the remaining indices in
    ascending order; it stops as soon as the running best objective
    reaches accept_objective, or once a block of fallback_patience
    consecutive runs brings no improvement. Degenerate runs are skipped.
    """
    if space.active < 1:
        raise ValueError("empty singular space")
    if not 0 <= init_index < space.active:
        raise ValueError(f"init_index must be in [0, {space.active - 1}]")
    if tol <= 0:
        raise ValueError("tol must be positive")
    mats = 0.5 * (space.matrices() + space.matrices().transpose(0, 2, 1))

    if space.active == 1:
        pair = top_eig_abs(mats[0])
        state = AscentState(
            x=pair.vector,
            alpha=np.ones(1),
            objective=abs(pair.value),
            iters=0,
            converged=True,
        )
        return mats, [state]

    states: list[AscentState] = []
    first = _ascend(mats, init_index, tol, max_iters)
    exhausted = first is None
    best_obj = -np.inf
    if first is not None:
        states.append(first)
        best_obj = first.objective
    if best_obj < accept_objective:
        rest = [j for j in range(space.active) if j != init_index]
        for pos in range(0, len(rest), fallback_patience):
            chunk = rest[pos : pos + fallback_patience]
            improved = False
            accepted = False
            for state in _ascend_batch(mats, chunk, tol, max_iters):
                if state is None:
                    continue
                exhausted = False
                states.append(state)
                if state.objective > best_obj:
                    best_obj = state.objective
                    improved = True
                if best_obj >= accept_objective:
                    accepted = True
                    break
            if accepted:
                break
            if not improved and not exhausted:
                break
    return mats, states


def postprocess(t: SymmetricTensor, u_hat: np.ndarray) -> tuple[np.ndarray, float]:
    """Refine a factor estimate against the tensor itself.

    Contracts modes 3..k with u_hat and takes the dominant eigenvector of
    the resulting d x d matrix; the weight is the multilinear form at the
    refined vector. For order 3 the contraction consumes a single copy of
    u_hat.
    """
    m = contract_tail(t, u_hat)
    u_refined = canonical_sign(top_eig_abs(m).vector)
    lambda_hat = multilinear_eval(t, u_refined)
    return u_refined, lambda_hat


def deflate(space: SingularSpaceBasis, u_hat: np.ndarray) -> SingularSpaceBasis:
    """Restrict the space to the orthogonal complement of vec(u u^T).

    Each basis vector loses its component along vec(u_hat u_hat^T) and the
    set is re-orthonormalized; generically exactly one vector collapses and
    is dropped. When the extracted direction is not (numerically) inside
    the span nothing drops; the event is counted and logged, and the
    full-size basis is kept.
    """
    u = np.asarray(u_hat, dtype=np.float64).reshape(-1)
    if space.active < 1:
        raise ValueError("cannot deflate an empty basis")
    v = np.outer(u, u).reshape(-1)
    nv = np.linalg.norm(v)
    if nv == 0.0:
        raise ValueError("u_hat must be a unit vector")
    v /= nv
    projected = space.basis - np.outer(space.basis @ v, v)
    new_basis = orthonormalize(projected)
    no_drop = space.no_drop_events
    if len(new_basis) == space.active:
        no_drop += 1
        logger.debug(
            "deflation left the span full rank (%d vectors); extracted "
            "direction lies mostly outside the space",
            space.active,
        )
    basis = (
        np.array(new_basis)
        if new_basis
        else np.empty((0, space.dim_d**2))
    )
    return replace(space, basis=basis, no_drop_events=no_drop)


def refine(
    t: SymmetricTensor, u_hat: np.ndarray, max_iters: int = 30, tol: float = 1e-12
) -> tuple[np.ndarray, float]:
    """Iterate the tensor-side refinement map to its fixed point.

    Repeats the postprocess update until the direction stops moving (up
    to sign). Exact factors are already fixed points, so noiseless output
    is unchanged; at high noise the extra sweeps recover the accuracy the
    merged-mode unfolding gave away.
    """
    u = np.asarray(u_hat, dtype=np.float64).reshape(-1)
    lam = multilinear_eval(t, u)
    for _ in range(max_iters):
        u_new, lam = postprocess(t, u)
        if min(np.linalg.norm(u_new - u), np.linalg.norm(u_new + u)) < tol:
            return u_new, lam
        u = u_new
    return u, lam


def _max_overlap(u: np.ndarray, extracted: list[np.ndarray]) -> float:
    if not extracted:
        return 0.0
    return float(np.max(np.abs(np.array(extracted) @ u)))


def decompose(
    t: SymmetricTensor, r: int, opts: PursuitOptions | None = None
) -> list[FactorEstimate]:
    """Extract r factor estimates by pursuit, refinement and deflation.

    Estimates come back in extraction order. Each pursuit direction is
    refined to the fixed point of the tensor-side update against the
    running residual (the tensor minus the spikes recovered so far), which
    keeps cross-factor terms out of the refinement at heavy noise. When
    several initializations were scanned, the candidate whose refined
    direction explains the most residual mass wins, and refinements that
    collapse onto an already-extracted factor are rejected (the exact
    theory guarantees near-orthogonal outputs, so such a collapse is a
    known failure). Reported weights are always the multilinear form of
    the original tensor at the refined direction.

    If r exceeds the numerically detected rank of the two-mode unfolding,
    the trailing estimates are placeholders with objective 0 and
    converged=False (there is no signal left to pursue); they are reported
    rather than dropped so that rank selection can inspect them.
    """
    opts = opts or PursuitOptions()
    space = singular_space(t, r)
    mu = space.singular_values
    detected = int(np.sum(mu >= opts.rank_rel_tol * mu[0])) if mu[0] > 0 else 0
    if detected < r:
        logger.warning(
            "requested %d factors but the unfolding has numerical rank %d; "
            "trailing estimates will be flagged unconverged",
            r,
            detected,
        )
    estimates: list[FactorEstimate] = []
    extracted: list[np.ndarray] = []
    sub_coeffs: dict[int, float] = {}
    work = t
    for i in range(r):
        if i < detected and space.active > 0:
            init_index = min(i, space.active - 1)
            mats, states = _scan_space(
                space,
                init_index,
                opts.tol,
                opts.max_iters,
                opts.accept_objective,
                opts.fallback_patience,
            )
            if not states:
                raise PursuitExhaustedError(
                    "all basis initializations produced degenerate updates "
                    f"at extraction {i}"
                )
            order = sorted(
                range(len(states)), key=lambda z: (-states[z].objective, z)
            )
            # walk candidates in descending pursuit-objective order with a
            # short screening refinement; a later candidate takes over only
            # when it explains meaningfully more residual mass, so near-ties
            # resolve toward the better ascent
            chosen = None
            chosen_gain = 0.0
            for z in order:
                state = states[z]
                m_hat = np.tensordot(state.alpha, mats, axes=(0, 0))
                u_raw = top_eig_abs(m_hat).vector
                u_try, gain = refine(
                    work, u_raw, max_iters=6, tol=opts.refine_tol
                )
                if _max_overlap(u_try, extracted) > opts.dedup_overlap:
                    continue
                if chosen is None or abs(gain) > abs(chosen_gain) * (1 + 1e-6):
                    chosen = (state, m_hat, u_try)
                    chosen_gain = gain
            if chosen is not None:
                state, m_hat, u_try = chosen
                u_hat, _ = refine(
                    work, u_try, max_iters=opts.refine_iters, tol=opts.refine_tol
                )
                if _max_overlap(u_hat, extracted) > opts.dedup_overlap:
                    u_hat = u_try
                chosen = (state, m_hat, u_hat)
            else:
                # every candidate refines onto a found factor; anchor on the
                # best pursuit direction, which lives in the deflated space
                state = states[order[0]]
                m_hat = np.tensordot(state.alpha, mats, axes=(0, 0))
                u_raw = top_eig_abs(m_hat).vector
                u_hat, _ = postprocess(t, u_raw)
                if _max_overlap(u_hat, extracted) > opts.dedup_overlap:
                    u_hat = canonical_sign(u_raw)
                chosen = (state, m_hat, u_hat)
            state, m_hat, u_hat = chosen
            lambda_hat = multilinear_eval(t, u_hat)
            objective = abs(top_eig_abs(m_hat).value)
            estimates.append(
                FactorEstimate(
                    u_hat=u_hat,
                    lambda_hat=lambda_hat,
                    objective=float(objective),
                    iteration=i,
                    ascent_iters=state.iters,
                    converged=state.converged,
                )
            )
            extracted.append(u_hat)
            space = deflate(space, u_hat)
            # peel the residual with its own fit coefficient; the reported
            # weight above stays the full tensor's multilinear form
            coeff = multilinear_eval(work, u_hat)
            sub_coeffs[i] = coeff
            work = subtract_rank1(work, coeff, u_hat)
        else:
            u_hat, lambda_hat = postprocess(t, _placeholder_direction(t.dim, i))
            estimates.append(
                FactorEstimate(
                    u_hat=u_hat,
                    lambda_hat=lambda_hat,
                    objective=0.0,
                    iteration=i,
                    ascent_iters=0,
                    converged=False,
                )
            )
    if opts.final_polish and len(extracted) > 1:
        estimates = _polish(t, estimates, work, sub_coeffs, opts)
    return estimates


def _polish(
    t: SymmetricTensor,
    estimates: list[FactorEstimate],
    residual: SymmetricTensor,
    sub_coeffs: dict[int, float],
    opts: PursuitOptions,
) -> list[FactorEstimate]:
    """One back-fitting sweep over the finished extraction.

    Factors extracted early were refined while the later spikes still sat
    in their residual; a single pass re-refining each direction against
    the residual from everyone else's final estimate removes that
    asymmetry. Exact factors are fixed points, so exactly decomposable
    input passes through unchanged. A re-refined direction that would
    collide with another factor keeps its pre-polish value.

    residual is the extraction's final leftover, t minus the recovered
    spikes at the coefficients recorded in sub_coeffs.
    """
    work = residual
    out = list(estimates)
    for i, coeff in sub_coeffs.items():
        est = out[i]
        # add this factor's spike back: everyone else's stays removed
        own = subtract_rank1(work, -coeff, est.u_hat)
        u_new, gain = refine(
            own, est.u_hat, max_iters=opts.refine_iters, tol=opts.refine_tol
        )
        others = [out[j].u_hat for j in sub_coeffs if j != i]
        if _max_overlap(u_new, others) > opts.dedup_overlap:
            continue
        work = subtract_rank1(own, gain, u_new)
        out[i] = replace(
            est, u_hat=u_new, lambda_hat=multilinear_eval(t, u_new)
        )
    return out


def _placeholder_direction(d: int, i: int) -> np.ndarray:
    e = np.zeros(d)
    e[i % d] = 1.0
    return e


def is_robust_eigenvector(
    t: SymmetricTensor, a: np.ndarray, tol: float = 1e-8
) -> bool:
    """Whether vec(a a^T) is an eigenvector of the unfolding Gram matrix
    with a strictly positive eigenvalue.

    This characterizes membership of a (up to sign) in the orthonormal
    factor set of an exactly decomposable tensor; mixtures of factors with
    tied weights fail the test even though they span the same singular
    subspace.
    """
    a = np.asarray(a, dtype=np.float64).reshape(-1)
    if abs(np.linalg.norm(a) - 1.0) > 1e-9:
        raise ValueError("a must be a unit vector")
    b = unfold(t, 2)
    v = np.outer(a, a).reshape(-1)
    gv = b @ (b.T @ v)
    rayleigh = float(np.dot(v, gv))
    residual = float(np.linalg.norm(gv - rayleigh * v))
    return residual <= tol and rayleigh > tol
