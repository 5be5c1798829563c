"""Dense decompositions backing the pursuit: truncated left SVD and
dominant eigenpairs of small symmetric matrices.

Vectors returned by this module carry a deterministic sign convention
(first numerically nonzero coordinate positive) so repeated runs produce
identical output; the underlying factorization is only defined up to sign.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

ORTHO_DROP_TOL = 1e-10


@dataclass(frozen=True)
class TruncatedSVDResult:
    """Top-r left singular subspace of a matrix.

    left_vectors has shape (r, n_rows) with orthonormal rows in descending
    singular-value order; gap_next is the (r+1)-th singular value (0 when
    r exhausts the spectrum), kept for uniqueness diagnostics.
    right_vectors (r, n_cols) is populated whenever it is cheap to form.
    """

    left_vectors: np.ndarray
    singular_values: np.ndarray
    gap_next: float
    right_vectors: np.ndarray | None = None


@dataclass(frozen=True)
class EigPair:
    value: float
    vector: np.ndarray


def canonical_sign(v: np.ndarray, tol: float = 1e-12) -> np.ndarray:
    """Flip v so its first numerically nonzero coordinate is positive."""
    v = np.asarray(v)
    scale = np.max(np.abs(v))
    if scale == 0.0:
        return v
    nz = np.nonzero(np.abs(v) > tol * scale)[0]
    if nz.size and v[nz[0]] < 0:
        return -v
    return v


def truncated_left_svd(
    a: np.ndarray, r: int, method: str = "auto"
) -> TruncatedSVDResult:
    """Top-r left singular vectors and values of a dense matrix.

    method 'direct' runs a thin SVD; 'gram' eigendecomposes a @ a.T, which
    is cheaper when the matrix is much wider than tall; 'auto' picks gram
    when cols > 4 * rows.
    """
    a = np.asarray(a, dtype=np.float64)
    if a.ndim != 2:
        raise ValueError("expected a 2-d array")
    if not np.all(np.isfinite(a)):
        raise FloatingPointError("matrix contains non-finite entries")
    rows, cols = a.shape
    if not 1 <= r <= min(rows, cols):
        raise ValueError(f"r must be in [1, {min(rows, cols)}], got {r}")
    if method == "auto":
        method = "gram" if cols > 4 * rows else "direct"
    if method == "direct":
        u, s, vt = np.linalg.svd(a, full_matrices=False)
        left = u[:, :r].T
        sing = s[:r]
        gap = float(s[r]) if r < s.size else 0.0
        right = vt[:r]
    elif method == "gram":
        g = a @ a.T
        w, v = np.linalg.eigh(g)
        order = np.argsort(w)[::-1]
        w = np.clip(w[order], 0.0, None)
        v = v[:, order]
        s = np.sqrt(w)
        left = v[:, :r].T
        sing = s[:r]
        gap = float(s[r]) if r < s.size else 0.0
        right = left @ a
        norms = np.where(sing > 0, sing, 1.0)
        right = right / norms[:, None]
    else:
        raise ValueError(f"unknown SVD method {method!r}")

    left = np.array([canonical_sign(v) for v in left])
    # keep a @ right consistent with the sign flips applied to the left side
    if right is not None:
        resign = np.sign(np.sum(left * (a @ right.T).T, axis=1))
        resign[resign == 0] = 1.0
        right = right * resign[:, None]
    return TruncatedSVDResult(
        left_vectors=left,
        singular_values=np.asarray(sing, dtype=np.float64),
        gap_next=gap,
        right_vectors=right,
    )


def top_eig_abs(m: np.ndarray) -> EigPair:
    """Eigenpair of largest |eigenvalue| of a symmetric matrix.

    m is symmetrized defensively as (m + m.T)/2 before decomposition.
    """
    m = np.asarray(m, dtype=np.float64)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError("expected a square matrix")
    if not np.all(np.isfinite(m)):
        raise FloatingPointError("matrix contains non-finite entries")
    sym = 0.5 * (m + m.T)
    w, v = np.linalg.eigh(sym)
    i = int(np.argmax(np.abs(w)))
    return EigPair(value=float(w[i]), vector=canonical_sign(v[:, i]))


def orthonormalize(vectors, drop_tol: float = ORTHO_DROP_TOL) -> list[np.ndarray]:
    """Orthonormal basis of the span via modified Gram-Schmidt.

    Input order is preserved; a vector whose residual after projecting out
    the accepted basis falls below drop_tol is discarded, so the output
    may have fewer vectors than the input. Projection is applied twice per
    vector for numerical robustness.
    """
    basis: list[np.ndarray] = []
    for v in vectors:
        q = np.asarray(v, dtype=np.float64).reshape(-1).copy()
        for _ in range(2):
            for b in basis:
                q -= np.dot(b, q) * b
        norm = np.linalg.norm(q)
        if norm > drop_tol:
            basis.append(q / norm)
    return basis
