"""Dense symmetric tensors: storage, unfoldings, contractions, norms.

A symmetric order-k tensor on R^d is stored as a flat float64 array of
length d**k in column-major (Fortran) layout: the entry at multi-index
(i_1, ..., i_k), zero-based, lives at flat position sum_j i_j * d**j.
Unfolding modes 1..m against modes m+1..k is then a plain Fortran-order
reshape into a d**m x d**(k-m) matrix.

All types here are immutable after construction and all operations are
pure functions, so values can be shared freely across threads.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import reduce

import numpy as np

# Guard against accidentally materializing tensors that do not fit in RAM
# at desk scale (~800 MB of float64).
MAX_ENTRIES = 10**8

_SYMMETRIZE_CHUNK = 1 << 20


@dataclass(frozen=True)
class SymmetricTensor:
    """Order-``order`` symmetric tensor on R^``dim`` with full dense storage."""

    order: int
    dim: int
    data: np.ndarray = field(repr=False)

    def __post_init__(self):
        if self.order < 2:
            raise ValueError(f"tensor order must be >= 2, got {self.order}")
        if self.dim < 1:
            raise ValueError(f"tensor dimension must be >= 1, got {self.dim}")
        if self.dim**self.order > MAX_ENTRIES:
            raise ValueError(
                f"dense storage of {self.dim}**{self.order} entries exceeds "
                f"the {MAX_ENTRIES} entry limit"
            )
        data = np.asarray(self.data, dtype=np.float64).reshape(-1)
        if data.size != self.dim**self.order:
            raise ValueError(
                f"data length {data.size} != dim**order = {self.dim**self.order}"
            )
        data = data.copy()
        data.flags.writeable = False
        object.__setattr__(self, "data", data)

    @classmethod
    def from_array(cls, arr: np.ndarray) -> "SymmetricTensor":
        arr = np.asarray(arr, dtype=np.float64)
        k = arr.ndim
        d = arr.shape[0]
        if arr.shape != (d,) * k:
            raise ValueError(f"expected a cubical array, got shape {arr.shape}")
        return cls(order=k, dim=d, data=arr.reshape(-1, order="F"))

    @classmethod
    def zeros(cls, order: int, dim: int) -> "SymmetricTensor":
        return cls(order=order, dim=dim, data=np.zeros(dim**order))

    def asarray(self) -> np.ndarray:
        """Read-only view with shape (d,)*k."""
        return self.data.reshape((self.dim,) * self.order, order="F")

    def entry(self, *index: int) -> float:
        if len(index) != self.order:
            raise ValueError(f"expected {self.order} indices, got {len(index)}")
        return float(self.asarray()[index])

    def frobenius_norm(self) -> float:
        return float(np.linalg.norm(self.data))

    def is_symmetric(self, rng=None, samples: int = 32) -> bool:
        """Spot-check the symmetry invariant by random index permutations."""
        rng = np.random.default_rng(0) if rng is None else rng
        arr = self.asarray()
        for _ in range(samples):
            idx = tuple(rng.integers(0, self.dim, size=self.order))
            perm = rng.permutation(self.order)
            if arr[idx] != arr[tuple(idx[p] for p in perm)]:
                return False
        return True


def rank1_tensor(weight: float, u: np.ndarray, order: int) -> SymmetricTensor:
    """The tensor weight * u ⊗ ... ⊗ u with ``order`` copies of u."""
    u = np.asarray(u, dtype=np.float64).reshape(-1)
    arr = reduce(np.multiply.outer, [u] * order)
    return SymmetricTensor.from_array(weight * arr)


def unfold(t: SymmetricTensor, left_modes: int) -> np.ndarray:
    """Reshape into a d**m x d**(k-m) matrix, merging modes 1..m into rows.

    Row index of (i_1,...,i_m) is sum_j i_j * d**j and likewise for
    columns, consistent with the canonical flat layout.
    """
    k, d = t.order, t.dim
    if not 1 <= left_modes < k:
        raise ValueError(f"left_modes must be in [1, {k - 1}], got {left_modes}")
    return t.data.reshape(d**left_modes, d ** (k - left_modes), order="F")


def multilinear_eval(t: SymmetricTensor, x: np.ndarray) -> float:
    """Evaluate the k-linear form T(x, ..., x)."""
    x = _check_vector(t, x)
    arr = t.asarray()
    for _ in range(t.order):
        arr = np.tensordot(arr, x, axes=([arr.ndim - 1], [0]))
    return float(arr)


def contract_tail(t: SymmetricTensor, u: np.ndarray) -> np.ndarray:
    """Contract modes 3..k with u, leaving the d x d matrix
    M[p, q] = sum T[p, q, i_3, ..., i_k] u[i_3] ... u[i_k].
    """
    if t.order < 3:
        raise ValueError("tail contraction requires an order >= 3 tensor")
    u = _check_vector(t, u)
    arr = t.asarray()
    for _ in range(t.order - 2):
        arr = np.tensordot(arr, u, axes=([arr.ndim - 1], [0]))
    return arr


def contract_all_but_one(t: SymmetricTensor, x: np.ndarray) -> np.ndarray:
    """Contract modes 2..k with x, leaving the vector T(:, x, ..., x)."""
    x = _check_vector(t, x)
    arr = t.asarray()
    for _ in range(t.order - 1):
        arr = np.tensordot(arr, x, axes=([arr.ndim - 1], [0]))
    return arr


def subtract_rank1(t: SymmetricTensor, weight: float, u: np.ndarray) -> SymmetricTensor:
    """T - weight * u^{(x)k}, used when peeling off a recovered factor."""
    u = _check_vector(t, u)
    spike = reduce(np.multiply.outer, [u] * t.order)
    return SymmetricTensor.from_array(t.asarray() - weight * spike)


def tensor_inner(a: SymmetricTensor, b: SymmetricTensor) -> float:
    """Entrywise inner product; Frobenius norm squared on the diagonal."""
    if (a.order, a.dim) != (b.order, b.dim):
        raise ValueError(
            f"shape mismatch: order/dim ({a.order},{a.dim}) vs ({b.order},{b.dim})"
        )
    return float(np.dot(a.data, b.data))


def spectral_norm_lb(
    t: SymmetricTensor, restarts: int = 8, iters: int = 100, seed: int = 0
) -> float:
    """Lower bound on the spectral norm sup_{|x|=1} |T(x,...,x)|.

    Multi-start symmetric power iteration; the global problem is NP-hard,
    so the returned value is only a witness-backed lower bound. The best
    |T(x,...,x)| seen over all iterates is returned, which makes the bound
    valid even when the iteration oscillates. Deterministic given seed.
    """
    if restarts < 1 or iters < 1:
        raise ValueError("restarts and iters must be >= 1")
    rng = np.random.default_rng(seed)
    d = t.dim
    best = 0.0
    for _ in range(restarts):
        x = rng.standard_normal(d)
        nx = np.linalg.norm(x)
        if nx == 0.0:
            continue
        x /= nx
        for _ in range(iters):
            y = contract_all_but_one(t, x)
            val = abs(float(np.dot(y, x)))  # |T(x,...,x)| at the current x
            if val > best:
                best = val
            ny = np.linalg.norm(y)
            if ny == 0.0:
                break
            x = y / ny
        val = abs(multilinear_eval(t, x))
        if val > best:
            best = val
    return best


def _sorted_flat_indices(flat: np.ndarray, d: int, k: int) -> np.ndarray:
    """Map flat positions to the flat position of their sorted multi-index."""
    digits = np.empty((flat.size, k), dtype=np.int64)
    rem = flat.astype(np.int64)
    for j in range(k):
        digits[:, j] = rem % d
        rem //= d
    digits.sort(axis=1)
    out = np.zeros(flat.size, dtype=np.int64)
    for j in range(k - 1, -1, -1):
        out = out * d + digits[:, j]
    return out


def symmetrize(raw: np.ndarray, order: int, dim: int) -> SymmetricTensor:
    """Propagate the value at each sorted multi-index to all permutations.

    The value stored at the sorted position (i_1 <= ... <= i_k) is
    authoritative; every permuted position receives a bit-identical copy,
    so the result satisfies the symmetry invariant exactly and the map is
    idempotent.
    """
    raw = np.asarray(raw, dtype=np.float64).reshape(-1)
    n = dim**order
    if raw.size != n:
        raise ValueError(f"raw length {raw.size} != dim**order = {n}")
    out = np.empty(n)
    for start in range(0, n, _SYMMETRIZE_CHUNK):
        stop = min(start + _SYMMETRIZE_CHUNK, n)
        flat = np.arange(start, stop)
        out[start:stop] = raw[_sorted_flat_indices(flat, dim, order)]
    return SymmetricTensor(order=order, dim=dim, data=out)


def _check_vector(t: SymmetricTensor, x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64).reshape(-1)
    if x.size != t.dim:
        raise ValueError(f"vector length {x.size} != tensor dimension {t.dim}")
    return x
