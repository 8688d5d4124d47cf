"""Double-sided centering operators for square similarity matrices.

Supports the uniform case ``H M H`` with ``H = I - (1/N) 11^T`` and the
weighted generalisation ``E_q M E_q`` with ``E_q = I - 1 q^T`` for a
probability vector ``q``.  Both are computed through mean-subtraction
identities instead of explicit matrix products, keeping the cost at
O(N^2).  The operators are idempotent, annihilate ``1 q^T``, and map any
matrix to one with zero row sums.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ValidationError

_PROB_SUM_TOL = 1e-12


@dataclass(frozen=True)
class ProbVector:
    """A strictly positive probability vector of length N."""

    q: np.ndarray

    def __post_init__(self) -> None:
        q = np.asarray(self.q, dtype=np.float64)
        if q.ndim != 1 or q.size < 1:
            raise ValidationError(f"probability vector must be 1-D, got shape {q.shape}")
        if not np.all(np.isfinite(q)):
            raise ValidationError("probability vector contains non-finite entries")
        if np.any(q <= 0.0):
            raise ValidationError("probability vector components must be strictly positive")
        total = float(q.sum())
        if abs(total - 1.0) > _PROB_SUM_TOL:
            raise ValidationError(f"probability vector sums to {total!r}, expected 1 within {_PROB_SUM_TOL}")
        q = q.copy()
        q.setflags(write=False)
        object.__setattr__(self, "q", q)

    @property
    def size(self) -> int:
        return int(self.q.size)


def uniform_prob(n: int) -> ProbVector:
    """The uniform probability vector (1/n, ..., 1/n)."""
    if n < 1:
        raise ValidationError(f"need n >= 1, got {n}")
    return ProbVector(np.full(n, 1.0 / n))


def _as_square(m: np.ndarray) -> np.ndarray:
    m = np.asarray(m, dtype=np.float64)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValidationError(f"expected a square matrix, got shape {m.shape}")
    return m


def center_uniform(m: np.ndarray) -> np.ndarray:
    """Return ``H M H``: subtract row means, column means, add grand mean."""
    m = _as_square(m)
    row = m.mean(axis=1, keepdims=True)
    col = m.mean(axis=0, keepdims=True)
    grand = m.mean()
    return m - row - col + grand


def center_weighted(m: np.ndarray, q: ProbVector | np.ndarray) -> np.ndarray:
    """Return ``E_q M E_q`` with ``E_q = I - 1 q^T``.

    Computed as two rank-one corrections: first subtract the q-weighted
    column means from every row, then subtract the row-sum/q outer product.
    """
    m = _as_square(m)
    qv = q.q if isinstance(q, ProbVector) else ProbVector(np.asarray(q)).q
    if qv.size != m.shape[0]:
        raise ValidationError(f"matrix is {m.shape[0]}x{m.shape[0]} but q has length {qv.size}")
    a = m - (qv @ m)[None, :]
    return a - np.outer(a.sum(axis=1), qv)
