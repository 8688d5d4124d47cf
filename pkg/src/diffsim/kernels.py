"""Instance-wise similarity matrices (RSMs) built from representation matrices.

A representation matrix holds one row per sample; an RSM records the pairwise
similarity of those rows under a chosen instance-wise function:

- linear kernel: dot products, the Gram matrix R R^T
- RBF kernel: exp(-||r_i - r_j||^2 / (2 sigma^2)), with a median-distance
  default bandwidth
- euclidean distance: the plain distance matrix used by distance correlation

All constructors return the symmetrized average (S + S^T)/2 so the symmetry
invariant holds bit-stably.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateBandwidthError, ValidationError

KERNEL_LINEAR = "linear"
KERNEL_RBF = "rbf"
KERNEL_DISTANCE = "euclidean_distance"
KERNEL_IDS = (KERNEL_LINEAR, KERNEL_RBF, KERNEL_DISTANCE)

_SYMMETRY_RTOL = 1e-12


@dataclass(frozen=True)
class RepMatrix:
    """An N x D matrix of instance representations (rows are samples)."""

    data: np.ndarray

    def __post_init__(self) -> None:
        data = np.asarray(self.data, dtype=np.float64)
        if data.ndim != 2:
            raise ValidationError(f"representation matrix must be 2-D, got shape {data.shape}")
        if data.shape[0] < 2:
            raise ValidationError(f"need at least 2 samples, got {data.shape[0]}")
        if data.shape[1] < 1:
            raise ValidationError("representation matrix has zero columns")
        if not np.all(np.isfinite(data)):
            raise ValidationError("representation matrix contains NaN or Inf")
        data = np.ascontiguousarray(data)
        data.setflags(write=False)
        object.__setattr__(self, "data", data)

    @property
    def n_samples(self) -> int:
        return int(self.data.shape[0])

    @property
    def n_dims(self) -> int:
        return int(self.data.shape[1])


@dataclass(frozen=True)
class RSM:
    """An N x N symmetric matrix of pairwise instance similarities.

    ``kernel_id`` is one of KERNEL_IDS, or None for matrices ingested from
    files whose kernel provenance is unknown (kernel-specific range checks
    are skipped in that case).  Stored data is symmetrized on construction.
    """

    data: np.ndarray
    kernel_id: str | None
    bandwidth: float | None = None

    def __post_init__(self) -> None:
        data = np.asarray(self.data, dtype=np.float64)
        if data.ndim != 2 or data.shape[0] != data.shape[1]:
            raise ValidationError(f"RSM must be square, got shape {data.shape}")
        if data.shape[0] < 2:
            raise ValidationError(f"RSM needs N >= 2, got N = {data.shape[0]}")
        if not np.all(np.isfinite(data)):
            raise ValidationError("RSM contains NaN or Inf")
        scale = float(np.abs(data).max())
        if float(np.abs(data - data.T).max()) > _SYMMETRY_RTOL * scale:
            raise ValidationError("RSM is asymmetric beyond tolerance")
        if self.kernel_id is not None and self.kernel_id not in KERNEL_IDS:
            raise ValidationError(f"unknown kernel_id {self.kernel_id!r}")
        if self.bandwidth is not None:
            if self.kernel_id != KERNEL_RBF:
                raise ValidationError("bandwidth is only meaningful for the rbf kernel")
            if not (self.bandwidth > 0):
                raise ValidationError(f"bandwidth must be positive, got {self.bandwidth}")
        data = (data + data.T) / 2.0
        if self.kernel_id == KERNEL_RBF:
            if data.min() < -1e-12 or data.max() > 1.0 + 1e-12:
                raise ValidationError("rbf RSM entries must lie in [0, 1]")
            if float(np.abs(np.diag(data) - 1.0).max()) > 1e-12:
                raise ValidationError("rbf RSM diagonal must equal 1")
        elif self.kernel_id == KERNEL_DISTANCE:
            if data.min() < -1e-12:
                raise ValidationError("distance RSM entries must be nonnegative")
            if float(np.abs(np.diag(data)).max()) > 1e-12:
                raise ValidationError("distance RSM diagonal must be zero")
        data.setflags(write=False)
        object.__setattr__(self, "data", data)

    @property
    def n(self) -> int:
        return int(self.data.shape[0])


def _as_rep(r: RepMatrix | np.ndarray) -> RepMatrix:
    return r if isinstance(r, RepMatrix) else RepMatrix(np.asarray(r))


def _pairwise_sq_dists(x: np.ndarray) -> np.ndarray:
    # ||r_i - r_j||^2 via the usual expansion; clamp tiny negatives from rounding
    sq = np.sum(x * x, axis=1)
    d2 = sq[:, None] + sq[None, :] - 2.0 * (x @ x.T)
    np.maximum(d2, 0.0, out=d2)
    np.fill_diagonal(d2, 0.0)
    return d2


def linear_rsm(r: RepMatrix | np.ndarray) -> RSM:
    """Gram matrix of dot products between instance representations."""
    rep = _as_rep(r)
    s = rep.data @ rep.data.T
    return RSM((s + s.T) / 2.0, KERNEL_LINEAR)


def rbf_rsm(r: RepMatrix | np.ndarray, sigma: float | None = None) -> RSM:
    """Gaussian-kernel RSM.

    When ``sigma`` is omitted it defaults to the median of the N(N-1)/2
    pairwise Euclidean distances; a zero median (at least half the pairs
    coincide) leaves no usable bandwidth and raises DegenerateBandwidthError.
    """
    rep = _as_rep(r)
    if sigma is not None and not (sigma > 0):
        raise ValidationError(f"sigma must be positive, got {sigma}")
    d2 = _pairwise_sq_dists(rep.data)
    if sigma is None:
        iu = np.triu_indices(rep.n_samples, k=1)
        sigma = float(np.median(np.sqrt(d2[iu])))
        if not sigma > 0.0:
            raise DegenerateBandwidthError(
                "median pairwise distance is 0; pass an explicit sigma"
            )
    s = np.exp(-d2 / (2.0 * sigma * sigma))
    np.fill_diagonal(s, 1.0)
    return RSM((s + s.T) / 2.0, KERNEL_RBF, bandwidth=float(sigma))


def distance_rsm(r: RepMatrix | np.ndarray) -> RSM:
    """Pairwise Euclidean distance matrix (zero diagonal)."""
    rep = _as_rep(r)
    s = np.sqrt(_pairwise_sq_dists(rep.data))
    return RSM((s + s.T) / 2.0, KERNEL_DISTANCE)


def build_rsm(r: RepMatrix | np.ndarray, kernel: str, sigma: float | None = None) -> RSM:
    """Dispatch on kernel name; accepts "distance" as an alias."""
    if kernel == KERNEL_LINEAR:
        if sigma is not None:
            raise ValidationError("sigma is only valid for the rbf kernel")
        return linear_rsm(r)
    if kernel == KERNEL_RBF:
        return rbf_rsm(r, sigma=sigma)
    if kernel in (KERNEL_DISTANCE, "distance"):
        if sigma is not None:
            raise ValidationError("sigma is only valid for the rbf kernel")
        return distance_rsm(r)
    raise ValidationError(f"unknown kernel {kernel!r}; expected one of {KERNEL_IDS}")
