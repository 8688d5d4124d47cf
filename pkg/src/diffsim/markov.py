"""Row-stochastic embeddings of RSMs and diffusion-style operator algebra.

Any centered similarity matrix can be pushed into the space of Markov
matrices by the affine map ``P(S) = 1 q^T + alpha(S) C_q(S)`` where
``alpha(S)`` is the largest rescaling that keeps every entry nonnegative:

    alpha(S) = min over C_q(S)_ij != 0 of q_j / |C_q(S)_ij|

The centered part of the embedding is then exactly ``alpha(S) C_q(S)``, so
measures that only see centered, scale-free structure are unchanged by the
embedding.  On top of the embedding this module provides matrix powers
(multi-step transitions), ordered products of several Markov matrices
(alternating diffusion across views), and a diagnostic for how far an
operator has collapsed toward its rank-one stationary background.
"""

from __future__ import annotations

import operator
from dataclasses import dataclass

import numpy as np

from .centering import ProbVector, center_uniform, center_weighted, uniform_prob
from .errors import DegenerateRSMError, FusionDepthExceededError, ValidationError
from .kernels import RSM, RepMatrix

MAX_FUSION_DEPTH = 8

_ENTRY_FLOOR = -1e-12
_ROW_SUM_TOL = 1e-9
_ZERO_RTOL = 1e-12  # entries below this fraction of max|C_q(S)| count as zero

PROVENANCE_EMBEDDED = "embedded"
PROVENANCE_POWERED = "powered"
PROVENANCE_FUSED = "fused"
_PROVENANCES = (PROVENANCE_EMBEDDED, PROVENANCE_POWERED, PROVENANCE_FUSED)


@dataclass(frozen=True)
class MarkovMatrix:
    """An N x N row-stochastic matrix with provenance tracking."""

    data: np.ndarray
    provenance: str

    def __post_init__(self) -> None:
        data = np.asarray(self.data, dtype=np.float64)
        if data.ndim != 2 or data.shape[0] != data.shape[1]:
            raise ValidationError(f"Markov matrix must be square, got shape {data.shape}")
        if not np.all(np.isfinite(data)):
            raise ValidationError("Markov matrix contains NaN or Inf")
        if self.provenance not in _PROVENANCES:
            raise ValidationError(f"unknown provenance {self.provenance!r}")
        if float(data.min()) < _ENTRY_FLOOR:
            raise ValidationError(f"entry {float(data.min())!r} below nonnegativity tolerance")
        row_err = float(np.abs(data.sum(axis=1) - 1.0).max())
        if row_err > _ROW_SUM_TOL:
            raise ValidationError(f"row sums deviate from 1 by {row_err!r}")
        data = np.ascontiguousarray(data)
        data.setflags(write=False)
        object.__setattr__(self, "data", data)

    @property
    def n(self) -> int:
        return int(self.data.shape[0])


@dataclass(frozen=True)
class RepresentationSet:
    """An ordered collection of sample-aligned representations.

    All members share the same number of rows; ambient dimensions may differ.
    Holds at most MAX_FUSION_DEPTH members, the depth up to which fused
    products stay numerically informative.
    """

    members: tuple[RepMatrix, ...]
    layer_labels: tuple[str, ...] | None = None

    def __post_init__(self) -> None:
        members = tuple(
            m if isinstance(m, RepMatrix) else RepMatrix(np.asarray(m)) for m in self.members
        )
        if not 1 <= len(members) <= MAX_FUSION_DEPTH:
            raise ValidationError(
                f"a representation set holds 1..{MAX_FUSION_DEPTH} members, got {len(members)}"
            )
        n = members[0].n_samples
        for i, m in enumerate(members):
            if m.n_samples != n:
                raise ValidationError(
                    f"member {i} has {m.n_samples} samples, expected {n} (sample-aligned)"
                )
        if self.layer_labels is not None:
            labels = tuple(str(x) for x in self.layer_labels)
            if len(labels) != len(members):
                raise ValidationError("layer_labels length must match members")
            object.__setattr__(self, "layer_labels", labels)
        object.__setattr__(self, "members", members)

    def __len__(self) -> int:
        return len(self.members)

    @property
    def n_samples(self) -> int:
        return self.members[0].n_samples


def _rsm_data(s: RSM | np.ndarray) -> np.ndarray:
    if isinstance(s, RSM):
        return s.data
    a = np.asarray(s, dtype=np.float64)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValidationError(f"expected a square matrix, got shape {a.shape}")
    return a


def _centered(s: np.ndarray, q: ProbVector | None) -> tuple[np.ndarray, np.ndarray]:
    n = s.shape[0]
    if q is None:
        return center_uniform(s), np.full(n, 1.0 / n)
    if q.size != n:
        raise ValidationError(f"q has length {q.size} but the matrix is {n}x{n}")
    return center_weighted(s, q), q.q


def _alpha_from_centered(a: np.ndarray, qv: np.ndarray) -> float:
    scale = float(np.abs(a).max())
    if scale == 0.0:
        raise DegenerateRSMError("similarity matrix centers to zero; no embedding scale exists")
    mag = np.abs(a)
    mask = mag > _ZERO_RTOL * scale
    ratios = np.broadcast_to(qv[None, :], a.shape) / np.where(mask, mag, 1.0)
    return float(ratios[mask].min())


def alpha(s: RSM | np.ndarray, q: ProbVector | None = None) -> float:
    """Largest positive rescale of the centered matrix that embeds row-stochastically.

    For uniform q this reduces to ``1 / (N max|HSH|)``.  Raises
    DegenerateRSMError when the centered matrix is entirely zero.
    """
    a, qv = _centered(_rsm_data(s), q)
    return _alpha_from_centered(a, qv)


def markov_embed(s: RSM | np.ndarray, q: ProbVector | None = None) -> MarkovMatrix:
    """Affine shift-and-rescale of an RSM into a Markov matrix.

    Degenerate inputs (centered part identically zero) map to the rank-one
    matrix ``1 q^T`` itself.  Embedded entries always satisfy
    ``0 <= P_ij <= 2 q_j`` up to float tolerance.
    """
    data = _rsm_data(s)
    a, qv = _centered(data, q)
    background = np.broadcast_to(qv[None, :], a.shape)
    try:
        al = _alpha_from_centered(a, qv)
    except DegenerateRSMError:
        return MarkovMatrix(background.copy(), PROVENANCE_EMBEDDED)
    p = background + al * a
    m = MarkovMatrix(p, PROVENANCE_EMBEDDED)
    ceiling = float((p - 2.0 * background).max())
    if ceiling > 1e-12:
        raise ValidationError(f"embedded entry exceeds 2*q background bound by {ceiling!r}")
    return m


def matrix_power(p: MarkovMatrix, t: int) -> MarkovMatrix:
    """t-step transition matrix ``P^t`` via exponentiation by squaring, t >= 1."""
    try:
        t = operator.index(t)
    except TypeError:
        raise ValidationError(f"power must be an integer, got {t!r}") from None
    if t < 1:
        raise ValidationError(f"power must be >= 1, got {t}")
    return MarkovMatrix(np.linalg.matrix_power(p.data, t), PROVENANCE_POWERED)


def ad_fuse(ps: list[MarkovMatrix] | tuple[MarkovMatrix, ...]) -> MarkovMatrix:
    """Ordered product ``P_n P_(n-1) ... P_1`` of at most MAX_FUSION_DEPTH factors.

    The last list member is the leftmost factor, and the product is
    accumulated left to right in that order so results are reproducible.
    """
    ps = list(ps)
    if len(ps) < 1:
        raise ValidationError("fusion needs at least one Markov matrix")
    if len(ps) > MAX_FUSION_DEPTH:
        raise FusionDepthExceededError(
            f"fusion of {len(ps)} matrices exceeds the depth limit {MAX_FUSION_DEPTH}"
        )
    n = ps[0].n
    for i, p in enumerate(ps):
        if not isinstance(p, MarkovMatrix):
            raise ValidationError(f"fusion member {i} is not a MarkovMatrix")
        if p.n != n:
            raise ValidationError(f"fusion member {i} is {p.n}x{p.n}, expected {n}x{n}")
    acc = ps[-1].data
    for k in range(len(ps) - 2, -1, -1):
        acc = acc @ ps[k].data
    return MarkovMatrix(np.array(acc, dtype=np.float64), PROVENANCE_FUSED)


def degeneration_diagnostic(p: MarkovMatrix) -> float:
    """Frobenius distance from P to its rank-one stochastic background.

    The background row is the column-mean vector of P; a value of 0 means the
    operator has fully collapsed onto its stationary rank-one form.
    """
    pi = p.data.mean(axis=0)
    return float(np.linalg.norm(p.data - pi[None, :]))


__all__ = [
    "MAX_FUSION_DEPTH",
    "MarkovMatrix",
    "RepresentationSet",
    "alpha",
    "markov_embed",
    "matrix_power",
    "ad_fuse",
    "degeneration_diagnostic",
    "uniform_prob",
]
