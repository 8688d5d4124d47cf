"""Similarity measures on RSMs and on sets of representations.

Two base functionals are provided: the normalized HSIC alignment (CKA) and
the Frobenius cosine of double-centered matrices (distance correlation).
Both act only on centered structure and are invariant to separate positive
rescalings of their arguments, so each admits an equivalent evaluation on
the row-stochastic embeddings from :mod:`diffsim.markov` (the ``_via_markov``
variants).  That reformulation is what enables the diffusion-style
extensions: multi-scale variants evaluate the functionals on the t-th power
of the embedded operator, and the alternating-diffusion variants fuse one
operator per layer into a network-level operator before comparing.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .centering import center_uniform
from .errors import DegenerateRSMError, ValidationError
from .kernels import RSM, build_rsm
from .markov import MarkovMatrix, RepresentationSet, ad_fuse, markov_embed, matrix_power

MEASURE_IDS = (
    "cka",
    "distcorr",
    "ms_cka",
    "ms_distcorr",
    "ad_cka",
    "ad_distcorr",
    "blended_ms_distcorr",
)


@dataclass(frozen=True)
class MeasureScore:
    """A scalar similarity score plus the parameters that produced it."""

    value: float
    measure_id: str
    params: Mapping[str, object] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if not np.isfinite(self.value):
            raise ValidationError(f"measure value must be finite, got {self.value!r}")


def _square(s: RSM | MarkovMatrix | np.ndarray, name: str) -> np.ndarray:
    if isinstance(s, (RSM, MarkovMatrix)):
        return s.data
    a = np.asarray(s, dtype=np.float64)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValidationError(f"{name} must be a square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValidationError(f"{name} contains NaN or Inf")
    return a


def _pair(s1, s2) -> tuple[np.ndarray, np.ndarray]:
    a1 = _square(s1, "s1")
    a2 = _square(s2, "s2")
    if a1.shape != a2.shape:
        raise ValidationError(f"matrix shapes differ: {a1.shape} vs {a2.shape}")
    return a1, a2


def hsic(s1, s2) -> float:
    """Empirical HSIC estimate ``tr(S1 H S2 H) / (N-1)^2``.

    Evaluated as the elementwise sum <H S1 H, S2>_F after centering, which
    is O(N^2) and agrees with the trace form for symmetric arguments.
    """
    a1, a2 = _pair(s1, s2)
    n = a1.shape[0]
    if n < 2:
        raise ValidationError("HSIC needs N >= 2 (the estimator divides by (N-1)^2)")
    return float(np.sum(center_uniform(a1) * a2)) / (n - 1) ** 2


# Centered parts this far below the input's own norm carry no usable signal;
# mean subtraction alone injects noise at the 1e-16 level, so a matrix whose
# centered norm is 1e-12 of its norm is numerically indistinguishable from a
# rank-one background (e.g. the uniform embedding of a constant RSM).
_DEGENERATE_RTOL = 1e-12


def _centered_or_degenerate(a: np.ndarray) -> np.ndarray:
    g = center_uniform(a)
    if float(np.linalg.norm(g)) <= _DEGENERATE_RTOL * float(np.linalg.norm(a)):
        raise DegenerateRSMError("matrix centers to (numerically) zero; score undefined")
    return g


def _hsic_ratio(a1: np.ndarray, a2: np.ndarray) -> float:
    # Evaluate all three HSIC terms on the centered matrices: algebraically
    # identical (centering is idempotent), but pairing centered with centered
    # avoids coupling centering noise to the large rank-one background of
    # near-uniform operators (powers and long fusions).
    g1 = _centered_or_degenerate(a1)
    g2 = _centered_or_degenerate(a2)
    n = a1.shape[0]
    scale = (n - 1) ** 2
    cross = float(np.sum(g1 * g2)) / scale
    v1 = float(np.sum(g1 * g1)) / scale
    v2 = float(np.sum(g2 * g2)) / scale
    if not (v1 > 0.0 and v2 > 0.0):
        raise DegenerateRSMError("self-HSIC is zero; score undefined")
    return cross / float(np.sqrt(v1 * v2))


def _cosine_ratio(a1: np.ndarray, a2: np.ndarray) -> float:
    g1 = _centered_or_degenerate(a1)
    g2 = _centered_or_degenerate(a2)
    n1 = float(np.linalg.norm(g1))
    n2 = float(np.linalg.norm(g2))
    return float(np.sum(g1 * g2)) / (n1 * n2)


def _kernel_of(s1, s2) -> str | None:
    k1 = s1.kernel_id if isinstance(s1, RSM) else None
    k2 = s2.kernel_id if isinstance(s2, RSM) else None
    return k1 if k1 == k2 else None


def cka(s1, s2) -> MeasureScore:
    """Centered kernel alignment between two RSMs."""
    a1, a2 = _pair(s1, s2)
    return MeasureScore(_hsic_ratio(a1, a2), "cka", {"kernel_id": _kernel_of(s1, s2)})


def distcorr(s1, s2) -> MeasureScore:
    """Distance correlation: Frobenius cosine of the double-centered RSMs."""
    a1, a2 = _pair(s1, s2)
    return MeasureScore(_cosine_ratio(a1, a2), "distcorr", {"kernel_id": _kernel_of(s1, s2)})


def cka_via_markov(s1, s2) -> MeasureScore:
    """CKA evaluated on the row-stochastic embeddings of both RSMs."""
    a1, a2 = _pair(s1, s2)
    p1 = markov_embed(a1)
    p2 = markov_embed(a2)
    return MeasureScore(
        _hsic_ratio(p1.data, p2.data), "cka", {"kernel_id": _kernel_of(s1, s2), "route": "markov"}
    )


def distcorr_via_markov(s1, s2) -> MeasureScore:
    """Distance correlation evaluated on the row-stochastic embeddings."""
    a1, a2 = _pair(s1, s2)
    p1 = markov_embed(a1)
    p2 = markov_embed(a2)
    return MeasureScore(
        _cosine_ratio(p1.data, p2.data),
        "distcorr",
        {"kernel_id": _kernel_of(s1, s2), "route": "markov"},
    )


def _powered(a: np.ndarray, t: int) -> np.ndarray:
    return matrix_power(markov_embed(a), t).data


def ms_cka(s1, s2, t: int) -> MeasureScore:
    """Multi-scale CKA: the HSIC alignment of the t-step embedded operators."""
    a1, a2 = _pair(s1, s2)
    value = _hsic_ratio(_powered(a1, t), _powered(a2, t))
    return MeasureScore(value, "ms_cka", {"t": int(t), "kernel_id": _kernel_of(s1, s2)})


def ms_distcorr(s1, s2, t: int) -> MeasureScore:
    """Multi-scale distance correlation on the t-step embedded operators."""
    a1, a2 = _pair(s1, s2)
    value = _cosine_ratio(_powered(a1, t), _powered(a2, t))
    return MeasureScore(value, "ms_distcorr", {"t": int(t), "kernel_id": _kernel_of(s1, s2)})


def blended_ms_distcorr(s1, s2) -> MeasureScore:
    """Blend of two-step multi-scale and plain distance correlation.

    Final score is ``(ms_distcorr(t=2) + 2 * distcorr) / 3``.
    """
    ms = ms_distcorr(s1, s2, t=2).value
    plain = distcorr(s1, s2).value
    value = (ms + 2.0 * plain) / 3.0
    return MeasureScore(value, "blended_ms_distcorr", {"t": 2, "kernel_id": _kernel_of(s1, s2)})


def _member_kernels(a: RepresentationSet, kernel: str | Sequence[str]) -> list[str]:
    if isinstance(kernel, str):
        return [kernel] * len(a)
    kernels = [str(k) for k in kernel]
    if len(kernels) != len(a):
        raise ValidationError(
            f"got {len(kernels)} kernels for a set of {len(a)} representations"
        )
    return kernels


def fused_markov(
    a: RepresentationSet,
    kernel: str | Sequence[str] = "linear",
    sigma: float | None = None,
) -> MarkovMatrix:
    """Build one RSM per member, embed each, and fuse into a single operator.

    ``kernel`` is either one kernel name for every member or a per-member
    sequence (mixed kernels are allowed but flagged by callers).
    """
    kernels = _member_kernels(a, kernel)
    ps = [markov_embed(build_rsm(m, k, sigma=sigma)) for m, k in zip(a.members, kernels)]
    return ad_fuse(ps)


def _as_set(a: RepresentationSet | Sequence) -> RepresentationSet:
    return a if isinstance(a, RepresentationSet) else RepresentationSet(tuple(a))


def _ad_params(a1: RepresentationSet, a2: RepresentationSet, kernel) -> dict:
    kernels = set(_member_kernels(a1, kernel)) | set(_member_kernels(a2, kernel))
    params: dict[str, object] = {
        "kernel_id": kernels.pop() if len(kernels) == 1 else "mixed",
        "n_layers": len(a1) if len(a1) == len(a2) else None,
    }
    if params["kernel_id"] == "mixed":
        params["mixed_kernels"] = True
    return params


def _ad_pair(a1, a2, kernel, sigma) -> tuple[np.ndarray, np.ndarray, dict]:
    sa = _as_set(a1)
    sb = _as_set(a2)
    if sa.n_samples != sb.n_samples:
        raise ValidationError(
            f"sets are not sample-aligned: {sa.n_samples} vs {sb.n_samples} samples"
        )
    f1 = fused_markov(sa, kernel, sigma=sigma)
    f2 = fused_markov(sb, kernel, sigma=sigma)
    return f1.data, f2.data, _ad_params(sa, sb, kernel)


def ad_cka(a1, a2, kernel: str | Sequence[str] = "linear", sigma: float | None = None) -> MeasureScore:
    """Network-level CKA between two fused multi-layer operators."""
    g1, g2, params = _ad_pair(a1, a2, kernel, sigma)
    return MeasureScore(_hsic_ratio(g1, g2), "ad_cka", params)


def ad_distcorr(
    a1, a2, kernel: str | Sequence[str] = "euclidean_distance", sigma: float | None = None
) -> MeasureScore:
    """Network-level distance correlation between two fused operators."""
    g1, g2, params = _ad_pair(a1, a2, kernel, sigma)
    return MeasureScore(_cosine_ratio(g1, g2), "ad_distcorr", params)
