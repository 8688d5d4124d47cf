"""Benchmark protocols grounding similarity scores in model behavior.

Functional-difference targets between two classifiers (accuracy gap, hard
prediction disagreement, mean Jensen-Shannon divergence of the output
distributions) and two evaluation harnesses:

- a pairwise protocol correlating similarity scores with a chosen target
  over all unordered model pairs of a seed-varied family, and
- a reference-model protocol that picks the model with the best
  out-of-distribution accuracy, converts similarity to dissimilarity
  (d = 1 - m) against that reference, and rank-correlates the
  dissimilarities with the OOD accuracy gaps.

Rank correlations are computed with explicit tie handling: Spearman as the
Pearson correlation of average ranks, Kendall as the tie-corrected tau-b by
pair enumeration.  Both use exact accumulation (math.fsum) so results are
reproducible bit-for-bit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .errors import ValidationError, ZeroVarianceError
from .kernels import RSM, RepMatrix, build_rsm
from .markov import RepresentationSet
from . import measures

RESI_TARGETS = ("acc", "jsd", "disagreement")

PROTOCOL_RESI = "resi"
PROTOCOL_GRS_BENCH4 = "grs_bench4"

_ROW_SUM_TOL = 1e-6

AD_MEASURES = ("ad_cka", "ad_distcorr")
PAIRWISE_MEASURES = (
    "cka",
    "distcorr",
    "cka_via_markov",
    "distcorr_via_markov",
    "ms_cka",
    "ms_distcorr",
    "blended_ms_distcorr",
)


@dataclass(frozen=True)
class ModelRecord:
    """One trained model: its layer representations and evaluation outputs."""

    model_id: str
    layer_reps: Mapping[int, RepMatrix]
    outputs: np.ndarray
    labels: np.ndarray
    accuracy: float | None = None
    ood_accuracy: float | None = None

    def __post_init__(self) -> None:
        if not self.model_id:
            raise ValidationError("model_id must be a nonempty string")
        reps = {int(k): v for k, v in dict(self.layer_reps).items()}
        for k, v in reps.items():
            if not isinstance(v, RepMatrix):
                reps[k] = RepMatrix(np.asarray(v))
        outputs = np.asarray(self.outputs, dtype=np.float64)
        if outputs.ndim != 2 or outputs.shape[1] < 2:
            raise ValidationError(f"outputs must be N x C with C >= 2, got shape {outputs.shape}")
        if not np.all(np.isfinite(outputs)):
            raise ValidationError("outputs contain NaN or Inf")
        if outputs.min() < 0.0 or outputs.max() > 1.0:
            raise ValidationError("output probabilities must lie in [0, 1]")
        row_err = float(np.abs(outputs.sum(axis=1) - 1.0).max())
        if row_err > _ROW_SUM_TOL:
            raise ValidationError(f"output rows deviate from probability simplex by {row_err!r}")
        labels = np.asarray(self.labels)
        if labels.ndim != 1 or labels.shape[0] != outputs.shape[0]:
            raise ValidationError(
                f"labels must be a length-{outputs.shape[0]} vector, got shape {labels.shape}"
            )
        if not np.all(labels == labels.astype(np.int64)):
            raise ValidationError("labels must be integral class indices")
        labels = labels.astype(np.int64)
        if labels.min() < 0 or labels.max() >= outputs.shape[1]:
            raise ValidationError("labels out of range [0, C)")
        for val, name in ((self.accuracy, "accuracy"), (self.ood_accuracy, "ood_accuracy")):
            if val is not None and not (0.0 <= float(val) <= 1.0):
                raise ValidationError(f"{name} must lie in [0, 1], got {val!r}")
        outputs.setflags(write=False)
        labels.setflags(write=False)
        object.__setattr__(self, "layer_reps", reps)
        object.__setattr__(self, "outputs", outputs)
        object.__setattr__(self, "labels", labels)


@dataclass(frozen=True)
class MeasureConfig:
    """Which measure to run and how: kernel, diffusion scale, layer set."""

    measure_id: str
    kernel: str | None = None
    sigma: float | None = None
    t: int | None = None
    layer_indices: tuple[int, ...] = (0,)

    def __post_init__(self) -> None:
        if self.measure_id not in PAIRWISE_MEASURES + AD_MEASURES:
            raise ValidationError(f"unknown measure {self.measure_id!r}")
        indices = tuple(int(i) for i in self.layer_indices)
        if len(indices) < 1:
            raise ValidationError("layer_indices must not be empty")
        if len(indices) > 8:
            raise ValidationError(f"at most 8 layer indices are allowed, got {len(indices)}")
        if len(set(indices)) != len(indices):
            raise ValidationError("layer_indices contains duplicates")
        if self.measure_id not in AD_MEASURES and len(indices) != 1:
            raise ValidationError(
                f"measure {self.measure_id!r} compares single layers; give exactly one index"
            )
        object.__setattr__(self, "layer_indices", indices)
        kernel = self.kernel
        if kernel is None:
            kernel = "euclidean_distance" if "distcorr" in self.measure_id else "linear"
        if kernel == "distance":
            kernel = "euclidean_distance"
        object.__setattr__(self, "kernel", kernel)
        if self.measure_id in ("ms_cka", "ms_distcorr"):
            object.__setattr__(self, "t", 2 if self.t is None else int(self.t))


@dataclass(frozen=True)
class PairResult:
    a: str
    b: str
    score: float
    delta: float
    dissimilarity: float | None = None


@dataclass(frozen=True)
class EvalReport:
    """Outcome of one protocol run, self-contained enough to re-derive."""

    protocol: str
    measure_id: str
    target: str | None
    pairs: tuple[PairResult, ...]
    spearman_rho: float
    kendall_tau: float | None
    pair_count: int
    reference_model: str | None = None
    params: Mapping[str, object] = field(default_factory=dict)

    def to_dict(self) -> dict:
        rows = []
        for p in self.pairs:
            row = {"a": p.a, "b": p.b, "score": p.score, "delta": p.delta}
            if p.dissimilarity is not None:
                row["dissimilarity"] = p.dissimilarity
            rows.append(row)
        return {
            "protocol": self.protocol,
            "measure_id": self.measure_id,
            "target": self.target,
            "pair_count": self.pair_count,
            "pairs": rows,
            "spearman_rho": self.spearman_rho,
            "kendall_tau": self.kendall_tau,
            "reference_model": self.reference_model,
            "params": dict(self.params),
        }


def _argmax_rows(outputs: np.ndarray) -> np.ndarray:
    # np.argmax resolves ties toward the lowest class index
    return np.argmax(outputs, axis=1)


def model_accuracy(m: ModelRecord) -> float:
    """Precomputed accuracy when present, else the argmax-correct fraction."""
    if m.accuracy is not None:
        return float(m.accuracy)
    return float(np.mean(_argmax_rows(m.outputs) == m.labels))


def accuracy_diff(f: ModelRecord, g: ModelRecord) -> float:
    """Absolute accuracy gap between two models on the same labels."""
    if f.labels.shape != g.labels.shape or not np.array_equal(f.labels, g.labels):
        raise ValidationError("models were evaluated on different label sets")
    return abs(model_accuracy(f) - model_accuracy(g))


def disagreement(f: ModelRecord, g: ModelRecord) -> float:
    """Fraction of samples whose hard (argmax) predictions differ."""
    if f.outputs.shape != g.outputs.shape:
        raise ValidationError(
            f"output shapes differ: {f.outputs.shape} vs {g.outputs.shape}"
        )
    return float(np.mean(_argmax_rows(f.outputs) != _argmax_rows(g.outputs)))


def jsd_diff(f: ModelRecord, g: ModelRecord) -> float:
    """Mean Jensen-Shannon divergence of output rows, natural logarithm.

    JSD(p, q) = KL(p || m)/2 + KL(q || m)/2 with m = (p + q)/2 and the
    convention 0 ln 0 = 0.  Bounded above by ln 2.
    """
    if f.outputs.shape != g.outputs.shape:
        raise ValidationError(
            f"output shapes differ: {f.outputs.shape} vs {g.outputs.shape}"
        )
    p = f.outputs
    q = g.outputs
    m = 0.5 * (p + q)

    def _kl_rows(a: np.ndarray) -> np.ndarray:
        with np.errstate(divide="ignore", invalid="ignore"):
            terms = a * np.log(a / m)
        terms[a == 0.0] = 0.0
        return terms.sum(axis=1)

    per_row = 0.5 * _kl_rows(p) + 0.5 * _kl_rows(q)
    return float(per_row.mean())


def _check_sequences(xs: Sequence[float], ys: Sequence[float]) -> tuple[list[float], list[float]]:
    xs = [float(v) for v in xs]
    ys = [float(v) for v in ys]
    if len(xs) != len(ys):
        raise ValidationError(f"sequence lengths differ: {len(xs)} vs {len(ys)}")
    if len(xs) < 2:
        raise ValidationError("rank correlation needs at least 2 observations")
    if not all(math.isfinite(v) for v in xs + ys):
        raise ValidationError("sequences contain non-finite values")
    return xs, ys


def _average_ranks(values: list[float]) -> list[float]:
    n = len(values)
    order = sorted(range(n), key=lambda i: values[i])
    ranks = [0.0] * n
    i = 0
    while i < n:
        j = i
        while j + 1 < n and values[order[j + 1]] == values[order[i]]:
            j += 1
        avg = (i + j) / 2 + 1  # 1-based average rank of the tie group
        for k in range(i, j + 1):
            ranks[order[k]] = avg
        i = j + 1
    return ranks


def _pearson(xs: list[float], ys: list[float]) -> float:
    n = len(xs)
    mx = math.fsum(xs) / n
    my = math.fsum(ys) / n
    cov = math.fsum((a - mx) * (b - my) for a, b in zip(xs, ys))
    vx = math.fsum((a - mx) ** 2 for a in xs)
    vy = math.fsum((b - my) ** 2 for b in ys)
    if vx == 0.0 or vy == 0.0:
        raise ZeroVarianceError("constant sequence has no rank variance")
    return cov / math.sqrt(vx * vy)


def spearman(xs: Sequence[float], ys: Sequence[float]) -> float:
    """Spearman rank correlation; ties receive average ranks."""
    xs, ys = _check_sequences(xs, ys)
    return _pearson(_average_ranks(xs), _average_ranks(ys))


def kendall_tau(xs: Sequence[float], ys: Sequence[float]) -> float:
    """Tie-corrected Kendall tau-b by explicit pair enumeration."""
    xs, ys = _check_sequences(xs, ys)
    n = len(xs)
    concordant = discordant = ties_x = ties_y = 0
    for i in range(n):
        for j in range(i + 1, n):
            dx = xs[i] - xs[j]
            dy = ys[i] - ys[j]
            if dx == 0.0:
                ties_x += 1
            if dy == 0.0:
                ties_y += 1
            if dx == 0.0 or dy == 0.0:
                continue
            if (dx > 0.0) == (dy > 0.0):
                concordant += 1
            else:
                discordant += 1
    n0 = n * (n - 1) // 2
    if n0 == ties_x or n0 == ties_y:
        raise ZeroVarianceError("all pairs tied in one sequence")
    return (concordant - discordant) / math.sqrt((n0 - ties_x) * (n0 - ties_y))


def _layer(m: ModelRecord, idx: int) -> RepMatrix:
    if idx not in m.layer_reps:
        raise ValidationError(f"model {m.model_id!r} has no layer {idx}")
    return m.layer_reps[idx]


def _single_rsm(m: ModelRecord, cfg: MeasureConfig) -> RSM:
    return build_rsm(_layer(m, cfg.layer_indices[0]), cfg.kernel, sigma=cfg.sigma)


def _rep_set(m: ModelRecord, cfg: MeasureConfig) -> RepresentationSet:
    members = tuple(_layer(m, i) for i in cfg.layer_indices)
    labels = tuple(str(i) for i in cfg.layer_indices)
    return RepresentationSet(members, layer_labels=labels)


def pair_score(f: ModelRecord, g: ModelRecord, cfg: MeasureConfig) -> float:
    """Similarity of two models under the configured measure."""
    if cfg.measure_id in AD_MEASURES:
        fn = measures.ad_cka if cfg.measure_id == "ad_cka" else measures.ad_distcorr
        return fn(_rep_set(f, cfg), _rep_set(g, cfg), kernel=cfg.kernel, sigma=cfg.sigma).value
    s1 = _single_rsm(f, cfg)
    s2 = _single_rsm(g, cfg)
    if cfg.measure_id == "cka":
        return measures.cka(s1, s2).value
    if cfg.measure_id == "distcorr":
        return measures.distcorr(s1, s2).value
    if cfg.measure_id == "cka_via_markov":
        return measures.cka_via_markov(s1, s2).value
    if cfg.measure_id == "distcorr_via_markov":
        return measures.distcorr_via_markov(s1, s2).value
    if cfg.measure_id == "ms_cka":
        return measures.ms_cka(s1, s2, cfg.t).value
    if cfg.measure_id == "ms_distcorr":
        return measures.ms_distcorr(s1, s2, cfg.t).value
    if cfg.measure_id == "blended_ms_distcorr":
        return measures.blended_ms_distcorr(s1, s2).value
    raise ValidationError(f"unknown measure {cfg.measure_id!r}")


def _target_fn(target: str):
    if target == "acc":
        return accuracy_diff
    if target == "jsd":
        return jsd_diff
    if target == "disagreement":
        return disagreement
    raise ValidationError(f"unknown target {target!r}; expected one of {RESI_TARGETS}")


def _checked_models(models: Sequence[ModelRecord]) -> list[ModelRecord]:
    models = list(models)
    if len(models) < 3:
        raise ValidationError(f"need at least 3 models, got {len(models)}")
    ids = [m.model_id for m in models]
    if len(set(ids)) != len(ids):
        raise ValidationError("model_ids must be unique")
    return sorted(models, key=lambda m: m.model_id)


def _correlate(xs: list[float], ys: list[float], what_x: str, what_y: str) -> float:
    if min(xs) == max(xs):
        raise ZeroVarianceError(f"all {what_x} are identical; rank correlation undefined")
    if min(ys) == max(ys):
        raise ZeroVarianceError(f"all {what_y} are identical; rank correlation undefined")
    return spearman(xs, ys)


def run_resi_test(
    models: Sequence[ModelRecord], measure: MeasureConfig, target: str
) -> EvalReport:
    """Correlate pairwise similarity with a functional-difference target.

    Evaluates the measure and the target on every unordered model pair and
    reports their Spearman rank correlation.  Deterministic under input
    permutation: models are processed in model_id order.
    """
    models = _checked_models(models)
    delta_fn = _target_fn(target)
    pairs: list[PairResult] = []
    for i in range(len(models)):
        for j in range(i + 1, len(models)):
            f, g = models[i], models[j]
            pairs.append(
                PairResult(
                    a=f.model_id,
                    b=g.model_id,
                    score=pair_score(f, g, measure),
                    delta=float(delta_fn(f, g)),
                )
            )
    scores = [p.score for p in pairs]
    deltas = [p.delta for p in pairs]
    rho = _correlate(scores, deltas, "similarity scores", "target deltas")
    return EvalReport(
        protocol=PROTOCOL_RESI,
        measure_id=measure.measure_id,
        target=target,
        pairs=tuple(pairs),
        spearman_rho=rho,
        kendall_tau=None,
        pair_count=len(pairs),
        params={
            "kernel": measure.kernel,
            "t": measure.t,
            "layer_indices": list(measure.layer_indices),
        },
    )


def run_grs_bench4(models: Sequence[ModelRecord], measure: MeasureConfig) -> EvalReport:
    """Reference-model protocol on out-of-distribution accuracy.

    The reference is the model with the highest OOD accuracy (ties broken by
    lexicographically smallest model_id).  Every other model contributes one
    dissimilarity d = 1 - m against the reference and one accuracy gap; the
    report carries both Spearman rho and Kendall tau between them.
    """
    models = _checked_models(models)
    for m in models:
        if m.ood_accuracy is None:
            raise ValidationError(f"model {m.model_id!r} is missing ood_accuracy")
    ref = min(models, key=lambda m: (-float(m.ood_accuracy), m.model_id))
    others = [m for m in models if m.model_id != ref.model_id]
    pairs: list[PairResult] = []
    for m in others:
        score = pair_score(ref, m, measure)
        pairs.append(
            PairResult(
                a=ref.model_id,
                b=m.model_id,
                score=score,
                delta=abs(float(ref.ood_accuracy) - float(m.ood_accuracy)),
                dissimilarity=1.0 - score,
            )
        )
    dissims = [p.dissimilarity for p in pairs]
    deltas = [p.delta for p in pairs]
    rho = _correlate(dissims, deltas, "dissimilarities", "accuracy gaps")
    tau = kendall_tau(dissims, deltas)
    return EvalReport(
        protocol=PROTOCOL_GRS_BENCH4,
        measure_id=measure.measure_id,
        target="ood_accuracy_gap",
        pairs=tuple(pairs),
        spearman_rho=rho,
        kendall_tau=tau,
        pair_count=len(pairs),
        reference_model=ref.model_id,
        params={
            "kernel": measure.kernel,
            "t": measure.t,
            "layer_indices": list(measure.layer_indices),
        },
    )
