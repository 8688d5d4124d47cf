"""Declarative evaluation manifests: JSON schema parsing and ingestion.

A manifest describes one model family and one protocol run:

    {
      "models": [
        {"model_id": "seed0",
         "layers": {"0": "seed0_layer0.rsm", ...},
         "outputs": "seed0_outputs.rsm",
         "labels": "seed0_labels.csv",
         "accuracy": 0.91,            # optional
         "ood_accuracy": 0.55},       # optional
        ...
      ],
      "measure": {"id": "cka", "kernel": "linear", "t": 2,
                  "layer_indices": [0]},
      "protocol": {"id": "resi", "target": "acc"}
    }

Relative file paths resolve against the manifest's directory.  Model ids
must be unique, the measure's layer_indices must exist in every model's
layer map, and at most 8 indices may be selected.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

from .errors import IngestionError, ValidationError
from .evaluation import (
    AD_MEASURES,
    PAIRWISE_MEASURES,
    PROTOCOL_GRS_BENCH4,
    PROTOCOL_RESI,
    RESI_TARGETS,
    MeasureConfig,
    ModelRecord,
)
from .matrixio import read_array, read_matrix


@dataclass(frozen=True)
class ManifestModel:
    model_id: str
    layers: dict[int, str]
    outputs: str
    labels: str
    accuracy: float | None = None
    ood_accuracy: float | None = None


@dataclass(frozen=True)
class EvalManifest:
    models: tuple[ManifestModel, ...]
    measure: MeasureConfig
    protocol_id: str
    target: str | None
    base_dir: Path


def _require(obj: dict, key: str, where: str):
    if key not in obj:
        raise ValidationError(f"manifest {where} is missing required key {key!r}")
    return obj[key]


def _canonical_measure_id(raw: str) -> str:
    mid = str(raw).replace("-", "_")
    if mid not in PAIRWISE_MEASURES + AD_MEASURES:
        raise ValidationError(f"manifest measure id {raw!r} is not recognised")
    return mid


def parse_manifest(doc: dict, base_dir: Path) -> EvalManifest:
    if not isinstance(doc, dict):
        raise ValidationError("manifest root must be a JSON object")
    raw_models = _require(doc, "models", "root")
    if not isinstance(raw_models, list) or not raw_models:
        raise ValidationError("manifest 'models' must be a nonempty list")
    models = []
    for idx, entry in enumerate(raw_models):
        where = f"models[{idx}]"
        model_id = str(_require(entry, "model_id", where))
        raw_layers = _require(entry, "layers", where)
        if not isinstance(raw_layers, dict) or not raw_layers:
            raise ValidationError(f"manifest {where}.layers must be a nonempty object")
        try:
            layers = {int(k): str(v) for k, v in raw_layers.items()}
        except ValueError:
            raise ValidationError(f"manifest {where}.layers keys must be integers") from None
        models.append(
            ManifestModel(
                model_id=model_id,
                layers=layers,
                outputs=str(_require(entry, "outputs", where)),
                labels=str(_require(entry, "labels", where)),
                accuracy=entry.get("accuracy"),
                ood_accuracy=entry.get("ood_accuracy"),
            )
        )
    ids = [m.model_id for m in models]
    if len(set(ids)) != len(ids):
        raise ValidationError("manifest model_ids must be unique")

    raw_measure = _require(doc, "measure", "root")
    measure_id = _canonical_measure_id(_require(raw_measure, "id", "measure"))
    layer_indices = raw_measure.get("layer_indices")
    if layer_indices is None:
        layer_indices = [sorted(models[0].layers)[0]]
    t = raw_measure.get("t")
    measure = MeasureConfig(
        measure_id=measure_id,
        kernel=raw_measure.get("kernel"),
        sigma=raw_measure.get("sigma"),
        t=None if t is None else int(t),
        layer_indices=tuple(int(i) for i in layer_indices),
    )
    for m in models:
        missing = [i for i in measure.layer_indices if i not in m.layers]
        if missing:
            raise ValidationError(
                f"model {m.model_id!r} does not provide layer indices {missing}"
            )

    raw_protocol = _require(doc, "protocol", "root")
    protocol_id = str(_require(raw_protocol, "id", "protocol")).replace("-", "_")
    target = raw_protocol.get("target")
    if protocol_id == PROTOCOL_RESI:
        if target not in RESI_TARGETS:
            raise ValidationError(
                f"protocol 'resi' needs a target from {RESI_TARGETS}, got {target!r}"
            )
    elif protocol_id == PROTOCOL_GRS_BENCH4:
        target = None
    else:
        raise ValidationError(f"unknown protocol {protocol_id!r}")
    return EvalManifest(
        models=tuple(models),
        measure=measure,
        protocol_id=protocol_id,
        target=target,
        base_dir=base_dir,
    )


def load_manifest(path: str | Path) -> EvalManifest:
    """Parse and validate a manifest JSON file."""
    path = Path(path)
    try:
        doc = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path}: not valid JSON: {exc}") from None
    return parse_manifest(doc, path.parent)


def _resolve(base: Path, rel: str) -> Path:
    p = Path(rel)
    return p if p.is_absolute() else base / p


def load_models(manifest: EvalManifest) -> list[ModelRecord]:
    """Materialise every model in the manifest into a ModelRecord."""
    records = []
    for m in manifest.models:
        reps = {}
        for idx in sorted(m.layers):
            layer_path = _resolve(manifest.base_dir, m.layers[idx])
            try:
                reps[idx] = read_matrix(layer_path)
            except FileNotFoundError:
                raise IngestionError(
                    f"model {m.model_id!r}: layer {idx} file not found: {layer_path}"
                ) from None
        try:
            outputs = read_array(_resolve(manifest.base_dir, m.outputs))
        except FileNotFoundError:
            raise IngestionError(f"model {m.model_id!r}: outputs file not found") from None
        try:
            labels = read_array(_resolve(manifest.base_dir, m.labels)).ravel()
        except FileNotFoundError:
            raise IngestionError(f"model {m.model_id!r}: labels file not found") from None
        records.append(
            ModelRecord(
                model_id=m.model_id,
                layer_reps=reps,
                outputs=outputs,
                labels=labels,
                accuracy=m.accuracy,
                ood_accuracy=m.ood_accuracy,
            )
        )
    return records
