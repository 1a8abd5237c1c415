"""Model files: versioned JSON documents.

Floats are written with Python's shortest round-trip repr, so a model read
back from disk predicts bit-identically to the one that was saved. Keys are
sorted and no timestamps are stored, so retraining with the same seed gives
a byte-identical file.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Any

import numpy as np

from src.boosting import BoostedModel, InitialMap, InitialMapKind, ResidualBlock
from src.config import config
from src.exceptions import DataError, SchemaMismatch
from src.logging_config import get_logger, log_performance
from src.losses import LinearHead, LossKind
from src.random_features import FeatureNorm, FeatureScheme, RandomFeatureLayer
from src.sandwich import SandwichStructure

logger = get_logger(__name__)


def _array(values) -> np.ndarray:
    return np.asarray(values, dtype=np.float64)


def _layer_to_doc(layer: RandomFeatureLayer) -> dict[str, Any]:
    return {
        "weights": layer.weights.tolist(),
        "biases": layer.biases.tolist(),
        "scheme": layer.scheme.value,
        "scale": float(layer.scale),
        "anchors": None if layer.anchors is None else np.asarray(layer.anchors).tolist(),
    }


def _layer_from_doc(doc: dict[str, Any]) -> RandomFeatureLayer:
    anchors = doc.get("anchors")
    return RandomFeatureLayer(
        weights=_array(doc["weights"]),
        biases=_array(doc["biases"]),
        scheme=FeatureScheme(doc["scheme"]),
        scale=float(doc["scale"]),
        anchors=None if anchors is None else np.asarray(anchors, dtype=np.int64),
    )


def _norm_to_doc(norm: FeatureNorm | None) -> dict[str, Any] | None:
    if norm is None:
        return None
    return {"mean": norm.mean.tolist(), "scale": norm.scale.tolist()}


def _norm_from_doc(doc: dict[str, Any] | None) -> FeatureNorm | None:
    if doc is None:
        return None
    return FeatureNorm(mean=_array(doc["mean"]), scale=_array(doc["scale"]))


def _solution_to_doc(A) -> float | list:
    if np.ndim(A) == 0:
        return float(A)
    return np.asarray(A, dtype=np.float64).tolist()


def _solution_from_doc(value, structure: SandwichStructure):
    if structure is SandwichStructure.SCALAR:
        return float(value)
    return _array(value)


def model_to_document(model: BoostedModel) -> dict[str, Any]:
    """Plain-JSON representation of a trained model."""
    phi0 = model.phi0
    return {
        "schema": config.MODEL_SCHEMA,
        "version": config.MODEL_SCHEMA_VERSION,
        "algorithm": model.algorithm,
        "loss": model.loss.to_dict(),
        "config": model.hyper,
        "phi0": {
            "kind": phi0.kind.value,
            "input_dim": phi0.input_dim,
            "matrix": None if phi0.matrix is None else phi0.matrix.tolist(),
            "layer": None if phi0.layer is None else _layer_to_doc(phi0.layer),
            "norm": _norm_to_doc(phi0.norm),
        },
        "blocks": [
            {
                "layer": _layer_to_doc(block.layer),
                "structure": block.structure.value,
                "A": _solution_to_doc(block.A),
                "step": float(block.step),
                "norm": _norm_to_doc(block.norm),
            }
            for block in model.blocks
        ],
        "W": model.head.W.tolist(),
        "bias": model.head.bias.tolist(),
        "risk_trace": [float(r) for r in model.risk_trace],
        "metadata": model.metadata,
    }


def model_from_document(doc: dict[str, Any], source: str | None = None) -> BoostedModel:
    """Rebuild a model from ``model_to_document`` output.

    Raises:
        SchemaMismatch: Wrong schema id or unsupported version
        DataError: Missing or malformed fields
    """
    if doc.get("schema") != config.MODEL_SCHEMA:
        raise SchemaMismatch("Not a model file", expected=config.MODEL_SCHEMA,
                             found=doc.get("schema"), source=source)
    if doc.get("version") != config.MODEL_SCHEMA_VERSION:
        raise SchemaMismatch("Unsupported model file version", expected=config.MODEL_SCHEMA_VERSION,
                             found=doc.get("version"), source=source)
    try:
        p = doc["phi0"]
        kind = InitialMapKind(p["kind"])
        phi0 = InitialMap(
            kind=kind,
            input_dim=int(p["input_dim"]),
            matrix=None if p["matrix"] is None else _array(p["matrix"]),
            layer=None if p["layer"] is None else _layer_from_doc(p["layer"]),
            norm=_norm_from_doc(p["norm"]),
        )
        blocks = []
        for b in doc["blocks"]:
            structure = SandwichStructure(b["structure"])
            blocks.append(ResidualBlock(
                layer=_layer_from_doc(b["layer"]),
                structure=structure,
                A=_solution_from_doc(b["A"], structure),
                step=float(b["step"]),
                norm=_norm_from_doc(b["norm"]),
            ))
        W = _array(doc["W"])
        head = LinearHead(W=W.reshape(phi0.width, -1), bias=_array(doc["bias"]))
        loss = LossKind(doc["loss"]["name"], doc["loss"]["n_classes"])
        return BoostedModel(
            phi0=phi0,
            blocks=tuple(blocks),
            head=head,
            loss=loss,
            algorithm=str(doc["algorithm"]),
            hyper=dict(doc.get("config") or {}),
            risk_trace=tuple(float(r) for r in doc.get("risk_trace", [])),
            metadata=dict(doc.get("metadata") or {}),
        )
    except (KeyError, TypeError, ValueError) as e:
        raise DataError(f"Malformed model file: {e!r}", source=source, component="serialization") from e


def dumps_model(model: BoostedModel) -> str:
    return json.dumps(model_to_document(model), sort_keys=True, indent=2) + "\n"


@log_performance
def save_model(model: BoostedModel, path: str | Path) -> Path:
    """Write ``model`` as JSON; parent directories are created."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(dumps_model(model), encoding="utf-8")
    logger.info("Model saved", path=str(path), blocks=model.n_blocks)
    return path


@log_performance
def load_model(path: str | Path) -> BoostedModel:
    """Read a model written by ``save_model``.

    Raises:
        DataError: File missing or not JSON
        SchemaMismatch: Not a model file of a supported version
    """
    path = Path(path)
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except OSError as e:
        raise DataError(f"Cannot read model file: {e}", source=str(path), component="serialization") from e
    except json.JSONDecodeError as e:
        raise DataError(f"Model file is not valid JSON: {e}", source=str(path),
                        component="serialization") from e
    if not isinstance(doc, dict):
        raise DataError("Model file must hold a JSON object", source=str(path), component="serialization")
    return model_from_document(doc, source=str(path))
