"""Versioned JSON serialization for fitted models.

Floats are emitted with repr precision so a saved model predicts
bit-identically after reload.
"""

from __future__ import annotations

import json
from pathlib import Path

from ..errors import DataError
from .base import ProbModel
from .forest import ForestModel
from .logistic import LogisticModel
from .tree import TreeModel

MODEL_FORMAT = "selaug-model"
MODEL_VERSION = 1


def _tree_payload(tree: TreeModel) -> dict:
    return {
        "feature": tree.feature.tolist(),
        "threshold": tree.threshold.tolist(),
        "left": tree.left.tolist(),
        "right": tree.right.tolist(),
        "prob": tree.prob.tolist(),
    }


def _tree_from_payload(n_features: int, payload: dict) -> TreeModel:
    return TreeModel(
        n_features,
        payload["feature"],
        payload["threshold"],
        payload["left"],
        payload["right"],
        payload["prob"],
    )


def model_to_dict(model: ProbModel) -> dict:
    doc = {
        "format": MODEL_FORMAT,
        "version": MODEL_VERSION,
        "n_features": model.n_features,
    }
    if isinstance(model, TreeModel):
        doc["kind"] = "tree"
        doc["nodes"] = _tree_payload(model)
    elif isinstance(model, ForestModel):
        doc["kind"] = "forest"
        doc["trees"] = [_tree_payload(t) for t in model.trees]
    elif isinstance(model, LogisticModel):
        doc["kind"] = "logistic"
        doc["coef"] = model.coef.tolist()
        doc["intercept"] = model.intercept
    else:
        raise DataError(f"cannot serialize model of type {type(model).__name__}")
    return doc


def model_from_dict(doc: dict) -> ProbModel:
    if doc.get("format") != MODEL_FORMAT:
        raise DataError(f"not a model file (format={doc.get('format')!r})")
    if doc.get("version") != MODEL_VERSION:
        raise DataError(
            f"unsupported model file version {doc.get('version')!r} "
            f"(expected {MODEL_VERSION})"
        )
    kind = doc.get("kind")
    k = int(doc["n_features"])
    if kind == "tree":
        return _tree_from_payload(k, doc["nodes"])
    if kind == "forest":
        return ForestModel(k, [_tree_from_payload(k, t) for t in doc["trees"]])
    if kind == "logistic":
        return LogisticModel(doc["coef"], doc["intercept"], converged=True, n_iter=0)
    raise DataError(f"unknown model kind {kind!r}")


def save_model(model: ProbModel, path: str | Path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as fh:
        json.dump(model_to_dict(model), fh, sort_keys=True, separators=(",", ":"))
        fh.write("\n")


def load_model(path: str | Path) -> ProbModel:
    with open(path) as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise DataError(f"{path}: invalid JSON ({exc})") from None
    return model_from_dict(doc)
