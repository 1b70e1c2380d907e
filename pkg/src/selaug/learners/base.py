"""Shared classifier interface: anything fitted exposes n_features and a
predict_proba mapping features to P(label=1)."""

from __future__ import annotations

from typing import Sequence

import numpy as np

from ..data import LabeledExample
from ..errors import DataError


class ProbModel:
    """Base class for fitted probabilistic binary classifiers."""

    n_features: int

    def predict_proba(self, x):
        raise NotImplementedError

    def _as_matrix(self, x) -> tuple[np.ndarray, bool]:
        """Coerce a single feature vector or a matrix to (n, k); returns the
        matrix and whether the input was a single vector."""
        arr = np.ascontiguousarray(np.asarray(x, dtype=np.float64))
        if arr.ndim == 1:
            if arr.shape[0] != self.n_features:
                raise DataError(
                    f"feature dimension mismatch: model expects {self.n_features}, "
                    f"got {arr.shape[0]}"
                )
            return arr.reshape(1, -1), True
        if arr.ndim == 2:
            if arr.shape[1] != self.n_features:
                raise DataError(
                    f"feature dimension mismatch: model expects {self.n_features}, "
                    f"got {arr.shape[1]}"
                )
            return arr, False
        raise DataError(f"expected a vector or matrix of features, got ndim={arr.ndim}")


def predict_proba(model: ProbModel, x) -> float:
    """Probability that the label is 1 for a single feature vector."""
    return float(model.predict_proba(np.asarray(x, dtype=np.float64).reshape(-1)))


def examples_to_arrays(
    examples: Sequence[LabeledExample],
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Stack examples into (X, y, w) float64 arrays, validating finiteness."""
    if len(examples) < 2:
        raise DataError(f"need at least 2 examples to fit, got {len(examples)}")
    k = len(examples[0].x)
    for ex in examples:
        if len(ex.x) != k:
            raise DataError(
                f"example {ex.id} has {len(ex.x)} features, expected {k}"
            )
    X = np.array([ex.x for ex in examples], dtype=np.float64)
    if not np.all(np.isfinite(X)):
        raise DataError("non-finite feature values in training examples")
    y = np.array([ex.label for ex in examples], dtype=np.float64)
    w = np.array([ex.weight for ex in examples], dtype=np.float64)
    return X, y, w
