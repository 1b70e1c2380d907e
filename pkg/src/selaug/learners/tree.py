"""Single CART-style probability tree.

Greedy axis-aligned splits maximise weighted Gini impurity decrease over a
random feature subset; leaf probabilities are Laplace-smoothed so they never
reach exactly 0 or 1 (keeping downstream inverse-propensity weights finite).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ..data import LabeledExample
from ..errors import ConfigError
from ..seeding import derive_seed
from . import _kernels
from .base import ProbModel, examples_to_arrays


@dataclass(frozen=True)
class TreeParams:
    """max_depth and min_leaf bound growth; mtry (None = ceil(sqrt(k)))
    controls feature subsampling; laplace smooths leaf probabilities."""

    max_depth: int = 8
    min_leaf: int = 5
    mtry: int | None = None
    laplace: float = 1.0

    def validate(self, k: int) -> int:
        """Check invariants against feature count k; returns resolved mtry."""
        if self.max_depth < 1:
            raise ConfigError(f"max_depth must be >= 1, got {self.max_depth}")
        if self.min_leaf < 1:
            raise ConfigError(f"min_leaf must be >= 1, got {self.min_leaf}")
        if self.laplace < 0:
            raise ConfigError(f"laplace must be >= 0, got {self.laplace}")
        mtry = self.mtry if self.mtry is not None else math.ceil(math.sqrt(k))
        if not 1 <= mtry <= k:
            raise ConfigError(f"mtry must be in [1, {k}], got {mtry}")
        return mtry


class TreeModel(ProbModel):
    """Fitted tree stored as flat node arrays; feature < 0 marks a leaf."""

    def __init__(self, n_features, feature, threshold, left, right, prob):
        self.n_features = int(n_features)
        self.feature = np.asarray(feature, dtype=np.int64)
        self.threshold = np.asarray(threshold, dtype=np.float64)
        self.left = np.asarray(left, dtype=np.int64)
        self.right = np.asarray(right, dtype=np.int64)
        self.prob = np.asarray(prob, dtype=np.float64)

    @property
    def n_nodes(self) -> int:
        return len(self.feature)

    @property
    def depth(self) -> int:
        depths = np.zeros(self.n_nodes, dtype=np.int64)
        for node in range(self.n_nodes):
            if self.feature[node] >= 0:
                depths[self.left[node]] = depths[node] + 1
                depths[self.right[node]] = depths[node] + 1
        return int(depths.max())

    def root_split(self) -> tuple[int, float] | None:
        """(feature, threshold) of the root split, or None for a stump."""
        if self.feature[0] < 0:
            return None
        return int(self.feature[0]), float(self.threshold[0])

    def predict_proba(self, x):
        X, single = self._as_matrix(x)
        out = _kernels.predict_tree(
            self.feature, self.threshold, self.left, self.right, self.prob, X
        )
        return float(out[0]) if single else out


def fit_tree(examples: Sequence[LabeledExample], params: TreeParams, seed: int) -> TreeModel:
    X, y, w = examples_to_arrays(examples)
    mtry = params.validate(X.shape[1])
    return _fit_tree_arrays(X, y, w, params, mtry, derive_seed(seed, 0, 0))


def _fit_tree_arrays(
    X: np.ndarray,
    y: np.ndarray,
    w: np.ndarray,
    params: TreeParams,
    mtry: int,
    kernel_seed: int,
) -> TreeModel:
    nodes = _kernels.build_tree(
        np.ascontiguousarray(X),
        y,
        w,
        params.max_depth,
        params.min_leaf,
        mtry,
        params.laplace,
        np.uint64(kernel_seed),
    )
    return TreeModel(X.shape[1], *nodes)
