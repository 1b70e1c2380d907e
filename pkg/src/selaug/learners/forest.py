"""Random forest of probability trees.

Each tree fits a weighted bootstrap resample (example weights travel with the
resampled rows) using a seed derived from (seed, tree index), so the ensemble
is reproducible and independent of fitting order. The forest probability is
the unweighted mean of the tree leaf probabilities.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from ..data import LabeledExample
from ..errors import ConfigError
from ..seeding import derive_seed, rng_from
from .base import ProbModel, examples_to_arrays
from .tree import TreeModel, TreeParams, _fit_tree_arrays


@dataclass(frozen=True)
class ForestParams:
    n_trees: int = 200
    tree: TreeParams = field(default_factory=TreeParams)
    bootstrap: bool = True


class ForestModel(ProbModel):
    def __init__(self, n_features: int, trees: Sequence[TreeModel]):
        self.n_features = int(n_features)
        self.trees = tuple(trees)

    @property
    def n_trees(self) -> int:
        return len(self.trees)

    def predict_proba(self, x):
        X, single = self._as_matrix(x)
        acc = np.zeros(X.shape[0], dtype=np.float64)
        for tree in self.trees:
            acc += tree.predict_proba(X)
        acc /= len(self.trees)
        return float(acc[0]) if single else acc


def fit_forest(
    examples: Sequence[LabeledExample], params: ForestParams, seed: int
) -> ForestModel:
    if params.n_trees < 1:
        raise ConfigError(f"n_trees must be >= 1, got {params.n_trees}")
    X, y, w = examples_to_arrays(examples)
    n, k = X.shape
    mtry = params.tree.validate(k)
    trees = []
    for t in range(params.n_trees):
        kernel_seed = derive_seed(seed, t, 0)
        if params.bootstrap:
            idx = rng_from(seed, t, 1).integers(0, n, size=n)
            Xb, yb, wb = X[idx], y[idx], w[idx]
        else:
            Xb, yb, wb = X, y, w
        trees.append(_fit_tree_arrays(Xb, yb, wb, params.tree, mtry, kernel_seed))
    return ForestModel(k, trees)
