"""Learner dispatch and out-of-fold probability estimation.

Cross-fitting keeps decision-model probabilities honest: each instance is
scored by a model that never saw it, which prevents in-sample overfitting
from leaking optimistically small or large propensities into augmentation.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from ..data import Dataset, LabeledExample, Provenance
from ..errors import ConfigError, DataError
from ..seeding import derive_seed, rng_from
from .base import ProbModel
from .forest import ForestParams, fit_forest
from .logistic import LogisticParams, fit_logistic
from .tree import TreeParams, fit_tree

LEARNER_KINDS = ("tree", "forest", "logistic")


@dataclass(frozen=True)
class LearnerSpec:
    """Which learner to fit and with what parameters."""

    kind: str = "forest"
    tree: TreeParams = field(default_factory=TreeParams)
    forest: ForestParams = field(default_factory=ForestParams)
    logistic: LogisticParams = field(default_factory=LogisticParams)

    def __post_init__(self):
        if self.kind not in LEARNER_KINDS:
            raise ConfigError(
                f"learner kind must be one of {LEARNER_KINDS}, got {self.kind!r}"
            )

    def fit(self, examples: Sequence[LabeledExample], seed: int) -> ProbModel:
        if self.kind == "tree":
            return fit_tree(examples, self.tree, seed)
        if self.kind == "forest":
            return fit_forest(examples, self.forest, seed)
        return fit_logistic(
            examples,
            l2=self.logistic.l2,
            max_iter=self.logistic.max_iter,
            tol=self.logistic.tol,
            seed=seed,
        )

    @classmethod
    def from_table(cls, table: Mapping) -> "LearnerSpec":
        """Build from a flat config table, e.g.
        {kind="forest", n_trees=100, max_depth=8, mtry=0 (auto), ...}."""
        known = {
            "kind", "n_trees", "bootstrap", "max_depth", "min_leaf", "mtry",
            "laplace", "l2", "max_iter", "tol",
        }
        unknown = set(table) - known
        if unknown:
            raise ConfigError(f"unknown learner option(s): {sorted(unknown)}")
        kind = table.get("kind", "forest")
        mtry = table.get("mtry", 0)
        tree = TreeParams(
            max_depth=int(table.get("max_depth", TreeParams.max_depth)),
            min_leaf=int(table.get("min_leaf", TreeParams.min_leaf)),
            mtry=int(mtry) if mtry else None,
            laplace=float(table.get("laplace", TreeParams.laplace)),
        )
        forest = ForestParams(
            n_trees=int(table.get("n_trees", ForestParams.n_trees)),
            tree=tree,
            bootstrap=bool(table.get("bootstrap", ForestParams.bootstrap)),
        )
        logistic = LogisticParams(
            l2=float(table.get("l2", LogisticParams.l2)),
            max_iter=int(table.get("max_iter", LogisticParams.max_iter)),
            tol=float(table.get("tol", LogisticParams.tol)),
        )
        return cls(kind=kind, tree=tree, forest=forest, logistic=logistic)


def _usable_instances(dataset: Dataset, target: str):
    if target == "decision":
        return list(dataset.instances), lambda inst: inst.d
    if target == "outcome":
        return [i for i in dataset.instances if i.d == 1], lambda inst: inst.y
    raise ConfigError(f"target must be 'decision' or 'outcome', got {target!r}")


def cross_fit_probs(
    dataset: Dataset,
    target: str,
    spec: LearnerSpec,
    folds: int = 5,
    seed: int = 0,
) -> dict[int, float]:
    """Out-of-fold probabilities for every usable instance.

    Instances are shuffled once, partitioned into `folds` near-equal folds,
    and each fold is scored by the model fit on the remaining ones.
    """
    if folds < 2:
        raise ConfigError(f"folds must be >= 2, got {folds}")
    usable, label_of = _usable_instances(dataset, target)
    n = len(usable)
    if n < folds:
        raise DataError(f"fewer instances ({n}) than folds ({folds})")
    perm = rng_from(seed).permutation(n)
    base, rem = divmod(n, folds)
    out: dict[int, float] = {}
    start = 0
    for f in range(folds):
        size = base + (1 if f < rem else 0)
        fold_pos = set(perm[start : start + size].tolist())
        start += size
        train_ex = [
            LabeledExample(
                id=inst.id, x=inst.x, label=label_of(inst), provenance=Provenance.OBSERVED
            )
            for j, inst in enumerate(usable)
            if j not in fold_pos
        ]
        model = spec.fit(train_ex, derive_seed(seed, f))
        held = [usable[j] for j in sorted(fold_pos)]
        X = np.array([inst.x for inst in held], dtype=np.float64)
        probs = np.atleast_1d(model.predict_proba(X))
        for inst, p in zip(held, probs):
            out[inst.id] = float(p)
    return out


def fit_labeled(
    dataset: Dataset, target: str, spec: LearnerSpec, seed: int
) -> ProbModel:
    """Fit one model on all usable instances of the dataset."""
    usable, label_of = _usable_instances(dataset, target)
    examples = [
        LabeledExample(
            id=inst.id, x=inst.x, label=label_of(inst), provenance=Provenance.OBSERVED
        )
        for inst in usable
    ]
    return spec.fit(examples, seed)
