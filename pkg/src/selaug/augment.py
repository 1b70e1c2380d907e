"""Training-set augmentation from confident expert screen-outs, plus
inverse-probability weighting for the residual selection bias.

The augmented set is the union of the observed examples (d=1, true outcome)
and every instance whose estimated screen-in probability falls below epsilon,
labeled with the expert decision. Screened-in instances below epsilon are
kept once, as observed examples with their true outcome. Instances with d=0
and probability >= epsilon carry no usable label and are excluded.
"""

from __future__ import annotations

import json
import csv
import math
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .data import Dataset, LabeledExample, Provenance, format_float
from .errors import ConfigError, DataError

WEIGHT_MODES = ("none", "ipw")

HISTOGRAM_BINS = 20


@dataclass(frozen=True)
class AugmentConfig:
    epsilon: float = 0.05
    weight_mode: str = "none"
    clip: float = 20.0

    def __post_init__(self):
        if not 0.0 < self.epsilon < 1.0:
            raise ConfigError(f"epsilon must be in (0, 1), got {self.epsilon}")
        if self.weight_mode not in WEIGHT_MODES:
            raise ConfigError(
                f"weight_mode must be one of {WEIGHT_MODES}, got {self.weight_mode!r}"
            )
        if not self.clip > 1.0:
            raise ConfigError(f"clip must be > 1, got {self.clip}")


@dataclass(frozen=True)
class AugmentStats:
    observed: int
    augmented: int
    skipped_already_observed: int
    excluded: int

    @property
    def total(self) -> int:
        return self.observed + self.augmented + self.excluded


@dataclass(frozen=True)
class AugmentedSet:
    examples: tuple[LabeledExample, ...]
    stats: AugmentStats


def _check_probs(ids: Sequence[int], probs: Mapping[int, float]) -> None:
    for ident in ids:
        if ident not in probs:
            raise DataError(f"missing decision probability for id {ident}")
        p = probs[ident]
        if not (0.0 <= p <= 1.0) or not math.isfinite(p):
            raise DataError(f"decision probability for id {ident} out of [0,1]: {p}")


def build_augmented(
    train: Dataset, decision_probs: Mapping[int, float], config: AugmentConfig
) -> AugmentedSet:
    """Construct the augmented training set.

    Observed examples keep their outcome; instances with probability below
    epsilon and d=0 enter with label 0 (the expert decision). With
    weight_mode="ipw" observed examples are reweighted by the clipped inverse
    probability; augmented examples always keep weight 1, since their
    membership is deterministic given the probability cut.
    """
    _check_probs(train.ids(), decision_probs)
    observed: list[LabeledExample] = []
    augmented: list[LabeledExample] = []
    skipped = 0
    excluded = 0
    for inst in train.instances:
        p = decision_probs[inst.id]
        if inst.d == 1:
            observed.append(
                LabeledExample(id=inst.id, x=inst.x, label=inst.y, provenance=Provenance.OBSERVED)
            )
            if p < config.epsilon:
                skipped += 1
        elif p < config.epsilon:
            augmented.append(
                LabeledExample(id=inst.id, x=inst.x, label=inst.d, provenance=Provenance.AUGMENTED)
            )
        else:
            excluded += 1
    result = AugmentedSet(
        examples=tuple(observed + augmented),
        stats=AugmentStats(
            observed=len(observed),
            augmented=len(augmented),
            skipped_already_observed=skipped,
            excluded=excluded,
        ),
    )
    if config.weight_mode == "ipw":
        result = ipw_weights(result, decision_probs, config.clip)
    return result


def ipw_weights(
    aug: AugmentedSet, decision_probs: Mapping[int, float], clip: float
) -> AugmentedSet:
    """Reweight observed examples by min(1/p, clip); augmented examples keep
    weight 1. A zero probability for an observed example is rejected: the
    in-package learners smooth probabilities away from 0, so one signals a
    foreign probability source."""
    if not clip > 1.0:
        raise ConfigError(f"clip must be > 1, got {clip}")
    out = []
    for ex in aug.examples:
        if ex.provenance is Provenance.OBSERVED:
            if ex.id not in decision_probs:
                raise DataError(f"missing decision probability for observed id {ex.id}")
            p = decision_probs[ex.id]
            if p <= 0.0:
                raise DataError(
                    f"observed id {ex.id} has propensity {p}; inverse weight undefined"
                )
            out.append(replace(ex, weight=min(1.0 / p, clip)))
        else:
            out.append(replace(ex, weight=1.0))
    return AugmentedSet(examples=tuple(out), stats=aug.stats)


@dataclass(frozen=True)
class PositivityReport:
    """How much probability mass sits below the augmentation cut, and where
    the screened-in/out groups live on the propensity scale."""

    epsilon: float
    n: int
    count_below_epsilon: int
    mass_below_epsilon: float
    min_prob_d1: float | None
    median_prob_d1: float | None
    min_prob_d0: float | None
    median_prob_d0: float | None
    histogram_counts: tuple[int, ...]
    histogram_edges: tuple[float, ...]

    def to_dict(self) -> dict:
        return {
            "epsilon": self.epsilon,
            "n": self.n,
            "count_below_epsilon": self.count_below_epsilon,
            "mass_below_epsilon": self.mass_below_epsilon,
            "min_prob_d1": self.min_prob_d1,
            "median_prob_d1": self.median_prob_d1,
            "min_prob_d0": self.min_prob_d0,
            "median_prob_d0": self.median_prob_d0,
            "histogram_counts": list(self.histogram_counts),
            "histogram_edges": list(self.histogram_edges),
        }


def _group_stats(values: np.ndarray) -> tuple[float | None, float | None]:
    if values.size == 0:
        return None, None
    return float(values.min()), float(np.median(values))


def positivity_report(
    decision_probs: Mapping[int, float],
    epsilon: float,
    decisions: Mapping[int, int] | None = None,
) -> PositivityReport:
    """Summarise the propensity distribution: mass strictly below epsilon,
    group minima/medians (when decisions are supplied), and a 20-bin
    equal-width histogram over [0, 1]."""
    if not 0.0 < epsilon < 1.0:
        raise ConfigError(f"epsilon must be in (0, 1), got {epsilon}")
    ids = sorted(decision_probs)
    probs = np.array([decision_probs[i] for i in ids], dtype=np.float64)
    n = len(probs)
    below = int((probs < epsilon).sum()) if n else 0
    counts, edges = np.histogram(probs, bins=HISTOGRAM_BINS, range=(0.0, 1.0))
    if decisions is not None:
        d = np.array([decisions[i] for i in ids], dtype=np.int64)
        min1, med1 = _group_stats(probs[d == 1])
        min0, med0 = _group_stats(probs[d == 0])
    else:
        min1 = med1 = min0 = med0 = None
    return PositivityReport(
        epsilon=epsilon,
        n=n,
        count_below_epsilon=below,
        mass_below_epsilon=below / n if n else 0.0,
        min_prob_d1=min1,
        median_prob_d1=med1,
        min_prob_d0=min0,
        median_prob_d0=med0,
        histogram_counts=tuple(int(c) for c in counts),
        histogram_edges=tuple(float(e) for e in edges),
    )


def save_positivity_report(report: PositivityReport, path: str | Path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as fh:
        json.dump(report.to_dict(), fh, sort_keys=True, indent=2)
        fh.write("\n")


def save_examples(examples: Sequence[LabeledExample], path: str | Path) -> None:
    """Audit CSV `id,label,weight,provenance` for an augmented set."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["id", "label", "weight", "provenance"])
        for ex in examples:
            writer.writerow([ex.id, ex.label, format_float(ex.weight), ex.provenance.value])
