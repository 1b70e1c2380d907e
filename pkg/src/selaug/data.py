"""Core data model for selectively labeled datasets.

An instance carries features x, a binary expert decision d, and an outcome y
that is observed exactly when d = 1. Datasets round-trip through a canonical
CSV form (fixed column order, 17-significant-digit floats, empty cell for a
censored outcome) so that artifacts diff cleanly and hash stably.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import ConfigError, DataError
from .seeding import rng_from


class Provenance(str, Enum):
    OBSERVED = "observed"
    AUGMENTED = "augmented"


def format_float(v: float) -> str:
    """Canonical decimal rendering: 17 significant digits, exact round trip."""
    return format(float(v), ".17g")


@dataclass(frozen=True)
class Instance:
    """One case: features, expert decision, and (if screened in) the outcome."""

    id: int
    x: tuple[float, ...]
    d: int
    y: int | None = None

    def __post_init__(self):
        if self.id < 0:
            raise DataError(f"instance id must be non-negative, got {self.id}")
        if self.d not in (0, 1):
            raise DataError(f"decision must be 0 or 1, got {self.d!r}")
        if self.d == 1:
            if self.y not in (0, 1):
                raise DataError(f"instance {self.id}: outcome missing but d=1")
        elif self.y is not None:
            raise DataError(f"instance {self.id}: outcome present but d=0")


@dataclass(frozen=True)
class Dataset:
    """Ordered collection of instances with a shared feature schema."""

    instances: tuple[Instance, ...]
    feature_names: tuple[str, ...]

    def __post_init__(self):
        k = len(self.feature_names)
        for inst in self.instances:
            if len(inst.x) != k:
                raise DataError(
                    f"instance {inst.id} has {len(inst.x)} features, expected {k}"
                )
        ids = [inst.id for inst in self.instances]
        if len(set(ids)) != len(ids):
            raise DataError("duplicate instance ids in dataset")

    def __len__(self) -> int:
        return len(self.instances)

    @property
    def k(self) -> int:
        return len(self.feature_names)

    def ids(self) -> list[int]:
        return [inst.id for inst in self.instances]

    def feature_matrix(self) -> np.ndarray:
        return np.array([inst.x for inst in self.instances], dtype=np.float64).reshape(
            len(self.instances), self.k
        )

    def decisions(self) -> np.ndarray:
        return np.array([inst.d for inst in self.instances], dtype=np.int64)

    def by_id(self) -> dict[int, Instance]:
        return {inst.id: inst for inst in self.instances}


@dataclass(frozen=True)
class LabeledExample:
    """A training example; provenance records whether the label was observed
    or absorbed from a confident expert screen-out."""

    id: int
    x: tuple[float, ...]
    label: int
    weight: float = 1.0
    provenance: Provenance = Provenance.OBSERVED

    def __post_init__(self):
        if self.label not in (0, 1):
            raise DataError(f"label must be 0 or 1, got {self.label!r}")
        if not (math.isfinite(self.weight) and self.weight > 0):
            raise DataError(f"weight must be positive and finite, got {self.weight!r}")


def default_feature_names(k: int) -> tuple[str, ...]:
    return tuple(f"f{i}" for i in range(k))


def load_dataset(path: str | Path) -> Dataset:
    """Read a dataset CSV: header ``id,<features...>,d,y``; empty y cell means
    the outcome is censored. Malformed rows raise DataError naming the 1-based
    data row."""
    path = Path(path)
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DataError(f"{path}: empty file, expected a header row") from None
        if len(header) < 4 or header[0] != "id" or header[-2:] != ["d", "y"]:
            raise DataError(
                f"{path}: header must be 'id,<features...>,d,y', got {','.join(header)}"
            )
        feature_names = tuple(header[1:-2])
        ncols = len(header)
        instances: list[Instance] = []
        seen: set[int] = set()
        for rownum, row in enumerate(reader, start=1):
            if len(row) != ncols:
                raise DataError(
                    f"row {rownum}: expected {ncols} columns, got {len(row)}"
                )
            try:
                ident = int(row[0])
            except ValueError:
                raise DataError(f"row {rownum}: id {row[0]!r} is not an integer") from None
            if ident < 0:
                raise DataError(f"row {rownum}: id must be non-negative, got {ident}")
            if ident in seen:
                raise DataError(f"row {rownum}: duplicate id {ident}")
            seen.add(ident)
            feats = []
            for name, cell in zip(feature_names, row[1:-2]):
                try:
                    v = float(cell)
                except ValueError:
                    raise DataError(
                        f"row {rownum}: feature {name} value {cell!r} is not numeric"
                    ) from None
                if not math.isfinite(v):
                    raise DataError(f"row {rownum}: feature {name} is not finite")
                feats.append(v)
            if row[-2] not in ("0", "1"):
                raise DataError(f"row {rownum}: decision must be 0 or 1, got {row[-2]!r}")
            d = int(row[-2])
            ycell = row[-1]
            if ycell == "":
                y = None
            elif ycell in ("0", "1"):
                y = int(ycell)
            else:
                raise DataError(f"row {rownum}: outcome must be 0, 1 or empty, got {ycell!r}")
            if d == 0 and y is not None:
                raise DataError(f"row {rownum}: outcome present but d=0")
            if d == 1 and y is None:
                raise DataError(f"row {rownum}: outcome missing but d=1")
            instances.append(Instance(id=ident, x=tuple(feats), d=d, y=y))
    return Dataset(instances=tuple(instances), feature_names=feature_names)


def save_dataset(dataset: Dataset, path: str | Path) -> None:
    """Write the canonical CSV form (see load_dataset)."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["id", *dataset.feature_names, "d", "y"])
        for inst in dataset.instances:
            writer.writerow(
                [
                    inst.id,
                    *(format_float(v) for v in inst.x),
                    inst.d,
                    "" if inst.y is None else inst.y,
                ]
            )


def split(dataset: Dataset, train_fraction: float, seed: int) -> tuple[Dataset, Dataset]:
    """Disjoint train/test partition.

    A seeded uniform permutation of the indices is cut at
    round(n * train_fraction) (half away from zero); each side keeps the
    original dataset order.
    """
    if not 0.0 < train_fraction < 1.0:
        raise ConfigError(f"train_fraction must be in (0, 1), got {train_fraction}")
    n = len(dataset)
    if n == 0:
        raise ConfigError("cannot split an empty dataset")
    perm = rng_from(seed).permutation(n)
    n_train = int(math.floor(n * train_fraction + 0.5))
    train_idx = sorted(perm[:n_train].tolist())
    test_idx = sorted(perm[n_train:].tolist())
    mk = lambda idxs: Dataset(
        instances=tuple(dataset.instances[i] for i in idxs),
        feature_names=dataset.feature_names,
    )
    return mk(train_idx), mk(test_idx)


def observed_subset(dataset: Dataset) -> list[LabeledExample]:
    """The screened-in instances as labeled examples (weight 1, observed)."""
    return [
        LabeledExample(id=inst.id, x=inst.x, label=inst.y, provenance=Provenance.OBSERVED)
        for inst in dataset.instances
        if inst.d == 1
    ]
