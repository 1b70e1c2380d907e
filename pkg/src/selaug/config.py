"""Experiment configuration: one TOML file drives a whole run.

Example:

    seed = 7
    n = 20000
    train_fraction = 0.75
    folds = 5
    out = "runs/demo"

    [dgp]
    k = 10
    beta0 = -1.0
    gamma = 0.0
    expert_noise_sd = 0.3
    t_low = 0.08
    t_high = 0.6
    alpha = 1.0
    # beta = [ ... ]   # optional; omitted -> fixed default draw for this k

    [semi_synthetic]
    enabled = true
    threshold = 0.9

    [augment]
    epsilon = 0.05
    clip = 20.0

    [decision_learner]
    kind = "forest"
    n_trees = 200

    [outcome_learner]
    kind = "forest"
    n_trees = 200

    [report]
    figures = true

The seed is mandatory (supplied here or via --seed); nothing is ever seeded
from the clock.
"""

from __future__ import annotations

import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .augment import AugmentConfig
from .errors import ConfigError
from .learners import LearnerSpec
from .seeding import check_seed
from .synthgen import DgpConfig, SemiSyntheticConfig, default_dgp

_TOP_KEYS = {
    "seed", "n", "train_fraction", "folds", "out",
    "dgp", "semi_synthetic", "augment", "decision_learner", "outcome_learner",
    "report",
}
_DGP_KEYS = {"k", "beta", "beta0", "gamma", "expert_noise_sd", "t_low", "t_high", "alpha"}


@dataclass(frozen=True)
class ExperimentConfig:
    seed: int
    n: int = 20000
    train_fraction: float = 0.75
    folds: int = 5
    out: str | None = None
    dgp: DgpConfig = field(default_factory=default_dgp)
    semi_synthetic: SemiSyntheticConfig | None = None
    augment: AugmentConfig = field(default_factory=AugmentConfig)
    decision_learner: LearnerSpec = field(default_factory=LearnerSpec)
    outcome_learner: LearnerSpec = field(default_factory=LearnerSpec)
    figures: bool = True

    def __post_init__(self):
        check_seed(self.seed)
        if self.n < 1:
            raise ConfigError(f"n must be >= 1, got {self.n}")
        if not 0.0 < self.train_fraction < 1.0:
            raise ConfigError(
                f"train_fraction must be in (0, 1), got {self.train_fraction}"
            )
        if self.folds < 2:
            raise ConfigError(f"folds must be >= 2, got {self.folds}")


def _require_keys(table: Mapping, allowed: set, where: str) -> None:
    unknown = set(table) - allowed
    if unknown:
        raise ConfigError(f"unknown key(s) in {where}: {sorted(unknown)}")


def _parse_dgp(table: Mapping) -> DgpConfig:
    _require_keys(table, _DGP_KEYS, "[dgp]")
    k = int(table.get("k", 10))
    base = default_dgp(k)
    beta = table.get("beta")
    if beta is not None:
        beta = tuple(float(b) for b in beta)
    else:
        beta = base.beta
    return DgpConfig(
        k=k,
        beta=beta,
        beta0=float(table.get("beta0", base.beta0)),
        gamma=float(table.get("gamma", base.gamma)),
        expert_noise_sd=float(table.get("expert_noise_sd", base.expert_noise_sd)),
        t_low=float(table.get("t_low", base.t_low)),
        t_high=float(table.get("t_high", base.t_high)),
        alpha=float(table.get("alpha", base.alpha)),
    )


def config_from_dict(doc: Mapping[str, Any], seed_override: int | None = None) -> ExperimentConfig:
    _require_keys(doc, _TOP_KEYS, "config")
    seed = seed_override if seed_override is not None else doc.get("seed")
    if seed is None:
        raise ConfigError("seed is required (set it in the config or pass --seed)")

    ss = None
    ss_table = doc.get("semi_synthetic")
    if ss_table is not None:
        _require_keys(ss_table, {"enabled", "threshold"}, "[semi_synthetic]")
        if ss_table.get("enabled", True):
            ss = SemiSyntheticConfig(threshold=float(ss_table.get("threshold", 0.9)))

    aug_table = dict(doc.get("augment", {}))
    _require_keys(aug_table, {"epsilon", "weight_mode", "clip"}, "[augment]")
    aug = AugmentConfig(
        epsilon=float(aug_table.get("epsilon", AugmentConfig.epsilon)),
        weight_mode=str(aug_table.get("weight_mode", AugmentConfig.weight_mode)),
        clip=float(aug_table.get("clip", AugmentConfig.clip)),
    )

    report_table = dict(doc.get("report", {}))
    _require_keys(report_table, {"figures"}, "[report]")

    return ExperimentConfig(
        seed=int(seed),
        n=int(doc.get("n", 20000)),
        train_fraction=float(doc.get("train_fraction", 0.75)),
        folds=int(doc.get("folds", 5)),
        out=doc.get("out"),
        dgp=_parse_dgp(doc.get("dgp", {})),
        semi_synthetic=ss,
        augment=aug,
        decision_learner=LearnerSpec.from_table(doc.get("decision_learner", {})),
        outcome_learner=LearnerSpec.from_table(doc.get("outcome_learner", {})),
        figures=bool(report_table.get("figures", True)),
    )


def load_config(path: str | Path, seed_override: int | None = None) -> ExperimentConfig:
    path = Path(path)
    try:
        with open(path, "rb") as fh:
            doc = tomllib.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: invalid TOML ({exc})") from None
    return config_from_dict(doc, seed_override=seed_override)


def _learner_dict(spec: LearnerSpec) -> dict:
    return {
        "kind": spec.kind,
        "n_trees": spec.forest.n_trees,
        "bootstrap": spec.forest.bootstrap,
        "max_depth": spec.tree.max_depth,
        "min_leaf": spec.tree.min_leaf,
        "mtry": spec.tree.mtry,
        "laplace": spec.tree.laplace,
        "l2": spec.logistic.l2,
        "max_iter": spec.logistic.max_iter,
        "tol": spec.logistic.tol,
    }


def config_to_dict(config: ExperimentConfig) -> dict:
    """Canonical echo of the effective configuration (for the run manifest)."""
    return {
        "seed": config.seed,
        "n": config.n,
        "train_fraction": config.train_fraction,
        "folds": config.folds,
        "dgp": {
            "k": config.dgp.k,
            "beta": list(config.dgp.beta),
            "beta0": config.dgp.beta0,
            "gamma": config.dgp.gamma,
            "expert_noise_sd": config.dgp.expert_noise_sd,
            "t_low": config.dgp.t_low,
            "t_high": config.dgp.t_high,
            "alpha": config.dgp.alpha,
        },
        "semi_synthetic": (
            None
            if config.semi_synthetic is None
            else {"threshold": config.semi_synthetic.threshold}
        ),
        "augment": {
            "epsilon": config.augment.epsilon,
            "weight_mode": config.augment.weight_mode,
            "clip": config.augment.clip,
        },
        "decision_learner": _learner_dict(config.decision_learner),
        "outcome_learner": _learner_dict(config.outcome_learner),
        "report": {"figures": config.figures},
    }
