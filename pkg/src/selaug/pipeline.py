"""Experiment orchestration: generate -> split -> decision model ->
(optional confidence-threshold relabeling) -> augment -> three outcome
models -> evaluation, with every artifact written under a fixed layout and
hash-listed in a run manifest.

The whole run is a pure function of the experiment config: stage seeds
derive from the master seed with fixed tags, filenames are fixed, JSON is
key-sorted, and floats are written exactly, so identical configs produce
byte-identical output trees.
"""

from __future__ import annotations

import csv
import dataclasses
import hashlib
import json
import math
from contextlib import contextmanager
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from . import __version__
from .augment import (
    AugmentConfig,
    build_augmented,
    ipw_weights,
    positivity_report,
    save_examples,
    save_positivity_report,
)
from .config import ExperimentConfig, config_to_dict
from .data import Dataset, load_dataset, observed_subset, save_dataset, split, format_float
from .errors import ConfigError, DataError, InternalError, SelaugError
from .figures import render_report
from .learners import ProbModel, cross_fit_probs, fit_labeled, load_model, save_model
from .metrics import EvalReport, evaluate_models, write_report_files
from .seeding import derive_seed
from .synthgen import generate, semi_synthetic_transform, save_truth

MANIFEST_FORMAT = "selaug-manifest"
MANIFEST_VERSION = 1

# stage tags for seed derivation from the master seed
SEED_GENERATE = 0
SEED_SPLIT = 1
SEED_PRETRANSFORM_DECISION = 2
SEED_CROSSFIT = 3
SEED_DECISION = 4
SEED_OUTCOME = 5  # + model index

OUTCOME_MODEL_NAMES = ("observed_only", "augmented", "augmented_ipw")


@contextmanager
def _stage(name: str):
    """Tag failures with the pipeline stage that caused them."""
    try:
        yield
    except SelaugError as exc:
        raise type(exc)(f"stage {name}: {exc}") from exc
    except Exception as exc:
        raise InternalError(f"stage {name}: {exc}") from exc


def model_probs(model: ProbModel, dataset: Dataset) -> dict[int, float]:
    """Predicted screen-in probability for every instance, keyed by id."""
    if len(dataset) == 0:
        return {}
    probs = np.atleast_1d(model.predict_proba(dataset.feature_matrix()))
    return {ident: float(p) for ident, p in zip(dataset.ids(), probs)}


def save_probs(probs: Mapping[int, float], path: str | Path) -> None:
    """Two-column CSV `id,prob`, ordered by id."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["id", "prob"])
        for ident in sorted(probs):
            writer.writerow([ident, format_float(probs[ident])])


def load_probs(path: str | Path) -> dict[int, float]:
    path = Path(path)
    out: dict[int, float] = {}
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != ["id", "prob"]:
            raise DataError(f"{path}: expected header 'id,prob', got {header}")
        for rownum, row in enumerate(reader, start=1):
            if len(row) != 2:
                raise DataError(f"row {rownum}: expected 2 columns, got {len(row)}")
            try:
                ident, p = int(row[0]), float(row[1])
            except ValueError:
                raise DataError(f"row {rownum}: malformed cell") from None
            if not (0.0 <= p <= 1.0) or not math.isfinite(p):
                raise DataError(f"row {rownum}: probability out of [0,1]: {p}")
            if ident in out:
                raise DataError(f"row {rownum}: duplicate id {ident}")
            out[ident] = p
    return out


def _sha256(path: Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


def _write_json(doc: dict, path: Path) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as fh:
        json.dump(doc, fh, sort_keys=True, indent=2)
        fh.write("\n")


class _Workspace:
    """Tracks files created during a run so failures leave no partial output."""

    def __init__(self, root: Path):
        self.root = Path(root)
        self.created: list[Path] = []

    def add(self, path: Path | Sequence[Path]) -> None:
        if isinstance(path, (list, tuple)):
            self.created.extend(Path(p) for p in path)
        else:
            self.created.append(Path(path))

    def discard_all(self) -> None:
        dirs = set()
        for p in self.created:
            try:
                p.unlink(missing_ok=True)
            except OSError:
                pass
            dirs.add(p.parent)
        for d in sorted(dirs, key=lambda p: len(p.parts), reverse=True):
            if d != self.root:
                try:
                    d.rmdir()
                except OSError:
                    pass

    def manifest_files(self) -> dict[str, str]:
        return {
            str(p.relative_to(self.root)).replace("\\", "/"): _sha256(p)
            for p in sorted(self.created)
        }


def run_experiment(
    config: ExperimentConfig,
    out_dir: str | Path,
    config_source: str | Path | None = None,
) -> tuple[EvalReport, Path]:
    """Run the full pipeline; returns the evaluation report and the manifest
    path. On any stage failure every file written so far is removed."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    ws = _Workspace(out)
    seed = config.seed
    try:
        with _stage("generate"):
            full = generate(config.dgp, config.n, derive_seed(seed, SEED_GENERATE))
            truth_full = dict(full.truth)
        with _stage("split"):
            train, test = split(
                full.dataset, config.train_fraction, derive_seed(seed, SEED_SPLIT)
            )

        pre_model = None
        if config.semi_synthetic is not None:
            with _stage("transform"):
                pre_model = fit_labeled(
                    train,
                    "decision",
                    config.decision_learner,
                    derive_seed(seed, SEED_PRETRANSFORM_DECISION),
                )
                tr_res = semi_synthetic_transform(
                    train, model_probs(pre_model, train), config.semi_synthetic, truth_full
                )
                te_res = semi_synthetic_transform(
                    test, model_probs(pre_model, test), config.semi_synthetic, truth_full
                )
                train_w, test_w = tr_res.dataset, te_res.dataset
                truth_train, truth_test = dict(tr_res.truth), dict(te_res.truth)
        else:
            train_w, test_w = train, test
            truth_train = {i.id: truth_full[i.id] for i in train.instances}
            truth_test = {i.id: truth_full[i.id] for i in test.instances}

        with _stage("decision-crossfit"):
            probs_train = cross_fit_probs(
                train_w,
                "decision",
                config.decision_learner,
                config.folds,
                derive_seed(seed, SEED_CROSSFIT),
            )
        with _stage("decision-model"):
            decision_model = fit_labeled(
                train_w, "decision", config.decision_learner, derive_seed(seed, SEED_DECISION)
            )
            probs_test = model_probs(decision_model, test_w)

        with _stage("augment"):
            plain_cfg = AugmentConfig(
                epsilon=config.augment.epsilon, weight_mode="none", clip=config.augment.clip
            )
            aug_plain = build_augmented(train_w, probs_train, plain_cfg)
            aug_ipw = ipw_weights(aug_plain, probs_train, config.augment.clip)
            observed = observed_subset(train_w)
            positivity = positivity_report(
                probs_train,
                config.augment.epsilon,
                decisions={i.id: i.d for i in train_w.instances},
            )

        with _stage("outcome-models"):
            training_sets = {
                "observed_only": observed,
                "augmented": list(aug_plain.examples),
                "augmented_ipw": list(aug_ipw.examples),
            }
            models = {
                name: config.outcome_learner.fit(exs, derive_seed(seed, SEED_OUTCOME + j))
                for j, (name, exs) in enumerate(training_sets.items())
            }

        with _stage("evaluate"):
            report = evaluate_models(
                models, test_w, truth_test, probs_test, config.augment.epsilon
            )

        with _stage("write-artifacts"):
            path = out / "config.json"
            _write_json(config_to_dict(config), path)
            ws.add(path)

            for name, ds in [
                ("full", full.dataset),
                ("train", train_w),
                ("test", test_w),
            ]:
                path = out / "data" / f"{name}.csv"
                save_dataset(ds, path)
                ws.add(path)
            for name, table in [
                ("full", truth_full),
                ("train", truth_train),
                ("test", truth_test),
            ]:
                path = out / "data" / f"{name}_truth.csv"
                save_truth(table, path)
                ws.add(path)

            path = out / "probs" / "decision_train.csv"
            save_probs(probs_train, path)
            ws.add(path)
            path = out / "probs" / "decision_test.csv"
            save_probs(probs_test, path)
            ws.add(path)

            if pre_model is not None:
                path = out / "models" / "decision_pretransform.json"
                save_model(pre_model, path)
                ws.add(path)
            path = out / "models" / "decision.json"
            save_model(decision_model, path)
            ws.add(path)
            for name, model in models.items():
                path = out / "models" / f"outcome_{name}.json"
                save_model(model, path)
                ws.add(path)

            path = out / "augmented_train.csv"
            save_examples(aug_ipw.examples, path)
            ws.add(path)
            path = out / "positivity.json"
            save_positivity_report(positivity, path)
            ws.add(path)

            ws.add(write_report_files(report, out / "report"))

        if config.figures:
            with _stage("figures"):
                ws.add(render_report(report, out / "figures"))

        with _stage("manifest"):
            stats = aug_plain.stats
            manifest = {
                "format": MANIFEST_FORMAT,
                "version": MANIFEST_VERSION,
                "package": {"name": "selaug", "version": __version__},
                "config": config_to_dict(config),
                "config_source": str(config_source) if config_source else None,
                "augment_stats": {
                    "observed": stats.observed,
                    "augmented": stats.augmented,
                    "skipped_already_observed": stats.skipped_already_observed,
                    "excluded": stats.excluded,
                },
                "files": ws.manifest_files(),
            }
            manifest_path = out / "manifest.json"
            _write_json(manifest, manifest_path)
    except BaseException:
        ws.discard_all()
        raise
    return report, manifest_path


def run_seed_range(
    config: ExperimentConfig, seeds: Sequence[int], out_dir: str | Path
) -> Path:
    """Run the experiment once per seed under seed_<s>/ subdirectories and
    write a cross-seed summary of AUCs and partial AUCs."""
    if not seeds:
        raise ConfigError("empty seed range")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    rows = []
    for s in seeds:
        cfg = dataclasses.replace(config, seed=int(s))
        report, _ = run_experiment(cfg, out / f"seed_{s}")
        for model in sorted(report.roc):
            for set_name in report.test_sets:
                rows.append(
                    {
                        "seed": int(s),
                        "model": model,
                        "test_set": set_name,
                        "auc": report.auc(model, set_name),
                        "partial_auc_low_fpr": report.partial_auc_low_fpr[model][set_name],
                    }
                )
    summary_csv = out / "summary.csv"
    with open(summary_csv, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["seed", "model", "test_set", "auc", "partial_auc_low_fpr"])
        for r in rows:
            writer.writerow(
                [
                    r["seed"],
                    r["model"],
                    r["test_set"],
                    format_float(r["auc"]),
                    format_float(r["partial_auc_low_fpr"]),
                ]
            )
    _write_json({"runs": rows}, out / "summary.json")
    return out


def run_evaluation(
    test_csv: str | Path,
    decision_model_path: str | Path,
    outcome_model_paths: Mapping[str, str | Path],
    epsilon: float,
    out_dir: str | Path,
    truth_csv: str | Path | None = None,
    figures: bool = True,
) -> EvalReport:
    """Standalone re-evaluation from persisted artifacts; writes the same
    report files as the experiment's evaluate stage."""
    from .synthgen import load_truth  # local import to avoid cycle at module load

    with _stage("load-inputs"):
        test = load_dataset(test_csv)
        truth = load_truth(truth_csv) if truth_csv is not None else None
        decision_model = load_model(decision_model_path)
        models = {name: load_model(p) for name, p in outcome_model_paths.items()}
    with _stage("evaluate"):
        probs_test = model_probs(decision_model, test)
        report = evaluate_models(models, test, truth, probs_test, epsilon)
    out = Path(out_dir)
    ws = _Workspace(out)
    try:
        with _stage("write-artifacts"):
            ws.add(write_report_files(report, out / "report"))
        if figures:
            with _stage("figures"):
                ws.add(render_report(report, out / "figures"))
    except BaseException:
        ws.discard_all()
        raise
    return report
