"""Evaluation: ROC/AUC, calibration, score histograms, and the
decision-vs-outcome agreement table, computed on the observed test subset,
the augmented test set, and (when ground truth is available) the full test
set.

The augmented test set parallels training augmentation: screened-in
instances keep their observed outcome, and instances whose screen-in
probability falls below epsilon enter with label 0. Low-FPR behaviour is
summarised by a partial AUC over FPR in [0, 0.2], where extrapolation damage
concentrates.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .augment import HISTOGRAM_BINS
from .data import Dataset, format_float
from .errors import ConfigError, DataError
from .learners.base import ProbModel

LOW_FPR_LIMIT = 0.2

OBSERVED_SET = "observed"
AUGMENTED_SET = "augmented"
FULL_SET = "full"


@dataclass(frozen=True)
class RocCurve:
    """Operating points swept over descending score thresholds; tied scores
    collapse into a single step. The first threshold is +inf (predict
    nothing positive)."""

    fpr: tuple[float, ...]
    tpr: tuple[float, ...]
    thresholds: tuple[float, ...]
    auc: float

    def partial_auc(self, max_fpr: float = LOW_FPR_LIMIT) -> float:
        """Area under the curve restricted to FPR in [0, max_fpr], normalised
        by max_fpr so a perfect classifier scores 1."""
        if not 0.0 < max_fpr <= 1.0:
            raise ConfigError(f"max_fpr must be in (0, 1], got {max_fpr}")
        fpr = np.asarray(self.fpr)
        tpr = np.asarray(self.tpr)
        keep = fpr < max_fpr
        xs = np.append(fpr[keep], max_fpr)
        ys = np.append(tpr[keep], np.interp(max_fpr, fpr, tpr))
        return float(np.trapz(ys, xs) / max_fpr)


def roc_and_auc(scores: Sequence[float], labels: Sequence[int]) -> RocCurve:
    """Standard threshold sweep; AUC by the trapezoidal rule, which equals
    pairwise concordance with half credit for ties."""
    s = np.asarray(scores, dtype=np.float64)
    y = np.asarray(labels, dtype=np.int64)
    if s.shape != y.shape or s.ndim != 1:
        raise DataError("scores and labels must be equal-length vectors")
    if s.size == 0:
        raise DataError("empty input")
    if not np.all(np.isfinite(s)):
        raise DataError("non-finite scores")
    n_pos = int((y == 1).sum())
    n_neg = int((y == 0).sum())
    if n_pos + n_neg != y.size:
        raise DataError("labels must be 0 or 1")
    if n_pos == 0 or n_neg == 0:
        raise DataError("AUC undefined: only one class present")

    order = np.argsort(-s, kind="stable")
    s_sorted = s[order]
    y_sorted = y[order]
    cum_tp = np.cumsum(y_sorted)
    cum_fp = np.cumsum(1 - y_sorted)
    last_of_group = np.nonzero(np.append(s_sorted[:-1] != s_sorted[1:], True))[0]
    tpr = np.concatenate(([0.0], cum_tp[last_of_group] / n_pos))
    fpr = np.concatenate(([0.0], cum_fp[last_of_group] / n_neg))
    thresholds = np.concatenate(([np.inf], s_sorted[last_of_group]))
    auc = float(np.trapz(tpr, fpr))
    return RocCurve(
        fpr=tuple(map(float, fpr)),
        tpr=tuple(map(float, tpr)),
        thresholds=tuple(map(float, thresholds)),
        auc=auc,
    )


@dataclass(frozen=True)
class CalibrationBin:
    lower: float
    upper: float
    count: int
    mean_predicted: float | None
    empirical_rate: float | None


@dataclass(frozen=True)
class CalibrationReport:
    bins: tuple[CalibrationBin, ...]
    ece: float
    n: int


def calibration(
    probs: Sequence[float], labels: Sequence[int], n_bins: int = 10
) -> CalibrationReport:
    """Equal-width reliability bins over [0, 1] (last bin right-closed); ECE
    is the count-weighted mean absolute gap over non-empty bins."""
    p = np.asarray(probs, dtype=np.float64)
    y = np.asarray(labels, dtype=np.int64)
    if p.shape != y.shape or p.ndim != 1:
        raise DataError("probs and labels must be equal-length vectors")
    if p.size == 0:
        raise DataError("empty input")
    if np.any((p < 0) | (p > 1)) or not np.all(np.isfinite(p)):
        raise DataError("probabilities must lie in [0, 1]")
    if n_bins < 1:
        raise ConfigError(f"n_bins must be >= 1, got {n_bins}")
    idx = np.minimum((p * n_bins).astype(np.int64), n_bins - 1)
    n = p.size
    bins = []
    ece = 0.0
    for b in range(n_bins):
        mask = idx == b
        count = int(mask.sum())
        if count:
            mean_pred = float(p[mask].mean())
            emp = float(y[mask].mean())
            ece += (count / n) * abs(mean_pred - emp)
        else:
            mean_pred = emp = None
        bins.append(
            CalibrationBin(
                lower=b / n_bins,
                upper=(b + 1) / n_bins,
                count=count,
                mean_predicted=mean_pred,
                empirical_rate=emp,
            )
        )
    return CalibrationReport(bins=tuple(bins), ece=float(ece), n=n)


@dataclass(frozen=True)
class AgreementRow:
    id: int
    decision_score: float
    outcome_score: float
    observed_outcome: int | None  # None = outcome censored


@dataclass(frozen=True)
class DecileSummary:
    decile: int
    count: int
    mean_decision_score: float | None
    mean_outcome_score: float | None


@dataclass(frozen=True)
class AgreementTable:
    rows: tuple[AgreementRow, ...]
    deciles: tuple[DecileSummary, ...]


def _decile_summaries(rows: Sequence[AgreementRow]) -> tuple[DecileSummary, ...]:
    ordered = sorted(rows, key=lambda r: (r.decision_score, r.id))
    n = len(ordered)
    out = []
    for g in range(10):
        lo = (g * n) // 10
        hi = ((g + 1) * n) // 10
        chunk = ordered[lo:hi]
        if chunk:
            md = sum(r.decision_score for r in chunk) / len(chunk)
            mo = sum(r.outcome_score for r in chunk) / len(chunk)
        else:
            md = mo = None
        out.append(
            DecileSummary(
                decile=g, count=len(chunk), mean_decision_score=md, mean_outcome_score=mo
            )
        )
    return tuple(out)


def _agreement_rows(
    test: Dataset, decision_scores: np.ndarray, outcome_scores: np.ndarray
) -> tuple[AgreementRow, ...]:
    return tuple(
        AgreementRow(
            id=inst.id,
            decision_score=float(ds),
            outcome_score=float(os_),
            observed_outcome=inst.y if inst.d == 1 else None,
        )
        for inst, ds, os_ in zip(test.instances, decision_scores, outcome_scores)
    )


def agreement_table(
    test: Dataset, decision_model: ProbModel, outcome_model: ProbModel
) -> AgreementTable:
    """Per-instance decision and outcome scores side by side, with the
    observed outcome where the case was screened in; summarised as mean
    outcome score within decision-score deciles."""
    X = test.feature_matrix()
    rows = _agreement_rows(
        test,
        np.atleast_1d(decision_model.predict_proba(X)),
        np.atleast_1d(outcome_model.predict_proba(X)),
    )
    return AgreementTable(rows=rows, deciles=_decile_summaries(rows))


@dataclass(frozen=True)
class EvalReport:
    epsilon: float
    test_sets: tuple[str, ...]
    set_sizes: dict[str, int]
    roc: dict[str, dict[str, RocCurve]]  # model -> test set -> curve
    partial_auc_low_fpr: dict[str, dict[str, float]]
    decision_calibration: CalibrationReport
    histogram_counts: tuple[int, ...]
    histogram_edges: tuple[float, ...]
    agreement: dict[str, AgreementTable]

    def auc(self, model: str, test_set: str) -> float:
        return self.roc[model][test_set].auc


def evaluate_models(
    models: Mapping[str, ProbModel],
    test: Dataset,
    truth: Mapping[int, int] | None,
    decision_probs_test: Mapping[int, float],
    epsilon: float,
) -> EvalReport:
    """Evaluate every model on identical instance sets.

    observed: screened-in test instances with their outcomes. augmented:
    those plus instances with decision probability below epsilon, labeled 0.
    full: all test instances against the ground-truth table (only when truth
    is supplied; it must then cover the whole test set).
    """
    if not models:
        raise ConfigError("no models to evaluate")
    if not 0.0 < epsilon < 1.0:
        raise ConfigError(f"epsilon must be in (0, 1), got {epsilon}")
    for inst in test.instances:
        if inst.id not in decision_probs_test:
            raise DataError(f"missing decision probability for test id {inst.id}")

    observed_idx = [i for i, inst in enumerate(test.instances) if inst.d == 1]
    observed_labels = [test.instances[i].y for i in observed_idx]
    aug_idx: list[int] = []
    aug_labels: list[int] = []
    for i, inst in enumerate(test.instances):
        if inst.d == 1:
            aug_idx.append(i)
            aug_labels.append(inst.y)
        elif decision_probs_test[inst.id] < epsilon:
            aug_idx.append(i)
            aug_labels.append(0)
    sets: dict[str, tuple[list[int], list[int]]] = {
        OBSERVED_SET: (observed_idx, observed_labels),
        AUGMENTED_SET: (aug_idx, aug_labels),
    }
    if truth is not None:
        missing = [inst.id for inst in test.instances if inst.id not in truth]
        if missing:
            raise DataError(
                f"ground truth missing for {len(missing)} test instance(s), "
                f"first id {missing[0]}"
            )
        sets[FULL_SET] = (
            list(range(len(test.instances))),
            [truth[inst.id] for inst in test.instances],
        )

    X = test.feature_matrix()
    dscores = np.array([decision_probs_test[inst.id] for inst in test.instances])
    roc: dict[str, dict[str, RocCurve]] = {}
    pauc: dict[str, dict[str, float]] = {}
    agreement: dict[str, AgreementTable] = {}
    for name, model in models.items():
        scores = np.atleast_1d(model.predict_proba(X))
        roc[name] = {}
        pauc[name] = {}
        for set_name, (idxs, labels) in sets.items():
            curve = roc_and_auc(scores[idxs], labels)
            roc[name][set_name] = curve
            pauc[name][set_name] = curve.partial_auc(LOW_FPR_LIMIT)
        rows = _agreement_rows(test, dscores, scores)
        agreement[name] = AgreementTable(rows=rows, deciles=_decile_summaries(rows))

    decisions = [inst.d for inst in test.instances]
    cal = calibration(dscores, decisions)
    counts, edges = np.histogram(dscores, bins=HISTOGRAM_BINS, range=(0.0, 1.0))
    return EvalReport(
        epsilon=epsilon,
        test_sets=tuple(sets),
        set_sizes={name: len(idxs) for name, (idxs, _) in sets.items()},
        roc=roc,
        partial_auc_low_fpr=pauc,
        decision_calibration=cal,
        histogram_counts=tuple(int(c) for c in counts),
        histogram_edges=tuple(float(e) for e in edges),
        agreement=agreement,
    )


def _threshold_json(t: float) -> float | None:
    return None if math.isinf(t) else t


def report_to_dict(report: EvalReport) -> dict:
    """Plain-dict form of the report, strictly JSON-serializable."""
    return {
        "epsilon": report.epsilon,
        "test_sets": list(report.test_sets),
        "set_sizes": dict(report.set_sizes),
        "roc": {
            model: {
                set_name: {
                    "fpr": list(curve.fpr),
                    "tpr": list(curve.tpr),
                    "thresholds": [_threshold_json(t) for t in curve.thresholds],
                    "auc": curve.auc,
                }
                for set_name, curve in curves.items()
            }
            for model, curves in report.roc.items()
        },
        "partial_auc_low_fpr": {
            model: dict(vals) for model, vals in report.partial_auc_low_fpr.items()
        },
        "low_fpr_limit": LOW_FPR_LIMIT,
        "decision_calibration": {
            "ece": report.decision_calibration.ece,
            "n": report.decision_calibration.n,
            "bins": [
                {
                    "lower": b.lower,
                    "upper": b.upper,
                    "count": b.count,
                    "mean_predicted": b.mean_predicted,
                    "empirical_rate": b.empirical_rate,
                }
                for b in report.decision_calibration.bins
            ],
        },
        "histogram": {
            "counts": list(report.histogram_counts),
            "edges": list(report.histogram_edges),
        },
        "agreement_deciles": {
            model: [
                {
                    "decile": d.decile,
                    "count": d.count,
                    "mean_decision_score": d.mean_decision_score,
                    "mean_outcome_score": d.mean_outcome_score,
                }
                for d in table.deciles
            ]
            for model, table in report.agreement.items()
        },
    }


def write_report_files(report: EvalReport, out_dir: str | Path) -> list[Path]:
    """Write report.json plus flat CSVs (roc_<model>_<set>.csv,
    calibration.csv, agreement.csv, histogram.csv); returns written paths."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []

    path = out_dir / "report.json"
    with open(path, "w") as fh:
        json.dump(report_to_dict(report), fh, sort_keys=True, indent=2)
        fh.write("\n")
    written.append(path)

    for model in sorted(report.roc):
        curves = report.roc[model]
        for set_name, curve in curves.items():
            path = out_dir / f"roc_{model}_{set_name}.csv"
            with open(path, "w", newline="") as fh:
                writer = csv.writer(fh, lineterminator="\n")
                writer.writerow(["fpr", "tpr", "threshold"])
                for f, t, thr in zip(curve.fpr, curve.tpr, curve.thresholds):
                    writer.writerow([format_float(f), format_float(t), format_float(thr)])
            written.append(path)

    path = out_dir / "calibration.csv"
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["lower", "upper", "count", "mean_predicted", "empirical_rate"])
        for b in report.decision_calibration.bins:
            writer.writerow(
                [
                    format_float(b.lower),
                    format_float(b.upper),
                    b.count,
                    "" if b.mean_predicted is None else format_float(b.mean_predicted),
                    "" if b.empirical_rate is None else format_float(b.empirical_rate),
                ]
            )
    written.append(path)

    path = out_dir / "agreement.csv"
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["model", "id", "decision_score", "outcome_score", "observed_outcome"])
        for model, table in report.agreement.items():
            for r in table.rows:
                writer.writerow(
                    [
                        model,
                        r.id,
                        format_float(r.decision_score),
                        format_float(r.outcome_score),
                        "?" if r.observed_outcome is None else r.observed_outcome,
                    ]
                )
    written.append(path)

    path = out_dir / "histogram.csv"
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["bin_lower", "bin_upper", "count"])
        for i, count in enumerate(report.histogram_counts):
            writer.writerow(
                [
                    format_float(report.histogram_edges[i]),
                    format_float(report.histogram_edges[i + 1]),
                    count,
                ]
            )
    written.append(path)
    return written
