"""Render evaluation figures to PNG files alongside the delimited output.

Colors follow the ROC comparison convention: observed-only in blue,
augmented in green, augmented+IPW in yellow. Outputs are byte-deterministic
(fixed geometry, no embedded software metadata) so rerunning an experiment
reproduces identical files.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .metrics import EvalReport

_MODEL_COLORS = {
    "observed_only": "tab:blue",
    "augmented": "tab:green",
    "augmented_ipw": "gold",
}
_FALLBACK_CYCLE = ("tab:purple", "tab:orange", "tab:cyan", "tab:brown")

_SAVE_OPTS = dict(dpi=120, metadata={"Software": None})


def _color_for(name: str, i: int) -> str:
    return _MODEL_COLORS.get(name, _FALLBACK_CYCLE[i % len(_FALLBACK_CYCLE)])


def _roc_figure(report: EvalReport, set_name: str, path: Path) -> None:
    fig, ax = plt.subplots(figsize=(5.0, 4.2))
    for i, (model, curves) in enumerate(report.roc.items()):
        curve = curves[set_name]
        ax.plot(
            curve.fpr,
            curve.tpr,
            color=_color_for(model, i),
            lw=1.8,
            label=f"{model} (AUC {curve.auc:.3f})",
        )
    ax.plot([0, 1], [0, 1], color="gray", lw=0.8, ls="--")
    ax.set_xlabel("false positive rate")
    ax.set_ylabel("true positive rate")
    ax.set_title(f"{set_name} test set (n={report.set_sizes[set_name]})")
    ax.legend(loc="lower right", fontsize=8)
    fig.tight_layout()
    fig.savefig(path, **_SAVE_OPTS)
    plt.close(fig)


def _calibration_figure(report: EvalReport, path: Path) -> None:
    cal = report.decision_calibration
    mids, preds, rates = [], [], []
    for b in cal.bins:
        if b.count:
            mids.append(0.5 * (b.lower + b.upper))
            preds.append(b.mean_predicted)
            rates.append(b.empirical_rate)
    fig, ax = plt.subplots(figsize=(4.6, 4.2))
    ax.plot([0, 1], [0, 1], color="gray", lw=0.8, ls="--")
    ax.plot(preds, rates, marker="o", ms=4, lw=1.4, color="tab:blue")
    ax.set_xlabel("mean predicted screen-in probability")
    ax.set_ylabel("empirical screen-in rate")
    ax.set_title(f"decision model calibration (ECE {cal.ece:.3f})")
    ax.set_xlim(0, 1)
    ax.set_ylim(0, 1)
    fig.tight_layout()
    fig.savefig(path, **_SAVE_OPTS)
    plt.close(fig)


def _histogram_figure(report: EvalReport, path: Path) -> None:
    edges = report.histogram_edges
    counts = report.histogram_counts
    widths = [edges[i + 1] - edges[i] for i in range(len(counts))]
    fig, ax = plt.subplots(figsize=(4.6, 3.8))
    ax.bar(edges[:-1], counts, width=widths, align="edge", color="tab:blue", edgecolor="white")
    ax.set_xlabel("predicted screen-in probability")
    ax.set_ylabel("count")
    ax.set_title("decision scores on the test set")
    fig.tight_layout()
    fig.savefig(path, **_SAVE_OPTS)
    plt.close(fig)


def _agreement_figure(report: EvalReport, model: str, path: Path) -> None:
    table = report.agreement[model]
    groups = {
        "unobserved (?)": ([], [], "lightgray"),
        "outcome 0": ([], [], "tab:blue"),
        "outcome 1": ([], [], "tab:red"),
    }
    for r in table.rows:
        key = (
            "unobserved (?)"
            if r.observed_outcome is None
            else f"outcome {r.observed_outcome}"
        )
        xs, ys, _ = groups[key]
        xs.append(r.decision_score)
        ys.append(r.outcome_score)
    fig, ax = plt.subplots(figsize=(4.6, 4.2))
    for label, (xs, ys, color) in groups.items():
        if xs:
            ax.scatter(xs, ys, s=6, c=color, label=label, alpha=0.6, linewidths=0)
    ax.set_xlabel("decision score P(d=1|x)")
    ax.set_ylabel(f"outcome score ({model})")
    ax.set_xlim(0, 1)
    ax.set_ylim(0, 1)
    ax.set_title(f"decision vs outcome scores: {model}")
    ax.legend(loc="upper left", fontsize=8)
    fig.tight_layout()
    fig.savefig(path, **_SAVE_OPTS)
    plt.close(fig)


def render_report(report: EvalReport, out_dir: str | Path) -> list[Path]:
    """Write all figures for a report; returns the created paths."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []
    for set_name in report.test_sets:
        path = out_dir / f"roc_{set_name}.png"
        _roc_figure(report, set_name, path)
        written.append(path)
    path = out_dir / "calibration.png"
    _calibration_figure(report, path)
    written.append(path)
    path = out_dir / "histogram.png"
    _histogram_figure(report, path)
    written.append(path)
    for model in report.agreement:
        path = out_dir / f"agreement_{model}.png"
        _agreement_figure(report, model, path)
        written.append(path)
    return written
