"""Evaluation report rendering: text, machine-readable JSON, CSV, figures.

Figure rendering uses the Agg backend so reports can be produced on
headless machines.
"""

from __future__ import annotations

import csv
import io
import json
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .evaluation import CLASS_LABELS, ComparisonResult, EvaluationReport

_METRIC_ROWS = ("precision", "recall", "f1")


def render_text_report(report: EvaluationReport) -> str:
    """Single-model report: confusion matrix, metric table, error listing."""
    labels = [label.value for label in CLASS_LABELS]
    lines = []
    lines.append(f"Model: {report.model_kind}")
    lines.append(f"Folds: {report.folds}  Seed: {report.seed}")
    lines.append(f"Dataset hash: {report.dataset_hash}")
    lines.append("")
    lines.append("Confusion matrix (rows = actual, cols = predicted)")
    header = " " * 12 + "".join(label.rjust(8) for label in labels)
    lines.append(header)
    for label, row in zip(labels, report.matrix):
        lines.append(label.ljust(12) + "".join(str(v).rjust(8) for v in row))
    lines.append("")
    lines.append(f"Accuracy: {100.0 * report.accuracy:.2f}%")
    for name in labels:
        m = report.per_class[name]
        lines.append(
            f"{name}: precision {100.0 * m.precision:.2f}%  "
            f"recall {100.0 * m.recall:.2f}%  f1 {100.0 * m.f1:.2f}%  "
            f"support {m.support}"
        )
    lines.append(
        "Weighted: precision "
        f"{100.0 * report.weighted['precision']:.2f}%  "
        f"recall {100.0 * report.weighted['recall']:.2f}%  "
        f"f1 {100.0 * report.weighted['f1']:.2f}%"
    )
    if report.misclassified:
        lines.append("Misclassified:")
        for ticker, actual, predicted in report.misclassified:
            lines.append(f"  {ticker}: actual {actual}, predicted {predicted}")
    else:
        lines.append("Misclassified: none")
    return "\n".join(lines) + "\n"


def report_to_json(report: EvaluationReport) -> str:
    return json.dumps(report.to_dict(), sort_keys=True, indent=2) + "\n"


def write_machine_report(report: EvaluationReport, path: str | Path) -> None:
    Path(path).write_text(report_to_json(report), encoding="utf-8")


def metrics_csv(reports) -> str:
    """One row per model: headline metrics plus the misclassified tickers."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(
        [
            "model",
            "folds",
            "seed",
            "accuracy",
            "precision_weighted",
            "recall_weighted",
            "f1_weighted",
            "misclassified",
        ]
    )
    for r in reports:
        writer.writerow(
            [
                r.model_kind,
                r.folds,
                r.seed,
                f"{r.accuracy:.6f}",
                f"{r.weighted['precision']:.6f}",
                f"{r.weighted['recall']:.6f}",
                f"{r.weighted['f1']:.6f}",
                ";".join(t for t, _, _ in r.misclassified),
            ]
        )
    return buf.getvalue()


def render_confusion_figure(report: EvaluationReport, path: str | Path) -> None:
    """2x2 confusion heatmap with counts annotated."""
    labels = [label.value for label in CLASS_LABELS]
    data = [[float(v) for v in row] for row in report.matrix]
    fig, ax = plt.subplots(figsize=(4.2, 3.6))
    im = ax.imshow(data, cmap="Blues")
    ax.set_xticks(range(2), labels)
    ax.set_yticks(range(2), labels)
    ax.set_xlabel("Predicted")
    ax.set_ylabel("Actual")
    ax.set_title(f"{report.model_kind.upper()} confusion matrix")
    peak = max(max(row) for row in data) or 1.0
    for i in range(2):
        for j in range(2):
            color = "white" if data[i][j] > peak / 2 else "black"
            ax.text(j, i, str(report.matrix[i][j]), ha="center", va="center", color=color)
    fig.colorbar(im, ax=ax, shrink=0.85)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def render_comparison_figure(reports, path: str | Path) -> None:
    """Grouped bars: accuracy and weighted precision/recall/F1 per model."""
    reports = list(reports)
    metric_names = ["accuracy", *_METRIC_ROWS]
    width = 0.8 / len(reports)
    fig, ax = plt.subplots(figsize=(6.4, 3.8))
    for i, r in enumerate(reports):
        values = [r.accuracy] + [r.weighted[m] for m in _METRIC_ROWS]
        xs = [j + i * width for j in range(len(metric_names))]
        ax.bar(xs, [100.0 * v for v in values], width=width, label=r.model_kind.upper())
    ax.set_xticks(
        [j + width * (len(reports) - 1) / 2 for j in range(len(metric_names))],
        ["Accuracy", "Precision", "Recall", "F-Measure"],
    )
    ax.set_ylabel("Percent")
    ax.set_ylim(0, 105)
    ax.set_title(f"Classifier comparison ({reports[0].folds}-fold CV, seed {reports[0].seed})")
    ax.legend(loc="lower right")
    ax.grid(axis="y", alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def write_report_directory(reports, out_dir: str | Path) -> list[Path]:
    """Write machine reports, metrics CSV, and figures; returns paths written."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    for r in reports:
        p = out / f"report_{r.model_kind}.json"
        write_machine_report(r, p)
        written.append(p)
        p = out / f"confusion_{r.model_kind}.png"
        render_confusion_figure(r, p)
        written.append(p)
    p = out / "metrics.csv"
    p.write_text(metrics_csv(reports), encoding="utf-8")
    written.append(p)
    if len(reports) >= 2:
        p = out / "comparison.png"
        render_comparison_figure(reports, p)
        written.append(p)
    return written
