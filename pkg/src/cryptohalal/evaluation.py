"""Stratified cross-validation, pooled confusion-matrix metrics, and
model comparison.

Metrics are computed in exact rational arithmetic and converted to float
once at the edge, which preserves the support-weighting identity
(weighted recall equals accuracy) down to the last bit.
"""

from __future__ import annotations

import random
import warnings
from dataclasses import dataclass
from fractions import Fraction

from .corpus import Dataset, Ruling, dataset_hash
from .learners import predict, train

#: confusion-matrix row/column order: rows = actual, cols = predicted
CLASS_LABELS = (Ruling.HALAL, Ruling.HARAM)


class EvaluationError(ValueError):
    pass


def stratified_folds(d: Dataset, k: int = 10, seed: int = 42) -> list[list[int]]:
    """Split dataset indices into k stratified folds.

    Indices are shuffled within each class with the given seed and dealt
    round-robin; each class continues from the fold where the previous
    class stopped, which keeps fold sizes within one of each other. If
    the smallest class has fewer than k members, k is reduced to that
    size with a warning.
    """
    if k < 2:
        raise EvaluationError("k must be at least 2")
    by_class: dict[Ruling, list[int]] = {label: [] for label in CLASS_LABELS}
    for i, rec in enumerate(d.records):
        by_class[rec.ruling].append(i)
    min_class = min((len(v) for v in by_class.values() if v), default=0)
    if min_class < k:
        if min_class < 2:
            raise EvaluationError(
                "smallest class has fewer than 2 members; cannot stratify"
            )
        warnings.warn(
            f"reducing folds from {k} to {min_class} (smallest class size)",
            stacklevel=2,
        )
        k = min_class
    rng = random.Random(seed)
    folds: list[list[int]] = [[] for _ in range(k)]
    offset = 0
    for label in CLASS_LABELS:
        indices = list(by_class[label])
        rng.shuffle(indices)
        for j, idx in enumerate(indices):
            folds[(offset + j) % k].append(idx)
        offset = (offset + len(indices)) % k
    return folds


@dataclass(frozen=True)
class ClassMetrics:
    precision: float
    recall: float
    f1: float
    support: int

    def to_dict(self) -> dict:
        return {
            "precision": self.precision,
            "recall": self.recall,
            "f1": self.f1,
            "support": self.support,
        }


@dataclass(frozen=True)
class EvaluationReport:
    model_kind: str
    hyperparams: dict
    dataset_hash: str
    folds: int
    seed: int
    matrix: tuple[tuple[int, int], tuple[int, int]]
    accuracy: float
    per_class: dict
    weighted: dict
    misclassified: tuple[tuple[str, str, str], ...]

    @property
    def total(self) -> int:
        return sum(sum(row) for row in self.matrix)

    def to_dict(self) -> dict:
        return {
            "model_kind": self.model_kind,
            "hyperparams": self.hyperparams,
            "dataset_hash": self.dataset_hash,
            "folds": self.folds,
            "seed": self.seed,
            "matrix": {
                "labels": [label.value for label in CLASS_LABELS],
                "rows": [list(row) for row in self.matrix],
            },
            "accuracy": self.accuracy,
            "per_class": {name: m.to_dict() for name, m in self.per_class.items()},
            "weighted": dict(self.weighted),
            "misclassified": [
                {"ticker": t, "actual": a, "predicted": p}
                for t, a, p in self.misclassified
            ],
        }


def confusion_fractions(matrix) -> dict:
    """Exact metric suite for a 2x2 confusion matrix (rows=actual)."""
    n = sum(sum(row) for row in matrix)
    correct = matrix[0][0] + matrix[1][1]
    accuracy = Fraction(correct, n) if n else Fraction(0)
    per_class = {}
    weighted = {"precision": Fraction(0), "recall": Fraction(0), "f1": Fraction(0)}
    for i, label in enumerate(CLASS_LABELS):
        support = sum(matrix[i])
        predicted = matrix[0][i] + matrix[1][i]
        tp = matrix[i][i]
        precision = Fraction(tp, predicted) if predicted else Fraction(0)
        recall = Fraction(tp, support) if support else Fraction(0)
        f1 = (
            2 * precision * recall / (precision + recall)
            if precision + recall
            else Fraction(0)
        )
        per_class[label.value] = {
            "precision": precision,
            "recall": recall,
            "f1": f1,
            "support": support,
        }
        if n:
            share = Fraction(support, n)
            weighted["precision"] += share * precision
            weighted["recall"] += share * recall
            weighted["f1"] += share * f1
    return {"accuracy": accuracy, "per_class": per_class, "weighted": weighted}


def _report_from_predictions(
    d: Dataset,
    predicted: list[Ruling],
    *,
    model_kind: str,
    hyperparams: dict,
    k: int,
    seed: int,
) -> EvaluationReport:
    matrix = [[0, 0], [0, 0]]
    misclassified = []
    for rec, pred in zip(d.records, predicted):
        i = CLASS_LABELS.index(rec.ruling)
        j = CLASS_LABELS.index(pred)
        matrix[i][j] += 1
        if i != j:
            misclassified.append((rec.ticker, rec.ruling.value, pred.value))
    exact = confusion_fractions(matrix)
    return EvaluationReport(
        model_kind=model_kind,
        hyperparams=hyperparams,
        dataset_hash=dataset_hash(d),
        folds=k,
        seed=seed,
        matrix=(tuple(matrix[0]), tuple(matrix[1])),
        accuracy=float(exact["accuracy"]),
        per_class={
            name: ClassMetrics(
                precision=float(m["precision"]),
                recall=float(m["recall"]),
                f1=float(m["f1"]),
                support=m["support"],
            )
            for name, m in exact["per_class"].items()
        },
        weighted={name: float(v) for name, v in exact["weighted"].items()},
        misclassified=tuple(misclassified),
    )


def cross_validate(
    d: Dataset,
    model_kind: str,
    hyperparams: dict | None = None,
    k: int = 10,
    seed: int = 42,
) -> EvaluationReport:
    """Train on each fold complement, pool the held-out predictions."""
    hyperparams = dict(hyperparams or {})
    folds = stratified_folds(d, k=k, seed=seed)
    predicted: list[Ruling | None] = [None] * len(d)
    for fold in folds:
        holdout = set(fold)
        train_idx = [i for i in range(len(d)) if i not in holdout]
        model = train(d.subset(train_idx), model_kind, **hyperparams)
        for i in fold:
            predicted[i] = predict(model, d.records[i].features).label
    return _report_from_predictions(
        d,
        predicted,
        model_kind=model_kind,
        hyperparams=hyperparams,
        k=len(folds),
        seed=seed,
    )


@dataclass(frozen=True)
class ComparisonResult:
    reports: tuple[EvaluationReport, ...]
    winner_kind: str | None  # None on an exact tie
    tie: bool
    text: str

    def __str__(self) -> str:
        return self.text


def _pct(x: float) -> str:
    return f"{100.0 * x:.2f}"


def compare_report(reports) -> ComparisonResult:
    """Side-by-side comparison; best accuracy wins, weighted precision breaks ties."""
    reports = tuple(reports)
    if len(reports) < 2:
        raise EvaluationError("need at least 2 reports to compare")
    hashes = {r.dataset_hash for r in reports}
    if len(hashes) != 1:
        raise EvaluationError("reports cover different datasets (hash mismatch)")
    seeds = {r.seed for r in reports}
    if len(seeds) != 1:
        raise EvaluationError("reports use different seeds")

    def key(r: EvaluationReport):
        return (r.accuracy, r.weighted["precision"])

    best = max(reports, key=key)
    tied = [r for r in reports if key(r) == key(best)]
    tie = len(tied) > 1
    winner_kind = None if tie else best.model_kind

    names = [r.model_kind.upper() for r in reports]
    col = max(10, max(len(n) for n in names) + 2)
    rows = [
        ("Accuracy (%)", [_pct(r.accuracy) for r in reports]),
        ("Precision (%)", [_pct(r.weighted["precision"]) for r in reports]),
        ("Recall (%)", [_pct(r.weighted["recall"]) for r in reports]),
        ("F-Measure (%)", [_pct(r.weighted["f1"]) for r in reports]),
    ]
    lines = []
    lines.append("Parameter".ljust(16) + "".join(n.ljust(col) for n in names))
    for name, cells in rows:
        lines.append(name.ljust(16) + "".join(c.ljust(col) for c in cells))
    lines.append("")
    lines.append(
        f"Dataset hash: {reports[0].dataset_hash}  folds: {reports[0].folds}  "
        f"seed: {reports[0].seed}"
    )
    for r in reports:
        if r.misclassified:
            items = ", ".join(f"{t} ({a} -> {p})" for t, a, p in r.misclassified)
        else:
            items = "none"
        lines.append(f"Misclassified ({r.model_kind}): {items}")
    if tie:
        tied_names = ", ".join(r.model_kind for r in tied)
        lines.append(f"Result: tie between {tied_names} (identical metrics)")
    else:
        lines.append(
            f"Best model: {best.model_kind} "
            f"(accuracy {_pct(best.accuracy)}%, "
            f"weighted precision {_pct(best.weighted['precision'])}%)"
        )
    return ComparisonResult(
        reports=reports,
        winner_kind=winner_kind,
        tie=tie,
        text="\n".join(lines) + "\n",
    )
