"""Split/metrics/report machinery around the tree classifier.

Outputs are byte-stable: fixed '\\n' line endings, '.' decimals, and
integer percentages rounded half-up, so golden-file comparisons hold
across platforms.
"""

from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np

from .ca import CaState
from .errors import ClassWithZeroItems, EmptyTestSet, InconsistentMethodColumns
from .tree import TrainedTree, predict

# Accuracy table rows reported for this method and the usual comparison
# tools (protein coding / promoter / structure), transcribed for display.
REPORTED_ACCURACIES: tuple[tuple[str, tuple[float, float, float]], ...] = (
    ("DSP", (0.62, 0.70, 0.66)),
    ("PHD", (0.70, 0.68, 0.74)),
    ("SAM-T99", (0.68, 0.77, 0.77)),
    ("SS Pro", (0.70, 0.73, 0.81)),
    ("HMACA", (0.75, 0.85, 0.97)),
)

ACCURACY_TABLE_HEADER = "Prediction Method\tProtein\tPromoter\tStructure"


@dataclass(frozen=True, eq=False)
class Metrics:
    """Confusion-matrix summary; rows are true classes, columns predicted."""

    accuracy: float
    sensitivity: float | None
    specificity: float | None
    per_class_precision: tuple[float, ...]
    per_class_recall: tuple[float, ...]
    confusion: np.ndarray

    @staticmethod
    def from_predictions(pairs: Sequence[tuple[int, int]], class_count: int) -> "Metrics":
        if not pairs:
            raise EmptyTestSet("no (true, predicted) pairs to score")
        confusion = np.zeros((class_count, class_count), dtype=np.int64)
        for true, pred in pairs:
            confusion[true, pred] += 1
        total = int(confusion.sum())
        accuracy = float(np.trace(confusion)) / total
        row_sums = confusion.sum(axis=1)
        col_sums = confusion.sum(axis=0)
        recall = tuple(
            float(confusion[k, k]) / row_sums[k] if row_sums[k] else 0.0
            for k in range(class_count)
        )
        precision = tuple(
            float(confusion[k, k]) / col_sums[k] if col_sums[k] else 0.0
            for k in range(class_count)
        )
        sensitivity = recall[1] if class_count == 2 else None
        specificity = recall[0] if class_count == 2 else None
        confusion.flags.writeable = False
        return Metrics(accuracy, sensitivity, specificity, precision, recall, confusion)

    def to_tsv(self) -> str:
        k = self.confusion.shape[0]
        lines = [f"accuracy\t{self.accuracy:.6f}"]
        if self.sensitivity is not None:
            lines.append(f"sensitivity\t{self.sensitivity:.6f}")
        if self.specificity is not None:
            lines.append(f"specificity\t{self.specificity:.6f}")
        for i in range(k):
            lines.append(f"precision_{i}\t{self.per_class_precision[i]:.6f}")
        for i in range(k):
            lines.append(f"recall_{i}\t{self.per_class_recall[i]:.6f}")
        for i in range(k):
            lines.append(f"support_{i}\t{int(self.confusion[i].sum())}")
        for i in range(k):
            for j in range(k):
                lines.append(f"confusion_{i}_{j}\t{int(self.confusion[i, j])}")
        return "\n".join(lines) + "\n"


def split(windows: Sequence, train_fraction: float, seed: int) -> tuple[list, list]:
    """Seeded stratified split preserving each class's proportion.

    Raises ClassWithZeroItems when a label in [0, max label] never
    occurs, which would silently skew downstream class counts.
    """
    if not 0.0 < train_fraction < 1.0:
        raise ValueError("train_fraction must be strictly between 0 and 1")
    if not windows:
        raise EmptyTestSet("nothing to split")
    by_label: dict[int, list] = {}
    for w in windows:
        by_label.setdefault(w.label, []).append(w)
    for label in range(max(by_label) + 1):
        if label not in by_label:
            raise ClassWithZeroItems(f"label {label} has no items")

    rng = np.random.Generator(np.random.PCG64(seed))
    train: list = []
    test: list = []
    for label in sorted(by_label):
        group = by_label[label]
        order = rng.permutation(len(group))
        n_train = int(len(group) * train_fraction + 0.5)
        for pos, idx in enumerate(order):
            (train if pos < n_train else test).append(group[idx])
    return train, test


def evaluate(tree: TrainedTree, test: Sequence) -> Metrics:
    """Score the tree on labeled windows (anything with .bits/.label)."""
    if not test:
        raise EmptyTestSet("empty test set")
    pairs = [(w.label, predict(tree, w.bits)[0]) for w in test]
    return Metrics.from_predictions(pairs, tree.class_count)


def _percent(value: float) -> str:
    return f"{int(value * 100 + 0.5)}%"


def render_accuracy_table(rows: Sequence[tuple[str, Sequence[float | None]]]) -> str:
    """Method-by-task accuracy TSV with integer percentages."""
    lines = [ACCURACY_TABLE_HEADER]
    for name, values in rows:
        cells = ["-" if v is None else _percent(v) for v in values]
        lines.append("\t".join([name, *cells]))
    return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class PredictionRecord:
    """One output row: sequence position plus per-method scores.

    predicted is the class symbol, or None when the decision score fell
    below threshold (rendered as '-').
    """

    seq_id: str
    position: int
    residue: str
    method_scores: tuple[tuple[str, float], ...]
    predicted: str | None = None


def render_prediction_tsv(records: Sequence[PredictionRecord]) -> str:
    """Per-position prediction TSV: Seq-Pos-Residue, scores, verdict."""
    if not records:
        return "Seq-Pos-Residue\tPredicted\n"
    methods = tuple(name for name, _ in records[0].method_scores)
    lines = ["\t".join(["Seq-Pos-Residue", *methods, "Predicted"])]
    for rec in records:
        if tuple(name for name, _ in rec.method_scores) != methods:
            raise InconsistentMethodColumns(
                f"record {rec.seq_id}-{rec.position} has different method columns"
            )
        scores = [f"{score:.3f}" for _, score in rec.method_scores]
        verdict = rec.predicted if rec.predicted is not None else "-"
        lines.append("\t".join([f"{rec.seq_id}-{rec.position}-{rec.residue}", *scores, verdict]))
    return "\n".join(lines) + "\n"
