"""Metrics, splitting and report rendering tests."""

from __future__ import annotations

import numpy as np
import pytest

from hmaca.ca import CaState, DependencyString
from hmaca.errors import ClassWithZeroItems, EmptyTestSet, InconsistentMethodColumns
from hmaca.evaluate import (
    Metrics,
    PredictionRecord,
    REPORTED_ACCURACIES,
    evaluate,
    render_accuracy_table,
    render_prediction_tsv,
    split,
)
from hmaca.encode import LabeledWindow
from hmaca.tree import Leaf, MacaTreeNode, TrainedTree


def mkwin(bits: str, label: int) -> LabeledWindow:
    return LabeledWindow("s", 0, CaState.from_string(bits), label)


def constant_zero_tree(width: int) -> TrainedTree:
    # all-zero genes send every state to the all-0 attractor -> always class 0
    node = MacaTreeNode(
        DependencyString.from_hex("0" * width),
        {CaState(0, width): Leaf(0, 1.0, 1)},
        depth=0,
        fallback_label=0,
    )
    return TrainedTree(node, class_count=2, width=width)


# --- split ---

def test_split_sizes():
    windows = [mkwin(format(i, "04b"), 0) for i in range(10)]
    train, test = split(windows, 0.8, seed=3)
    assert len(train) == 8 and len(test) == 2


def test_split_stratified():
    windows = [mkwin(format(i, "04b"), 0) for i in range(5)]
    windows += [mkwin(format(i + 8, "04b"), 1) for i in range(5)]
    train, test = split(windows, 0.8, seed=3)
    assert sum(1 for w in train if w.label == 0) == 4
    assert sum(1 for w in train if w.label == 1) == 4
    assert sum(1 for w in test if w.label == 0) == 1
    assert sum(1 for w in test if w.label == 1) == 1


def test_split_deterministic():
    windows = [mkwin(format(i, "05b"), i % 2) for i in range(20)]
    a = split(windows, 0.7, seed=9)
    b = split(windows, 0.7, seed=9)
    assert a == b
    c = split(windows, 0.7, seed=10)
    assert a != c


def test_split_missing_class_raises():
    windows = [mkwin("0001", 0), mkwin("0010", 2)]
    with pytest.raises(ClassWithZeroItems):
        split(windows, 0.5, seed=1)


def test_split_rejects_bad_fraction():
    with pytest.raises(ValueError):
        split([mkwin("0001", 0)], 1.0, seed=1)


# --- metrics ---

def test_metrics_identities_on_random_matrices():
    rng = np.random.default_rng(41)
    for _ in range(20):
        k = int(rng.integers(2, 5))
        counts = rng.integers(0, 9, size=(k, k))
        pairs = []
        for i in range(k):
            for j in range(k):
                pairs.extend([(i, j)] * int(counts[i, j]))
        if not pairs:
            continue
        m = Metrics.from_predictions(pairs, k)
        total = len(pairs)
        assert m.accuracy == pytest.approx(np.trace(m.confusion) / total)
        for i in range(k):
            assert int(m.confusion[i].sum()) == sum(1 for t, _ in pairs if t == i)
        if k == 2:
            support1 = int(m.confusion[1].sum())
            hits = m.sensitivity * support1 if support1 else 0.0
            misses = support1 - hits
            assert hits + misses == pytest.approx(support1)


def test_metrics_constant_predictor():
    pairs = [(1, 0)] * 3 + [(0, 0)] * 7
    m = Metrics.from_predictions(pairs, 2)
    assert m.accuracy == pytest.approx(0.7)
    assert m.sensitivity == 0.0
    assert m.specificity == 1.0


def test_metrics_perfect_predictor():
    pairs = [(0, 0)] * 4 + [(1, 1)] * 6
    m = Metrics.from_predictions(pairs, 2)
    assert m.accuracy == 1.0
    assert m.confusion.tolist() == [[4, 0], [0, 6]]


def test_metrics_empty_raises():
    with pytest.raises(EmptyTestSet):
        Metrics.from_predictions([], 2)


def test_metrics_tsv_is_stable():
    m = Metrics.from_predictions([(0, 0), (1, 0), (1, 1)], 2)
    text = m.to_tsv()
    assert text.startswith("accuracy\t0.666667\n")
    assert "confusion_1_0\t1" in text
    assert text == m.to_tsv()


def test_evaluate_constant_tree():
    tree = constant_zero_tree(4)
    windows = [mkwin(format(i, "04b"), int(i < 3)) for i in range(10)]
    m = evaluate(tree, windows)
    assert m.accuracy == pytest.approx(0.7)
    assert m.sensitivity == 0.0
    assert m.specificity == 1.0
    with pytest.raises(EmptyTestSet):
        evaluate(tree, [])


# --- rendering ---

def test_accuracy_table_published_rows():
    text = render_accuracy_table(REPORTED_ACCURACIES)
    lines = text.strip().split("\n")
    assert lines[0] == "Prediction Method\tProtein\tPromoter\tStructure"
    assert "HMACA\t75%\t85%\t97%" in lines
    assert "DSP\t62%\t70%\t66%" in lines


def test_accuracy_table_empty():
    assert render_accuracy_table([]) == "Prediction Method\tProtein\tPromoter\tStructure\n"


def test_accuracy_table_none_cells_and_half_up_rounding():
    text = render_accuracy_table([("HMACA", (None, 0.845, None))])
    assert text.strip().split("\n")[1] == "HMACA\t-\t85%\t-"
    text = render_accuracy_table([("x", (0.004, 0.994, 0.5))])
    assert text.strip().split("\n")[1] == "x\t0%\t99%\t50%"


def test_prediction_tsv_sample_row():
    rec = PredictionRecord(
        "Sequence", 1, "A",
        (("ANN", 0.098), ("HMM", 0.0), ("NES", 0.0)),
        predicted=None,
    )
    text = render_prediction_tsv([rec])
    lines = text.split("\n")
    assert lines[0] == "Seq-Pos-Residue\tANN\tHMM\tNES\tPredicted"
    assert lines[1] == "Sequence-1-A\t0.098\t0.000\t0.000\t-"


def test_prediction_tsv_full_score_and_symbol():
    rec = PredictionRecord("s", 3, "K", (("HMACA", 1.0),), predicted=None)
    assert "1.000" in render_prediction_tsv([rec])
    rec = PredictionRecord("s", 3, "K", (("HMACA", 0.8),), predicted="H")
    assert render_prediction_tsv([rec]).split("\n")[1].endswith("0.800\tH")


def test_prediction_tsv_inconsistent_columns():
    a = PredictionRecord("s", 1, "A", (("ANN", 0.1),), None)
    b = PredictionRecord("s", 2, "C", (("HMM", 0.1),), None)
    with pytest.raises(InconsistentMethodColumns):
        render_prediction_tsv([a, b])
