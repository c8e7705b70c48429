"""Tree partitioning tests: stopping rules, prediction, serialization."""

from __future__ import annotations

import numpy as np
import pytest

from hmaca.ca import CaState, DependencyString
from hmaca.errors import EmptyTrainingSet, ModelFormatError, WidthMismatch
from hmaca.ga import GaConfig, Pattern, PatternSet, to_pattern_set
from hmaca.tree import (
    Child,
    Leaf,
    MacaTreeNode,
    TrainedTree,
    TreeConfig,
    load_tree,
    partition,
    predict,
    save_tree,
    train_tree,
    tree_stats,
)

GOLDEN_ROWS = [
    "00000001", "00101010", "01010101", "00110011",
    "10000001", "10101010", "11010101", "10110011",
]
GOLDEN_ROOT_HEX = "490D37E2"
GOLDEN_MODEL = (
    "HMACA-TREE v1 width=8 classes=2\n"
    "node / ca=490D37E2 fallback=0\n"
    "basin 4A -> leaf 0 purity=1.0 support=4\n"
    "basin 8A -> leaf 1 purity=1.0 support=4\n"
)


def mkpats(rows: list[tuple[str, int]], class_count: int | None = None) -> PatternSet:
    return PatternSet.from_patterns(
        (Pattern(CaState.from_string(b), lb) for b, lb in rows), class_count
    )


def golden_pattern_set() -> PatternSet:
    return mkpats([(r, int(r[0])) for r in GOLDEN_ROWS], 2)


def golden_config(**kw) -> TreeConfig:
    ga = GaConfig(max_generations=30, rng_seed=42, target_basin_count=2, population_size=30)
    return TreeConfig(ga=ga, **kw)


def test_single_class_trains_to_pure_leaves_at_depth_zero():
    pats = mkpats([("0011", 0), ("1100", 0), ("0110", 0)])
    tree = train_tree(pats, golden_config())
    assert tree.root.depth == 0
    for outcome in tree.root.basin_table.values():
        assert isinstance(outcome, Leaf)
        assert outcome.label == 0
        assert outcome.purity == 1.0


def test_identical_patterns_with_conflicting_labels_stop_recursion():
    pats = mkpats([("0101", 0), ("0101", 1)])
    tree = train_tree(pats, golden_config())
    stats = tree_stats(tree)
    assert stats.max_depth == 0  # identical-bits rule fires, no recursion
    assert stats.leaf_count >= 1


def test_max_depth_bound_holds():
    rng = np.random.default_rng(21)
    for seed in range(3):
        rows = [(format(int(rng.integers(0, 256)), "08b"), int(rng.integers(0, 2))) for _ in range(24)]
        pats = mkpats(rows, 2)
        ga = GaConfig(max_generations=3, rng_seed=seed, target_basin_count=2, population_size=12)
        tree = train_tree(pats, TreeConfig(ga=ga, max_depth=2))
        assert tree_stats(tree).max_depth <= 2


def test_recursion_builds_child_nodes_when_impure():
    # patterns equal in all but the last two cells are hard to split with
    # one tiny GA budget, forcing at least one impure basin to recurse
    rows = [(format(b, "08b"), b & 1) for b in range(16)]
    pats = mkpats(rows, 2)
    ga = GaConfig(max_generations=1, rng_seed=5, target_basin_count=2, population_size=4)
    tree = train_tree(pats, TreeConfig(ga=ga, max_depth=6))
    stats = tree_stats(tree)
    assert stats.node_count >= 1
    assert stats.max_depth <= 6
    # training subsets at the root partition the pattern set
    from hmaca.ga import group_by_attractor
    groups = group_by_attractor(tree.root.ca, pats)
    seen = sorted(i for idxs in groups.values() for i in idxs)
    assert seen == list(range(len(rows)))


def test_empty_training_set_raises():
    with pytest.raises((EmptyTrainingSet, ValueError)):
        to_pattern_set([])


def test_predict_pure_tree_reproduces_training_labels():
    pats = golden_pattern_set()
    tree = train_tree(pats, golden_config())
    for row in GOLDEN_ROWS:
        label, score = predict(tree, CaState.from_string(row))
        assert label == int(row[0])
        assert score == 1.0


def test_predict_missing_basin_falls_back():
    # handcrafted single node: identity CA, only state 0011 mapped
    node = MacaTreeNode(
        DependencyString.from_hex("4444"),
        {CaState.from_string("0011"): Leaf(1, 1.0, 2)},
        depth=0,
        fallback_label=0,
    )
    tree = TrainedTree(node, class_count=2, width=4)
    assert predict(tree, CaState.from_string("0011")) == (1, 1.0)
    assert predict(tree, CaState.from_string("0101")) == (0, 0.5)


def test_predict_width_mismatch():
    tree = train_tree(golden_pattern_set(), golden_config())
    with pytest.raises(WidthMismatch):
        predict(tree, CaState.from_string("000"))


def test_golden_training_run_frozen():
    tree = train_tree(golden_pattern_set(), golden_config())
    assert tree.root.ca.to_hex() == GOLDEN_ROOT_HEX
    assert save_tree(tree) == GOLDEN_MODEL
    stats = tree_stats(tree)
    assert stats.node_count == 1
    assert stats.leaf_count == 2
    assert stats.mean_leaf_purity == 1.0
    assert stats.leaves_per_class == {0: 1, 1: 1}


def test_training_is_deterministic():
    a = save_tree(train_tree(golden_pattern_set(), golden_config()))
    b = save_tree(train_tree(golden_pattern_set(), golden_config()))
    assert a == b


# --- serialization ---

def test_round_trip_byte_identity():
    rng = np.random.default_rng(22)
    for seed in range(4):
        rows = [(format(int(rng.integers(0, 4096)), "012b"), int(rng.integers(0, 3))) for _ in range(20)]
        pats = mkpats(rows, 3)
        ga = GaConfig(max_generations=4, rng_seed=seed, target_basin_count=3, population_size=10)
        tree = train_tree(pats, TreeConfig(ga=ga, max_depth=3))
        text = save_tree(tree)
        loaded = load_tree(text)
        assert save_tree(loaded) == text
        for row, _ in rows:
            assert predict(loaded, CaState.from_string(row)) == predict(tree, CaState.from_string(row))


def test_load_rejects_unknown_version():
    with pytest.raises(ModelFormatError):
        load_tree(GOLDEN_MODEL.replace("v1", "v2"))


def test_load_rejects_garbage():
    with pytest.raises(ModelFormatError):
        load_tree("not a model\n")
    with pytest.raises(ModelFormatError):
        load_tree("")
    with pytest.raises(ModelFormatError):
        load_tree(GOLDEN_MODEL + "wat\n")


def test_load_rejects_missing_child():
    text = (
        "HMACA-TREE v1 width=4 classes=2\n"
        "node / ca=4444 fallback=0\n"
        "basin 3 -> child /0\n"
    )
    with pytest.raises(ModelFormatError):
        load_tree(text)


def test_load_rejects_width_mismatch_in_ca():
    text = (
        "HMACA-TREE v1 width=8 classes=2\n"
        "node / ca=4444 fallback=0\n"
    )
    with pytest.raises(ModelFormatError):
        load_tree(text)


def test_stats_on_manual_two_level_tree():
    child = MacaTreeNode(
        DependencyString.from_hex("4444"),
        {CaState.from_string("0000"): Leaf(0, 1.0, 1),
         CaState.from_string("0001"): Leaf(1, 0.75, 4)},
        depth=1,
        fallback_label=0,
    )
    root = MacaTreeNode(
        DependencyString.from_hex("AAAA"),
        {CaState.from_string("0000"): Child(child),
         CaState.from_string("0010"): Leaf(1, 1.0, 3)},
        depth=0,
        fallback_label=1,
    )
    stats = tree_stats(TrainedTree(root, 2, 4))
    assert stats.node_count == 2
    assert stats.leaf_count == 3
    assert stats.max_depth == 1
    assert stats.mean_leaf_purity == pytest.approx((1.0 + 0.75 + 1.0) / 3)
    assert stats.leaves_per_class == {0: 1, 1: 2}
