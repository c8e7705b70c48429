"""Recursive partitioning of pattern sets through evolved CA basins.

Each tree node holds one evolved CA; training patterns are distributed
over its attractor basins, and any basin still mixing several classes is
partitioned again by a freshly evolved CA.  Stopping rules (purity
threshold, minimum node size, depth cap, bit-identical patterns) bound
the recursion, which the bare algorithm would not.  Prediction routes a
pattern down the tree by the attractor it reaches at every node.

Trees serialize to a line-oriented versioned text format; parsers reject
unknown versions.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field, replace
from typing import Callable, Union

import numpy as np

from .ca import (
    DEFAULT_MAX_STEPS,
    CaState,
    DependencyString,
    TransitionSpec,
    build_transition,
    evolve_to_attractor,
)
from .errors import EmptyTrainingSet, ModelFormatError, WidthMismatch
from .ga import EvolveResult, GaConfig, PatternSet, evolve, group_by_attractor, _majority

FORMAT_VERSION = 1

# spawn-key tag separating per-node GA seeds from ga-internal streams
_STREAM_NODE = 2


@dataclass(frozen=True)
class Leaf:
    """Terminal basin: class label with its training purity and support."""

    label: int
    purity: float
    support: int


@dataclass(frozen=True, eq=False)
class Child:
    node: "MacaTreeNode"


Outcome = Union[Leaf, Child]


@dataclass(frozen=True, eq=False)
class MacaTreeNode:
    ca: DependencyString
    basin_table: dict[CaState, Outcome]
    depth: int
    fallback_label: int
    spec: TransitionSpec = field(init=False, repr=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "spec", build_transition(self.ca))


@dataclass(frozen=True, eq=False)
class TrainedTree:
    root: MacaTreeNode
    class_count: int
    width: int
    format_version: int = FORMAT_VERSION


@dataclass(frozen=True)
class TreeConfig:
    """Recursion controls around the per-node GA."""

    ga: GaConfig
    max_depth: int = 10
    min_node_size: int = 2
    purity_threshold: float = 1.0

    def __post_init__(self) -> None:
        if self.max_depth < 1:
            raise ValueError("max_depth must be positive")
        if self.min_node_size < 1:
            raise ValueError("min_node_size must be positive")
        if not 0.5 < self.purity_threshold <= 1.0:
            raise ValueError("purity_threshold must be in (0.5, 1.0]")


NodeObserver = Callable[[tuple[int, ...], EvolveResult], None]


def _node_seed(root_seed: int, path: tuple[int, ...]) -> int:
    seq = np.random.SeedSequence(root_seed, spawn_key=(_STREAM_NODE, *path))
    return int(seq.generate_state(1, np.uint64)[0])


def partition(
    s: PatternSet,
    k: int,
    config: TreeConfig,
    depth: int = 0,
    *,
    path: tuple[int, ...] = (),
    observer: NodeObserver | None = None,
) -> MacaTreeNode:
    """Evolve a CA for s targeting k basins and split recursively.

    A basin becomes a leaf when it is pure enough, too small, at the
    depth cap, or holds bit-identical patterns; otherwise it is
    partitioned again with k' = number of classes present in it.  Each
    node's GA runs on a seed derived from the tree path, so sibling
    subtrees are independent and the whole tree is reproducible.
    """
    if not s.patterns:
        raise EmptyTrainingSet("cannot partition an empty pattern set")
    if k < 1:
        raise ValueError("k must be >= 1")

    ga_cfg = replace(config.ga, rng_seed=_node_seed(config.ga.rng_seed, path), target_basin_count=k)
    result = evolve(s, ga_cfg)
    if observer is not None:
        observer(path, result)

    groups = group_by_attractor(result.best.genome, s, ga_cfg.step_budget)
    fallback, _ = _majority([p.label for p in s.patterns])

    basin_table: dict[CaState, Outcome] = {}
    ordered = sorted(groups.items(), key=lambda kv: kv[0].bits)
    for ordinal, (attractor, idxs) in enumerate(ordered):
        labels = [s.patterns[i].label for i in idxs]
        majority, count = _majority(labels)
        purity = count / len(idxs)
        identical = len({s.patterns[i].bits for i in idxs}) == 1
        if (
            purity >= config.purity_threshold
            or len(idxs) < config.min_node_size
            or depth >= config.max_depth
            or identical
        ):
            basin_table[attractor] = Leaf(majority, purity, len(idxs))
        else:
            subset = PatternSet(tuple(s.patterns[i] for i in idxs), s.class_count, s.width)
            child = partition(
                subset,
                len(set(labels)),
                config,
                depth + 1,
                path=path + (ordinal,),
                observer=observer,
            )
            basin_table[attractor] = Child(child)

    return MacaTreeNode(result.best.genome, basin_table, depth, fallback)


def train_tree(
    s: PatternSet, config: TreeConfig, observer: NodeObserver | None = None
) -> TrainedTree:
    """Partition starting at k = class count and wrap the result."""
    root = partition(s, s.class_count, config, 0, observer=observer)
    return TrainedTree(root, s.class_count, s.width)


def predict(
    tree: TrainedTree, bits: CaState, max_steps: int = DEFAULT_MAX_STEPS
) -> tuple[int, float]:
    """Classify one pattern: (label, confidence).

    Confidence is the training purity of the leaf reached; a basin never
    seen in training falls back to the node majority at score 0.5.
    """
    if bits.width != tree.width:
        raise WidthMismatch(f"pattern width {bits.width} != tree width {tree.width}")
    node = tree.root
    while True:
        attractor = evolve_to_attractor(node.spec, bits, max_steps).attractor_id
        outcome = node.basin_table.get(attractor)
        if outcome is None:
            return node.fallback_label, 0.5
        if isinstance(outcome, Leaf):
            return outcome.label, outcome.purity
        node = outcome.node


@dataclass(frozen=True)
class TreeStats:
    node_count: int
    leaf_count: int
    max_depth: int
    mean_leaf_purity: float
    leaves_per_class: dict[int, int]


def tree_stats(tree: TrainedTree) -> TreeStats:
    nodes = 0
    leaves = 0
    depth = 0
    purity_sum = 0.0
    per_class: dict[int, int] = {}

    def walk(node: MacaTreeNode) -> None:
        nonlocal nodes, leaves, depth, purity_sum
        nodes += 1
        depth = max(depth, node.depth)
        for outcome in node.basin_table.values():
            if isinstance(outcome, Leaf):
                leaves += 1
                purity_sum += outcome.purity
                per_class[outcome.label] = per_class.get(outcome.label, 0) + 1
            else:
                walk(outcome.node)

    walk(tree.root)
    mean_purity = purity_sum / leaves if leaves else 0.0
    return TreeStats(nodes, leaves, depth, mean_purity, dict(sorted(per_class.items())))


# --- model file ---

def _join_path(parent: str, ordinal: int) -> str:
    return f"/{ordinal}" if parent == "/" else f"{parent}/{ordinal}"


def save_tree(tree: TrainedTree) -> str:
    """Versioned line format: header, then nodes in pre-order with their
    basin outcome lines.  Deterministic for a given tree, so re-saving a
    loaded model is byte-identical."""
    lines = [f"HMACA-TREE v{tree.format_version} width={tree.width} classes={tree.class_count}"]

    def emit(node: MacaTreeNode, pathstr: str) -> None:
        lines.append(f"node {pathstr} ca={node.ca.to_hex()} fallback={node.fallback_label}")
        ordered = sorted(node.basin_table.items(), key=lambda kv: kv[0].bits)
        children: list[tuple[MacaTreeNode, str]] = []
        for ordinal, (attractor, outcome) in enumerate(ordered):
            if isinstance(outcome, Leaf):
                lines.append(
                    f"basin {attractor.to_hex()} -> leaf {outcome.label} "
                    f"purity={outcome.purity!r} support={outcome.support}"
                )
            else:
                child_path = _join_path(pathstr, ordinal)
                lines.append(f"basin {attractor.to_hex()} -> child {child_path}")
                children.append((outcome.node, child_path))
        for child, child_path in children:
            emit(child, child_path)

    emit(tree.root, "/")
    return "\n".join(lines) + "\n"


_HEADER_RE = re.compile(r"^HMACA-TREE v(\d+) width=(\d+) classes=(\d+)$")
_NODE_RE = re.compile(r"^node (\S+) ca=([0-9A-Fa-f]+) fallback=(\d+)$")
_LEAF_RE = re.compile(
    r"^basin ([0-9A-Fa-f]+) -> leaf (\d+) purity=([0-9.eE+-]+) support=(\d+)$"
)
_CHILD_RE = re.compile(r"^basin ([0-9A-Fa-f]+) -> child (\S+)$")


def load_tree(text: str) -> TrainedTree:
    """Parse a model file; rejects unknown versions and dangling paths."""
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise ModelFormatError("empty model file")
    header = _HEADER_RE.match(lines[0])
    if not header:
        raise ModelFormatError(f"bad model header: {lines[0]!r}")
    version, width, classes = (int(g) for g in header.groups())
    if version != FORMAT_VERSION:
        raise ModelFormatError(f"unsupported model version v{version}")

    # raw[path] = (ca, fallback, [(attractor, ('leaf', ...) | ('child', path))])
    raw: dict[str, tuple[DependencyString, int, list]] = {}
    current: list | None = None
    for ln in lines[1:]:
        m = _NODE_RE.match(ln)
        if m:
            pathstr, ca_hex, fallback = m.group(1), m.group(2), int(m.group(3))
            if pathstr in raw:
                raise ModelFormatError(f"duplicate node path {pathstr}")
            ca = DependencyString.from_hex(ca_hex)
            if ca.width != width:
                raise ModelFormatError(
                    f"node {pathstr} ca width {ca.width} != header width {width}"
                )
            current = []
            raw[pathstr] = (ca, fallback, current)
            continue
        m = _LEAF_RE.match(ln)
        if m:
            if current is None:
                raise ModelFormatError(f"basin line before any node: {ln!r}")
            attractor = CaState.from_hex(m.group(1), width)
            current.append((attractor, ("leaf", int(m.group(2)), float(m.group(3)), int(m.group(4)))))
            continue
        m = _CHILD_RE.match(ln)
        if m:
            if current is None:
                raise ModelFormatError(f"basin line before any node: {ln!r}")
            current.append((CaState.from_hex(m.group(1), width), ("child", m.group(2))))
            continue
        raise ModelFormatError(f"unrecognized model line: {ln!r}")

    if "/" not in raw:
        raise ModelFormatError("model has no root node")

    def build(pathstr: str, depth: int) -> MacaTreeNode:
        ca, fallback, entries = raw.pop(pathstr)
        table: dict[CaState, Outcome] = {}
        for attractor, desc in entries:
            if desc[0] == "leaf":
                table[attractor] = Leaf(desc[1], desc[2], desc[3])
            else:
                child_path = desc[1]
                if child_path not in raw:
                    raise ModelFormatError(f"missing child node {child_path}")
                table[attractor] = Child(build(child_path, depth + 1))
        return MacaTreeNode(ca, table, depth, fallback)

    root = build("/", 0)
    if raw:
        raise ModelFormatError(f"unreachable node paths: {sorted(raw)}")
    return TrainedTree(root, classes, width, version)
