"""Command line front end: train, predict, evaluate, inspect-ca.

Runs are configured by a flat key=value file plus same-named long flags
(flag wins).  Training demands an explicit --seed so every run is
reproducible.  Data goes to stdout or the --out file; diagnostics go to
stderr.  Exit codes: 1 input/parse, 2 configuration, 3 training
failure, 4 model mismatch, 5 label-format (evaluate only).
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .ca import (
    ENUM_MAX_WIDTH,
    DependencyString,
    build_transition,
    dynamics_summary,
    enumerate_basins,
)
from .encode import (
    CODING,
    PROMOTER,
    SECONDARY_STRUCTURE,
    TASKS,
    WindowSpec,
    label_windows,
    parse_fasta,
    parse_intervals,
    parse_structure_labels,
)
from .errors import (
    AmbiguousBase,
    AnnotationLengthMismatch,
    EmptyFile,
    EmptyTestSet,
    HmacaError,
    IllegalSymbol,
    LabelFormatError,
    MalformedHeader,
    ModelFormatError,
    StepBudgetExceeded,
    UnknownStructureSymbol,
)
from .evaluate import (
    Metrics,
    PredictionRecord,
    evaluate,
    render_accuracy_table,
    render_prediction_tsv,
)
from .ga import GaConfig, to_pattern_set
from .tree import TreeConfig, load_tree, predict, save_tree, train_tree, tree_stats

EXIT_INPUT = 1
EXIT_CONFIG = 2
EXIT_TRAIN = 3
EXIT_MODEL = 4
EXIT_LABELS = 5

CLASS_COUNTS = {CODING: 2, PROMOTER: 2, SECONDARY_STRUCTURE: 3}
LABEL_SYMBOLS = {CODING: ("N", "C"), PROMOTER: ("N", "P"), SECONDARY_STRUCTURE: ("H", "E", "C")}
BASELINE_METHODS = ("ANN", "HMM", "NES")
TASK_COLUMN = {CODING: 0, PROMOTER: 1, SECONDARY_STRUCTURE: 2}

_PARSE_ERRORS = (
    OSError,
    EmptyFile,
    MalformedHeader,
    IllegalSymbol,
)
_LABEL_ERRORS = (
    LabelFormatError,
    AnnotationLengthMismatch,
    UnknownStructureSymbol,
)


class ConfigError(HmacaError):
    pass


class TrainingFailure(HmacaError):
    pass


def _parse_float_or_none(text: str) -> float | None:
    return None if text == "" else float(text)


# config keys with casters and defaults; None means "required when used"
_SCHEMA: dict[str, tuple] = {
    "task": (str, None),
    "window": (int, None),
    "stride": (int, 1),
    "seed": (int, None),
    "population": (int, 500),
    "generations": (int, 30),
    "elite_count": (int, 2),
    "crossover_rate": (float, 0.9),
    "mutation_rate": (_parse_float_or_none, None),
    "step_budget": (int, 10_000),
    "max_depth": (int, 10),
    "min_node_size": (int, 2),
    "purity_threshold": (float, 1.0),
    "threshold": (float, 0.5),
    "sequences": (str, None),
    "labels": (str, None),
    "model": (str, None),
    "out": (str, None),
    "table": (str, None),
}


def _load_config_file(path: str) -> dict:
    values: dict = {}
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config file: {exc}") from None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected key=value")
        key, _, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if key not in _SCHEMA:
            raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
        caster = _SCHEMA[key][0]
        try:
            values[key] = caster(value)
        except ValueError:
            raise ConfigError(f"{path}:{lineno}: bad value for {key!r}: {value!r}") from None
    return values


def _merged_config(args: argparse.Namespace) -> dict:
    cfg = {key: default for key, (_, default) in _SCHEMA.items()}
    if getattr(args, "config", None):
        cfg.update(_load_config_file(args.config))
    for key in _SCHEMA:
        flag_value = getattr(args, key, None)
        if flag_value is not None:
            cfg[key] = flag_value
    return cfg


def _require(cfg: dict, *keys: str) -> None:
    missing = [k for k in keys if cfg.get(k) is None]
    if missing:
        raise ConfigError("missing required option(s): " + ", ".join(f"--{k.replace('_', '-')}" for k in missing))


def _window_spec(cfg: dict) -> WindowSpec:
    if cfg["task"] not in TASKS:
        raise ConfigError(f"unknown task {cfg['task']!r}; expected one of {', '.join(TASKS)}")
    try:
        return WindowSpec(cfg["window"], cfg["stride"], cfg["task"])
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def _sequence_kind(task: str) -> str:
    return "protein" if task == SECONDARY_STRUCTURE else "dna"


def _read(path: str) -> str:
    return Path(path).read_text(encoding="utf-8")


def _gather_windows(cfg: dict, wspec: WindowSpec):
    """Parse sequences + labels and produce (windows, skipped)."""
    seqs = parse_fasta(_read(cfg["sequences"]), _sequence_kind(cfg["task"]))
    if cfg["task"] == SECONDARY_STRUCTURE:
        annotations = parse_structure_labels(_read(cfg["labels"]))
    else:
        annotations = parse_intervals(_read(cfg["labels"]))
    windows = []
    skipped = 0
    for seq in seqs:
        if cfg["task"] == SECONDARY_STRUCTURE:
            if seq.id not in annotations:
                raise LabelFormatError(f"no structure annotation for sequence {seq.id!r}")
            ann = annotations[seq.id]
        else:
            ann = annotations.get(seq.id, [])
        ws, sk = label_windows(seq, ann, wspec)
        windows.extend(ws)
        skipped += sk
    return windows, skipped


def _err(message: str) -> None:
    print(f"error: {message}", file=sys.stderr)


# --- train ---

def _run_train(cfg: dict) -> int:
    wspec = _window_spec(cfg)
    _require(cfg, "seed", "sequences", "labels", "model")
    class_count = CLASS_COUNTS[cfg["task"]]
    try:
        ga = GaConfig(
            max_generations=cfg["generations"],
            rng_seed=cfg["seed"],
            target_basin_count=class_count,
            population_size=cfg["population"],
            elite_count=cfg["elite_count"],
            crossover_rate=cfg["crossover_rate"],
            mutation_rate_per_bit=cfg["mutation_rate"],
            step_budget=cfg["step_budget"],
        )
        tree_cfg = TreeConfig(
            ga=ga,
            max_depth=cfg["max_depth"],
            min_node_size=cfg["min_node_size"],
            purity_threshold=cfg["purity_threshold"],
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from None

    windows, skipped = _gather_windows(cfg, wspec)
    if not windows:
        raise TrainingFailure("no training windows produced")
    present = {w.label for w in windows}
    if len(present) < 2:
        raise TrainingFailure(
            f"degenerate training input: only label(s) {sorted(present)} present, "
            f"{class_count} classes declared"
        )

    histories: dict[tuple[int, ...], object] = {}
    tree = train_tree(
        to_pattern_set(windows, class_count),
        tree_cfg,
        observer=lambda path, result: histories.setdefault(path, result),
    )
    Path(cfg["model"]).write_text(save_tree(tree), encoding="utf-8")

    stats = tree_stats(tree)
    training = evaluate(tree, windows)
    out = [
        f"windows\t{len(windows)}",
        f"skipped_windows\t{skipped}",
        f"nodes\t{stats.node_count}",
        f"leaves\t{stats.leaf_count}",
        f"max_depth\t{stats.max_depth}",
        f"mean_leaf_purity\t{stats.mean_leaf_purity:.6f}",
        f"training_accuracy\t{training.accuracy:.6f}",
        "generation\tbest_fitness",
    ]
    root = histories[()]
    out.extend(f"{g}\t{f:.6f}" for g, f in enumerate(root.fitness_history))
    print("\n".join(out))
    return 0


def cmd_train(args: argparse.Namespace) -> int:
    try:
        cfg = _merged_config(args)
        try:
            return _run_train(cfg)
        except _PARSE_ERRORS as exc:
            _err(str(exc))
            return EXIT_INPUT
        except _LABEL_ERRORS as exc:
            _err(str(exc))
            return EXIT_INPUT
        except (TrainingFailure, EmptyTestSet, StepBudgetExceeded) as exc:
            _err(f"training failed: {exc}")
            return EXIT_TRAIN
    except ConfigError as exc:
        _err(str(exc))
        return EXIT_CONFIG


# --- predict ---

def _load_model(cfg: dict, wspec: WindowSpec) -> object:
    tree = load_tree(_read(cfg["model"]))
    if tree.width != wspec.width:
        raise ModelFormatError(
            f"model width {tree.width} != window width {wspec.width} "
            f"({cfg['task']} task, window {cfg['window']})"
        )
    if tree.class_count != CLASS_COUNTS[cfg["task"]]:
        raise ModelFormatError(
            f"model has {tree.class_count} classes but task {cfg['task']!r} "
            f"expects {CLASS_COUNTS[cfg['task']]}"
        )
    return tree


def _run_predict(cfg: dict) -> int:
    wspec = _window_spec(cfg)
    _require(cfg, "sequences", "model", "out")
    try:
        tree = _load_model(cfg, wspec)
    except OSError as exc:
        _err(str(exc))
        return EXIT_INPUT
    except ModelFormatError as exc:
        _err(str(exc))
        return EXIT_MODEL

    symbols = LABEL_SYMBOLS[cfg["task"]]
    if cfg["task"] == SECONDARY_STRUCTURE:
        from .encode import encode_protein_window as encode
    else:
        from .encode import encode_dna_window as encode

    seqs = parse_fasta(_read(cfg["sequences"]), _sequence_kind(cfg["task"]))
    records = []
    for seq in seqs:
        for start in range(0, len(seq) - wspec.window_length + 1, wspec.stride):
            try:
                bits = encode(seq, start, wspec)
            except AmbiguousBase:
                continue
            label, score = predict(tree, bits)
            center = start + wspec.window_length // 2
            verdict = symbols[label] if score >= cfg["threshold"] else None
            records.append(
                PredictionRecord(
                    seq_id=seq.id,
                    position=center + 1,
                    residue=seq.residues[center],
                    method_scores=tuple((m, 0.0) for m in BASELINE_METHODS) + (("HMACA", score),),
                    predicted=verdict,
                )
            )
    Path(cfg["out"]).write_text(render_prediction_tsv(records), encoding="utf-8")
    return 0


def cmd_predict(args: argparse.Namespace) -> int:
    try:
        cfg = _merged_config(args)
        try:
            return _run_predict(cfg)
        except _PARSE_ERRORS as exc:
            _err(str(exc))
            return EXIT_INPUT
    except ConfigError as exc:
        _err(str(exc))
        return EXIT_CONFIG


# --- evaluate ---

def _run_evaluate(cfg: dict) -> int:
    wspec = _window_spec(cfg)
    _require(cfg, "sequences", "labels", "model", "out")
    try:
        tree = _load_model(cfg, wspec)
    except OSError as exc:
        _err(str(exc))
        return EXIT_INPUT
    except ModelFormatError as exc:
        _err(str(exc))
        return EXIT_MODEL

    try:
        windows, _ = _gather_windows(cfg, wspec)
        if not windows:
            raise EmptyTestSet("no evaluation windows produced")
        metrics: Metrics = evaluate(tree, windows)
    except _LABEL_ERRORS as exc:
        _err(str(exc))
        return EXIT_LABELS

    Path(cfg["out"]).write_text(metrics.to_tsv(), encoding="utf-8")
    values: list[float | None] = [None, None, None]
    values[TASK_COLUMN[cfg["task"]]] = metrics.accuracy
    table_path = cfg["table"] or cfg["out"] + ".table.tsv"
    Path(table_path).write_text(render_accuracy_table([("HMACA", values)]), encoding="utf-8")
    return 0


def cmd_evaluate(args: argparse.Namespace) -> int:
    try:
        cfg = _merged_config(args)
        try:
            return _run_evaluate(cfg)
        except (EmptyTestSet, *_PARSE_ERRORS) as exc:
            _err(str(exc))
            return EXIT_INPUT
    except ConfigError as exc:
        _err(str(exc))
        return EXIT_CONFIG


# --- inspect-ca ---

def cmd_inspect_ca(args: argparse.Namespace) -> int:
    try:
        dep = DependencyString.from_hex(args.rule_hex)
    except (ValueError, HmacaError) as exc:
        _err(str(exc))
        return EXIT_CONFIG
    if dep.width > ENUM_MAX_WIDTH:
        _err(f"width {dep.width} exceeds enumeration cap {ENUM_MAX_WIDTH}")
        return EXIT_CONFIG

    spec = build_transition(dep)
    basins = enumerate_basins(spec)
    summary = dynamics_summary(spec)
    sizes = basins.basin_sizes()

    lines = [f"rule\t{dep.to_hex()}", f"width\t{dep.width}", "matrix:"]
    lines.extend("".join(str(int(v)) for v in row) for row in spec.matrix)
    lines.append("inversion\t" + "".join(str(int(v)) for v in spec.invert))
    lines.append(f"attractors\t{len(basins.attractors)}")
    for idx, attractor in enumerate(basins.attractors):
        lines.append(
            f"attractor\t{attractor.attractor_id.to_string()}\t"
            f"cycle_length={attractor.cycle_length}\tbasin_size={int(sizes[idx])}"
        )
    lines.append(f"max_transient\t{summary.max_transient}")
    lines.append(f"tag\t{summary.tag}")
    print("\n".join(lines))
    return 0


# --- parser ---

def _add_shared(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="key=value config file")
    parser.add_argument("--task", choices=TASKS)
    parser.add_argument("--window", type=int)
    parser.add_argument("--stride", type=int)
    parser.add_argument("--seed", type=int)
    parser.add_argument("--model")
    parser.add_argument("--out")
    parser.add_argument("--sequences")
    parser.add_argument("--labels")
    parser.add_argument("--table")
    parser.add_argument("--population", type=int)
    parser.add_argument("--generations", type=int)
    parser.add_argument("--elite-count", type=int, dest="elite_count")
    parser.add_argument("--crossover-rate", type=float, dest="crossover_rate")
    parser.add_argument("--mutation-rate", type=float, dest="mutation_rate")
    parser.add_argument("--step-budget", type=int, dest="step_budget")
    parser.add_argument("--max-depth", type=int, dest="max_depth")
    parser.add_argument("--min-node-size", type=int, dest="min_node_size")
    parser.add_argument("--purity-threshold", type=float, dest="purity_threshold")
    parser.add_argument("--threshold", type=float)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hmaca",
        description="cellular-automata basin classifier for DNA/protein sequences",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_train = sub.add_parser("train", help="evolve a classifier tree from labeled sequences")
    _add_shared(p_train)
    p_train.set_defaults(func=cmd_train)

    p_pred = sub.add_parser("predict", help="per-position predictions for a sequence file")
    _add_shared(p_pred)
    p_pred.set_defaults(func=cmd_predict)

    p_eval = sub.add_parser("evaluate", help="score a model against labeled sequences")
    _add_shared(p_eval)
    p_eval.set_defaults(func=cmd_evaluate)

    p_insp = sub.add_parser("inspect-ca", help="matrix, attractors and dynamics of a rule")
    p_insp.add_argument("rule_hex", help="dependency string, one hex digit per cell")
    p_insp.set_defaults(func=cmd_inspect_ca)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    raise SystemExit(main())
