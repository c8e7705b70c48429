"""Multiple-attractor cellular automata classifier toolkit.

Pipeline: encode DNA/protein sequence windows as GF(2) CA states, evolve
per-cell CA rules whose attractor basins sort the training classes, stack
the evolved rules into a recursive partition tree, and drive the whole
thing from a reproducible train/predict/evaluate CLI.
"""

from .ca import (
    AttractorResult,
    BasinMap,
    CaState,
    CellGene,
    DependencyString,
    TransitionSpec,
    build_transition,
    dynamics_summary,
    enumerate_basins,
    evolve_to_attractor,
    fixed_point_count,
    step,
    step_local,
)
from .encode import (
    LabeledWindow,
    NucleotideSeq,
    ProteinSeq,
    WindowSpec,
    encode_dna_window,
    encode_protein_window,
    label_windows,
    parse_fasta,
)
from .evaluate import Metrics, PredictionRecord, evaluate, render_accuracy_table, render_prediction_tsv, split
from .ga import Chromosome, EvolveResult, GaConfig, Pattern, PatternSet, evolve, fitness
from .tree import TrainedTree, TreeConfig, load_tree, partition, predict, save_tree, train_tree, tree_stats

__version__ = "0.1.0"
