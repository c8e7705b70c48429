"""Deterministic synthetic corpora.

The published evaluation corpora are not pinned down well enough to
redistribute, so demos and regression tests run on generated DNA with a
planted promoter-like motif.  Everything is seeded: the same seed
always yields the same FASTA/interval bytes.
"""

from __future__ import annotations

import argparse
from pathlib import Path

import numpy as np

from .encode import CODING, PROMOTER, LabeledWindow, NucleotideSeq, WindowSpec, encode_dna_window

DEFAULT_MOTIF = "TATAAT"

BASES = "ACGT"


def random_dna(rng: np.random.Generator, length: int, forbid: str | None = None) -> str:
    """Random sequence; resamples until it avoids the forbidden motif."""
    while True:
        seq = "".join(BASES[i] for i in rng.integers(0, 4, size=length))
        if forbid is None or forbid not in seq:
            return seq


def motif_window_set(
    n_windows: int,
    window_length: int,
    motif: str = DEFAULT_MOTIF,
    seed: int = 0,
    offset: int = 1,
) -> list[LabeledWindow]:
    """Separable 2-class window set: class 1 carries the motif at a fixed
    offset, class 0 is motif-free background."""
    if offset + len(motif) > window_length:
        raise ValueError("motif does not fit the window at this offset")
    rng = np.random.Generator(np.random.PCG64(seed))
    spec = WindowSpec(window_length, 1, PROMOTER)
    windows: list[LabeledWindow] = []
    for i in range(n_windows):
        if i % 2 == 0:
            while True:
                left = random_dna(rng, offset) if offset else ""
                tail = window_length - offset - len(motif)
                right = random_dna(rng, tail) if tail else ""
                bases = left + motif + right
                if bases.find(motif) == offset and bases.find(motif, offset + 1) == -1:
                    break
            label = 1
        else:
            bases = random_dna(rng, window_length, forbid=motif)
            label = 0
        seq = NucleotideSeq(f"w{i}", bases)
        windows.append(LabeledWindow(seq.id, 0, encode_dna_window(seq, 0, spec), label))
    return windows


def make_promoter_corpus(
    n_sequences: int,
    seq_length: int,
    motifs_per_seq: int = 2,
    motif: str = DEFAULT_MOTIF,
    seed: int = 0,
    id_prefix: str = "syn",
) -> tuple[list[NucleotideSeq], dict[str, list[tuple[int, int, str]]]]:
    """Sequences of motif-free background with motifs planted at random
    non-overlapping positions; intervals mark every planted occurrence."""
    rng = np.random.Generator(np.random.PCG64(seed))
    m = len(motif)
    seqs: list[NucleotideSeq] = []
    intervals: dict[str, list[tuple[int, int, str]]] = {}
    for i in range(n_sequences):
        background = random_dna(rng, seq_length, forbid=motif)
        positions: list[int] = []
        while len(positions) < motifs_per_seq:
            pos = int(rng.integers(0, seq_length - m + 1))
            if all(abs(pos - p) >= m for p in positions):
                positions.append(pos)
        chars = list(background)
        for pos in sorted(positions):
            chars[pos : pos + m] = motif
        seq_id = f"{id_prefix}{i}"
        seqs.append(NucleotideSeq(seq_id, "".join(chars)))
        intervals[seq_id] = [(pos, pos + m, "promoter") for pos in sorted(positions)]
    return seqs, intervals


def write_fasta(path: Path, seqs: list[NucleotideSeq]) -> None:
    lines = []
    for seq in seqs:
        lines.append(f">{seq.id}")
        lines.append(seq.residues)
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def write_intervals(path: Path, intervals: dict[str, list[tuple[int, int, str]]]) -> None:
    lines = [
        f"{seq_id}\t{start}\t{end}\t{name}"
        for seq_id in intervals
        for start, end, name in intervals[seq_id]
    ]
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def generate_bundled_corpus(out_dir: Path, seed: int = 7) -> None:
    """The corpus shipped under data/synthetic/: small train and eval
    promoter sets with the default motif."""
    out_dir.mkdir(parents=True, exist_ok=True)
    train_seqs, train_iv = make_promoter_corpus(
        6, 80, motifs_per_seq=2, seed=seed, id_prefix="train"
    )
    eval_seqs, eval_iv = make_promoter_corpus(
        3, 80, motifs_per_seq=2, seed=seed + 1, id_prefix="eval"
    )
    write_fasta(out_dir / "train.fasta", train_seqs)
    write_intervals(out_dir / "train_labels.tsv", train_iv)
    write_fasta(out_dir / "eval.fasta", eval_seqs)
    write_intervals(out_dir / "eval_labels.tsv", eval_iv)


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(description="generate the bundled synthetic corpus")
    parser.add_argument("--out", required=True, type=Path)
    parser.add_argument("--seed", type=int, default=7)
    args = parser.parse_args(argv)
    generate_bundled_corpus(args.out, args.seed)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
