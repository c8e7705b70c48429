"""Sequence ingestion and window encoding.

DNA and protein sequences are cut into fixed-length sliding windows and
packed into CA states: 2 bits per nucleotide (A=00, C=01, G=10, T=11)
and 5 bits per amino acid (alphabetical index over the 20 standard
letters, X=20).  The first symbol of a window lands in the most
significant bits, matching the cell order of the CA.

Window labels come from annotations: interval files mark positive
regions for the two DNA tasks (a window is positive when its center
base falls inside any interval), and a per-residue H/E/C string labels
structure windows by their center residue.
"""

from __future__ import annotations

from collections.abc import Iterable, Sequence
from dataclasses import dataclass

from .ca import MAX_WIDTH, CaState
from .errors import (
    AmbiguousBase,
    AnnotationLengthMismatch,
    EmptyFile,
    IllegalSymbol,
    LabelFormatError,
    MalformedHeader,
    UnknownStructureSymbol,
    WindowOutOfBounds,
)

CODING = "coding"
PROMOTER = "promoter"
SECONDARY_STRUCTURE = "structure"
TASKS = (CODING, PROMOTER, SECONDARY_STRUCTURE)

DNA_ALPHABET = "ACGTN"
DNA_CODE = {"A": 0, "C": 1, "G": 2, "T": 3}

AA20 = "ACDEFGHIKLMNPQRSTVWY"
PROTEIN_ALPHABET = AA20 + "X"
AA_CODE = {aa: i for i, aa in enumerate(AA20)}
AA_CODE["X"] = 20

STRUCTURE_ALPHABET = "HEC"
STRUCTURE_CODE = {"H": 0, "E": 1, "C": 2}
STRUCTURE_NAMES = ("H", "E", "C")


def bits_per_symbol(task: str) -> int:
    return 5 if task == SECONDARY_STRUCTURE else 2


@dataclass(frozen=True)
class NucleotideSeq:
    id: str
    residues: str

    def __post_init__(self) -> None:
        bad = next((c for c in self.residues if c not in DNA_ALPHABET), None)
        if bad is not None:
            raise IllegalSymbol(f"illegal nucleotide {bad!r} in sequence {self.id!r}")

    def __len__(self) -> int:
        return len(self.residues)


@dataclass(frozen=True)
class ProteinSeq:
    id: str
    residues: str

    def __post_init__(self) -> None:
        bad = next((c for c in self.residues if c not in PROTEIN_ALPHABET), None)
        if bad is not None:
            raise IllegalSymbol(f"illegal residue {bad!r} in sequence {self.id!r}")

    def __len__(self) -> int:
        return len(self.residues)


@dataclass(frozen=True)
class WindowSpec:
    """Window geometry and target task; fixes the CA width."""

    window_length: int
    stride: int
    task: str

    def __post_init__(self) -> None:
        if self.task not in TASKS:
            raise ValueError(f"unknown task {self.task!r}")
        if self.window_length < 1:
            raise ValueError("window_length must be positive")
        if self.stride < 1:
            raise ValueError("stride must be positive")
        if self.width > MAX_WIDTH:
            raise ValueError(
                f"window of {self.window_length} symbols needs width "
                f"{self.width} > cap {MAX_WIDTH}"
            )

    @property
    def width(self) -> int:
        return bits_per_symbol(self.task) * self.window_length


@dataclass(frozen=True)
class LabeledWindow:
    source_id: str
    start: int
    bits: CaState
    label: int


def parse_fasta(lines: Iterable[str], kind: str = "dna") -> list[NucleotideSeq] | list[ProteinSeq]:
    """Parse FASTA text into validated sequence records.

    kind selects the alphabet ("dna" or "protein"); lower case folds to
    upper.  Errors report 1-based line (and column for bad symbols).
    """
    if kind == "dna":
        alphabet, factory = DNA_ALPHABET, NucleotideSeq
    elif kind == "protein":
        alphabet, factory = PROTEIN_ALPHABET, ProteinSeq
    else:
        raise ValueError(f"unknown sequence kind {kind!r}")

    records = []
    current_id: str | None = None
    chunks: list[str] = []

    def flush() -> None:
        if current_id is not None:
            records.append(factory(current_id, "".join(chunks)))

    for lineno, raw in enumerate(_as_lines(lines), start=1):
        line = raw.rstrip("\n").rstrip("\r")
        if not line.strip():
            continue
        if line.startswith(">"):
            flush()
            tokens = line[1:].split()
            if not tokens:
                raise MalformedHeader(f"line {lineno}: header with empty id")
            current_id = tokens[0]
            chunks = []
            continue
        if current_id is None:
            raise MalformedHeader(f"line {lineno}: sequence data before any '>' header")
        folded = line.strip().upper()
        for col, c in enumerate(folded, start=1):
            if c not in alphabet:
                raise IllegalSymbol(f"line {lineno}, column {col}: illegal symbol {c!r}")
        chunks.append(folded)

    flush()
    if not records:
        raise EmptyFile("no sequence records found")
    return records


def parse_structure_labels(lines: Iterable[str]) -> dict[str, str]:
    """FASTA-like H/E/C annotation file -> id to structure string."""
    out: dict[str, str] = {}
    current_id: str | None = None
    chunks: list[str] = []

    def flush() -> None:
        if current_id is not None:
            out[current_id] = "".join(chunks)

    for lineno, raw in enumerate(_as_lines(lines), start=1):
        line = raw.rstrip("\n").rstrip("\r")
        if not line.strip():
            continue
        if line.startswith(">"):
            flush()
            tokens = line[1:].split()
            if not tokens:
                raise MalformedHeader(f"line {lineno}: header with empty id")
            current_id = tokens[0]
            chunks = []
            continue
        if current_id is None:
            raise MalformedHeader(f"line {lineno}: data before any '>' header")
        folded = line.strip().upper()
        for col, c in enumerate(folded, start=1):
            if c not in STRUCTURE_ALPHABET:
                raise UnknownStructureSymbol(
                    f"line {lineno}, column {col}: expected H/E/C, got {c!r}"
                )
        chunks.append(folded)

    flush()
    if not out:
        raise EmptyFile("no structure records found")
    return out


def parse_intervals(lines: Iterable[str]) -> dict[str, list[tuple[int, int, str]]]:
    """Interval TSV (seq_id, start, end, label_name; 0-based half-open)."""
    out: dict[str, list[tuple[int, int, str]]] = {}
    for lineno, raw in enumerate(_as_lines(lines), start=1):
        line = raw.rstrip("\n").rstrip("\r")
        if not line.strip() or line.startswith("#"):
            continue
        fields = line.split("\t")
        if len(fields) != 4:
            raise LabelFormatError(f"line {lineno}: expected 4 tab-separated fields")
        seq_id, start_s, end_s, name = fields
        try:
            start, end = int(start_s), int(end_s)
        except ValueError:
            raise LabelFormatError(f"line {lineno}: non-integer interval bounds") from None
        if start < 0 or end < start:
            raise LabelFormatError(f"line {lineno}: bad interval [{start}, {end})")
        out.setdefault(seq_id, []).append((start, end, name))
    return out


def _as_lines(lines: Iterable[str]) -> Iterable[str]:
    if isinstance(lines, str):
        return lines.splitlines()
    return lines


def encode_dna_window(seq: NucleotideSeq, start: int, spec: WindowSpec) -> CaState:
    """Pack window bases into a CA state, 2 bits each, 5' end first."""
    if spec.task not in (CODING, PROMOTER):
        raise ValueError("DNA windows apply to the coding/promoter tasks")
    if start < 0 or start + spec.window_length > len(seq):
        raise WindowOutOfBounds(
            f"window [{start}, {start + spec.window_length}) exceeds sequence "
            f"{seq.id!r} of length {len(seq)}"
        )
    value = 0
    for i in range(start, start + spec.window_length):
        base = seq.residues[i]
        if base == "N":
            raise AmbiguousBase(f"N at position {i} in sequence {seq.id!r}")
        value = value << 2 | DNA_CODE[base]
    return CaState(value, spec.width)


def encode_protein_window(seq: ProteinSeq, start: int, spec: WindowSpec) -> CaState:
    """Pack window residues into a CA state, 5 bits each."""
    if spec.task != SECONDARY_STRUCTURE:
        raise ValueError("protein windows apply to the structure task")
    if start < 0 or start + spec.window_length > len(seq):
        raise WindowOutOfBounds(
            f"window [{start}, {start + spec.window_length}) exceeds sequence "
            f"{seq.id!r} of length {len(seq)}"
        )
    value = 0
    for i in range(start, start + spec.window_length):
        value = value << 5 | AA_CODE[seq.residues[i]]
    return CaState(value, spec.width)


def label_windows(
    seq: NucleotideSeq | ProteinSeq,
    annotations: Sequence[tuple] | str,
    spec: WindowSpec,
) -> tuple[list[LabeledWindow], int]:
    """Slide the window over one sequence and label every position.

    DNA tasks take intervals ((start, end) or (start, end, name) tuples):
    label 1 iff the window's center base lies inside any of them.
    The structure task takes an H/E/C string of equal length: label is
    the class of the center residue.  Returns the windows plus the count
    of windows skipped because they contained an ambiguous base.
    """
    wl = spec.window_length
    if spec.task == SECONDARY_STRUCTURE:
        if not isinstance(annotations, str):
            raise TypeError("structure task needs a per-residue annotation string")
        if len(annotations) != len(seq):
            raise AnnotationLengthMismatch(
                f"annotation length {len(annotations)} != sequence length "
                f"{len(seq)} for {seq.id!r}"
            )
        for col, c in enumerate(annotations, start=1):
            if c not in STRUCTURE_ALPHABET:
                raise UnknownStructureSymbol(f"column {col}: expected H/E/C, got {c!r}")
        encode = encode_protein_window
    else:
        intervals = [(iv[0], iv[1]) for iv in annotations]
        encode = encode_dna_window

    windows: list[LabeledWindow] = []
    skipped = 0
    for start in range(0, len(seq) - wl + 1, spec.stride):
        try:
            bits = encode(seq, start, spec)
        except AmbiguousBase:
            skipped += 1
            continue
        center = start + wl // 2
        if spec.task == SECONDARY_STRUCTURE:
            label = STRUCTURE_CODE[annotations[center]]
        else:
            label = int(any(s <= center < e for s, e in intervals))
        windows.append(LabeledWindow(seq.id, start, bits, label))
    return windows, skipped
