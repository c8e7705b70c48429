"""Encoding tests: FASTA parsing, window packing, labeling."""

from __future__ import annotations

import numpy as np
import pytest

from hmaca.ca import CaState
from hmaca.encode import (
    AA20,
    CODING,
    PROMOTER,
    SECONDARY_STRUCTURE,
    LabeledWindow,
    NucleotideSeq,
    ProteinSeq,
    WindowSpec,
    encode_dna_window,
    encode_protein_window,
    label_windows,
    parse_fasta,
    parse_intervals,
    parse_structure_labels,
)
from hmaca.errors import (
    AmbiguousBase,
    AnnotationLengthMismatch,
    EmptyFile,
    IllegalSymbol,
    LabelFormatError,
    MalformedHeader,
    UnknownStructureSymbol,
    WindowOutOfBounds,
)


def decode_dna(state: CaState, length: int) -> str:
    """Test oracle: invert the 2-bit packing."""
    lookup = "ACGT"
    out = []
    for i in range(length):
        code = (state.bits >> (2 * (length - 1 - i))) & 3
        out.append(lookup[code])
    return "".join(out)


def decode_protein(state: CaState, length: int) -> str:
    lookup = AA20 + "X"
    out = []
    for i in range(length):
        code = (state.bits >> (5 * (length - 1 - i))) & 31
        out.append(lookup[code])
    return "".join(out)


# --- FASTA ---

def test_parse_single_dna_record():
    recs = parse_fasta(">s1\nACGT\n", kind="dna")
    assert recs == [NucleotideSeq("s1", "ACGT")]


def test_parse_protein_record():
    recs = parse_fasta(">p1\nASQKR\n", kind="protein")
    assert recs == [ProteinSeq("p1", "ASQKR")]


def test_parse_missing_header():
    with pytest.raises(MalformedHeader):
        parse_fasta("ACGT\n", kind="dna")


def test_parse_empty_file():
    with pytest.raises(EmptyFile):
        parse_fasta("", kind="dna")
    with pytest.raises(EmptyFile):
        parse_fasta("\n\n", kind="dna")


def test_parse_illegal_symbol_reports_position():
    with pytest.raises(IllegalSymbol) as err:
        parse_fasta(">s\nACGT\nACQT\n", kind="dna")
    assert "line 3" in str(err.value)
    assert "column 3" in str(err.value)


def test_parse_folds_lower_case_and_joins_lines():
    recs = parse_fasta(">s desc ignored\nacg\nt\n", kind="dna")
    assert recs[0].id == "s"
    assert recs[0].residues == "ACGT"


def test_parse_multiple_records():
    recs = parse_fasta(">a\nAC\n>b\nGT\n", kind="dna")
    assert [r.id for r in recs] == ["a", "b"]


def test_parse_empty_header_id():
    with pytest.raises(MalformedHeader):
        parse_fasta(">\nACGT\n", kind="dna")


# --- DNA windows ---

def test_encode_dna_table():
    spec = WindowSpec(4, 1, CODING)
    seq = NucleotideSeq("s", "ACGT")
    assert encode_dna_window(seq, 0, spec).to_string() == "00011011"


def test_encode_dna_all_a():
    spec = WindowSpec(4, 1, PROMOTER)
    assert encode_dna_window(NucleotideSeq("s", "AAAA"), 0, spec).bits == 0


def test_encode_dna_ambiguous():
    spec = WindowSpec(4, 1, CODING)
    with pytest.raises(AmbiguousBase):
        encode_dna_window(NucleotideSeq("s", "ACNT"), 0, spec)


def test_encode_dna_out_of_bounds():
    spec = WindowSpec(4, 1, CODING)
    with pytest.raises(WindowOutOfBounds):
        encode_dna_window(NucleotideSeq("s", "ACG"), 0, spec)
    with pytest.raises(WindowOutOfBounds):
        encode_dna_window(NucleotideSeq("s", "ACGT"), 1, spec)


# --- protein windows ---

def test_encode_protein_first_and_last():
    spec = WindowSpec(1, 1, SECONDARY_STRUCTURE)
    assert encode_protein_window(ProteinSeq("p", "A"), 0, spec).to_string() == "00000"
    assert encode_protein_window(ProteinSeq("p", "Y"), 0, spec).to_string() == "10011"
    assert encode_protein_window(ProteinSeq("p", "X"), 0, spec).to_string() == "10100"


def test_encode_protein_concatenates():
    spec = WindowSpec(2, 1, SECONDARY_STRUCTURE)
    state = encode_protein_window(ProteinSeq("p", "AS"), 0, spec)
    assert state.width == 10
    assert state.to_string() == "00000" + format(AA20.index("S"), "05b")


def test_encode_round_trip_is_injective():
    rng = np.random.default_rng(31)
    dna_spec = WindowSpec(6, 1, CODING)
    for _ in range(50):
        bases = "".join("ACGT"[i] for i in rng.integers(0, 4, size=6))
        state = encode_dna_window(NucleotideSeq("s", bases), 0, dna_spec)
        assert decode_dna(state, 6) == bases
    prot_spec = WindowSpec(3, 1, SECONDARY_STRUCTURE)
    for _ in range(50):
        residues = "".join(AA20[i] for i in rng.integers(0, 20, size=3))
        state = encode_protein_window(ProteinSeq("p", residues), 0, prot_spec)
        assert decode_protein(state, 3) == residues


# --- labeling ---

def test_label_windows_interval_center_rule():
    spec = WindowSpec(4, 4, CODING)
    seq = NucleotideSeq("s", "ACGTACGT")
    windows, skipped = label_windows(seq, [(0, 4)], spec)
    assert skipped == 0
    assert [(w.start, w.label) for w in windows] == [(0, 1), (4, 0)]


def test_label_windows_structure_string():
    spec = WindowSpec(1, 1, SECONDARY_STRUCTURE)
    seq = ProteinSeq("p", "AAAAA")
    windows, skipped = label_windows(seq, "HHEEC", spec)
    assert [w.label for w in windows] == [0, 0, 1, 1, 2]
    assert skipped == 0


def test_label_windows_annotation_length_mismatch():
    spec = WindowSpec(1, 1, SECONDARY_STRUCTURE)
    with pytest.raises(AnnotationLengthMismatch):
        label_windows(ProteinSeq("p", "AAAAA"), "HHEE", spec)


def test_label_windows_unknown_structure_symbol():
    spec = WindowSpec(1, 1, SECONDARY_STRUCTURE)
    with pytest.raises(UnknownStructureSymbol):
        label_windows(ProteinSeq("p", "AAAAA"), "HHEEZ", spec)


def test_label_windows_skips_ambiguous():
    spec = WindowSpec(2, 2, CODING)
    seq = NucleotideSeq("s", "ACNTAC")
    windows, skipped = label_windows(seq, [], spec)
    assert skipped == 1  # window at 2 contains the N
    assert [w.start for w in windows] == [0, 4]
    assert all(w.label == 0 for w in windows)


def test_window_count_identity():
    rng = np.random.default_rng(32)
    for _ in range(30):
        length = int(rng.integers(8, 40))
        wl = int(rng.integers(2, 7))
        stride = int(rng.integers(1, 5))
        bases = "".join("ACGTN"[i] for i in rng.integers(0, 5, size=length))
        seq = NucleotideSeq("s", bases)
        spec = WindowSpec(wl, stride, PROMOTER)
        windows, skipped = label_windows(seq, [(0, 3)], spec)
        expected_slots = (length - wl) // stride + 1 if length >= wl else 0
        assert len(windows) + skipped == expected_slots
        widths = {w.bits.width for w in windows}
        assert widths <= {spec.width}


# --- interval parsing ---

def test_parse_intervals_good():
    text = "s1\t0\t4\tpromoter\ns1\t10\t16\tpromoter\ns2\t3\t5\tx\n"
    out = parse_intervals(text)
    assert out == {"s1": [(0, 4, "promoter"), (10, 16, "promoter")], "s2": [(3, 5, "x")]}


def test_parse_intervals_bad_field_count():
    with pytest.raises(LabelFormatError):
        parse_intervals("s1\t0\t4\n")


def test_parse_intervals_end_before_start():
    with pytest.raises(LabelFormatError):
        parse_intervals("s1\t6\t2\tx\n")


def test_parse_intervals_non_integer():
    with pytest.raises(LabelFormatError):
        parse_intervals("s1\tzero\t4\tx\n")


def test_parse_structure_labels_good():
    out = parse_structure_labels(">p1\nHHEEC\n>p2\nCCC\n")
    assert out == {"p1": "HHEEC", "p2": "CCC"}


def test_parse_structure_labels_bad_symbol():
    with pytest.raises(UnknownStructureSymbol):
        parse_structure_labels(">p1\nHHQ\n")
