"""Exception hierarchy shared by all hmaca modules."""

from __future__ import annotations


class HmacaError(Exception):
    """Base class for all errors raised by this package."""


# --- CA engine ---

class WidthOutOfRange(HmacaError):
    """CA width is zero or exceeds the configured hard cap."""


class WidthMismatch(HmacaError):
    """State width does not match the transition spec width."""


class StepBudgetExceeded(HmacaError):
    """No cycle found within the allotted number of steps."""


class WidthTooLargeForEnumeration(HmacaError):
    """Exhaustive state-space enumeration is capped at small widths."""


class NotLinear(HmacaError):
    """Operation requires a pure linear CA (zero inversion vector)."""


# --- GA search ---

class UnevaluatedPopulation(HmacaError):
    """Breeding requires every chromosome to carry a cached fitness."""


# --- Tree ---

class EmptyTrainingSet(HmacaError):
    """Cannot partition an empty pattern set."""


class ModelFormatError(HmacaError):
    """Model file is malformed or carries an unknown format version."""


# --- Sequence encoding ---

class EmptyFile(HmacaError):
    """Input contains no sequence records."""


class MalformedHeader(HmacaError):
    """Sequence data before the first FASTA header, or an empty id."""


class IllegalSymbol(HmacaError):
    """Character outside the allowed alphabet; message carries line/column."""


class WindowOutOfBounds(HmacaError):
    """Requested window extends past the end of the sequence."""


class AmbiguousBase(HmacaError):
    """Window contains an N; caller decides whether to skip or impute."""


class AnnotationLengthMismatch(HmacaError):
    """Per-residue annotation string length differs from the sequence."""


class UnknownStructureSymbol(HmacaError):
    """Structure annotation contains a symbol other than H, E or C."""


class LabelFormatError(HmacaError):
    """Interval label file is malformed (bad field count, end < start, ...)."""


# --- Evaluation ---

class ClassWithZeroItems(HmacaError):
    """A class label in the declared range has no items."""


class EmptyTestSet(HmacaError):
    """Evaluation requires at least one test item."""


class InconsistentMethodColumns(HmacaError):
    """Prediction records disagree on the method column list."""
