"""Additive one-dimensional cellular automata over GF(2).

A CA is described by a per-cell dependency string: each cell reads up to
three neighbors (left, self, right; null boundary) and may invert its
output.  The global update is the affine map

    next_state = (T . s) xor F

where T is a tridiagonal bit matrix built from the dependency bits and F
is the per-cell inversion vector.  States are packed into Python ints
with cell 0 as the most significant bit, so integer order coincides with
lexicographic order of the bit strings.

The module provides the matrix construction, stepping (a packed fast
path equal to T.s xor F, plus an independent per-cell local-rule path),
attractor/basin analysis by exhaustive enumeration at small widths, and
the rank-based fixed-point count.
"""

from __future__ import annotations

from collections import Counter
from collections.abc import Iterable
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .errors import (
    NotLinear,
    StepBudgetExceeded,
    WidthMismatch,
    WidthOutOfRange,
    WidthTooLargeForEnumeration,
)

MAX_WIDTH = 256          # hard cap on CA width
ENUM_MAX_WIDTH = 20      # exhaustive enumeration bound (2^20 states)
DEFAULT_MAX_STEPS = 10_000

TAG_HOMOGENEOUS = "HOMOGENEOUS"
TAG_PERIODIC = "PERIODIC"
TAG_LONG_CYCLE = "LONG_CYCLE"

# Cycle lengths up to this count as "short" for the PERIODIC diagnostic tag.
SHORT_CYCLE_LEN = 4


class CellGene(NamedTuple):
    """One cell's rule: three neighbor-dependency bits plus an invert bit."""

    dep_left: int
    dep_self: int
    dep_right: int
    invert: int

    def nibble(self) -> int:
        return self.dep_left << 3 | self.dep_self << 2 | self.dep_right << 1 | self.invert

    @staticmethod
    def from_nibble(value: int) -> "CellGene":
        return CellGene((value >> 3) & 1, (value >> 2) & 1, (value >> 1) & 1, value & 1)


RULE_90_GENE = CellGene(1, 0, 1, 0)    # cell = left xor right
RULE_150_GENE = CellGene(1, 1, 1, 0)   # cell = left xor self xor right
IDENTITY_GENE = CellGene(0, 1, 0, 0)


@dataclass(frozen=True)
class DependencyString:
    """Per-cell rule genome of a CA; the object the GA evolves."""

    genes: tuple[CellGene, ...]

    def __post_init__(self) -> None:
        n = len(self.genes)
        if n < 1 or n > MAX_WIDTH:
            raise WidthOutOfRange(f"width {n} outside [1, {MAX_WIDTH}]")
        for g in self.genes:
            if any(b not in (0, 1) for b in g):
                raise ValueError(f"gene bits must be 0/1, got {g}")

    @property
    def width(self) -> int:
        return len(self.genes)

    @staticmethod
    def uniform(width: int, gene: CellGene) -> "DependencyString":
        """Homogeneous CA: every cell runs the same gene."""
        return DependencyString((gene,) * width)

    @staticmethod
    def random(width: int, rng: np.random.Generator) -> "DependencyString":
        nibbles = rng.integers(0, 16, size=width)
        return DependencyString(tuple(CellGene.from_nibble(int(v)) for v in nibbles))

    def to_hex(self) -> str:
        """One hex digit per cell (dl<<3|ds<<2|dr<<1|inv), cell 0 first."""
        return "".join(f"{g.nibble():X}" for g in self.genes)

    @staticmethod
    def from_hex(text: str) -> "DependencyString":
        if not text or any(c not in "0123456789abcdefABCDEF" for c in text):
            raise ValueError(f"invalid dependency string hex: {text!r}")
        return DependencyString(tuple(CellGene.from_nibble(int(c, 16)) for c in text))


@dataclass(frozen=True)
class CaState:
    """Fixed-width bit vector; cell 0 is the most significant bit."""

    bits: int
    width: int

    def __post_init__(self) -> None:
        if self.width < 1 or self.width > MAX_WIDTH:
            raise WidthOutOfRange(f"width {self.width} outside [1, {MAX_WIDTH}]")
        if self.bits < 0 or self.bits >> self.width:
            raise ValueError(f"bits {self.bits:#x} do not fit in width {self.width}")

    def bit(self, cell: int) -> int:
        return (self.bits >> (self.width - 1 - cell)) & 1

    def to_string(self) -> str:
        return format(self.bits, f"0{self.width}b")

    @staticmethod
    def from_string(text: str) -> "CaState":
        return CaState(int(text, 2), len(text))

    def to_hex(self) -> str:
        return format(self.bits, f"0{(self.width + 3) // 4}X")

    @staticmethod
    def from_hex(text: str, width: int) -> "CaState":
        return CaState(int(text, 16), width)

    @staticmethod
    def from_bits(bits: Iterable[int]) -> "CaState":
        seq = list(bits)
        value = 0
        for b in seq:
            value = value << 1 | (b & 1)
        return CaState(value, len(seq))


@dataclass(frozen=True, eq=False)
class TransitionSpec:
    """Matrix realization of a dependency string.

    matrix is tridiagonal over GF(2) (row i nonzero only at i-1, i, i+1;
    null boundary drops out-of-range columns); invert is the affine part.
    basis_images[p] caches the packed image of the basis state whose int
    bit p is set, so (T.s) is an XOR of cached columns.
    """

    matrix: np.ndarray
    invert: np.ndarray
    width: int
    basis_images: tuple[int, ...] = field(repr=False)
    invert_mask: int = field(repr=False)


def build_transition(dep: DependencyString) -> TransitionSpec:
    """Realize a dependency string as its affine GF(2) transition map."""
    n = dep.width
    T = np.zeros((n, n), dtype=np.uint8)
    F = np.zeros(n, dtype=np.uint8)
    for i, g in enumerate(dep.genes):
        if g.dep_left and i - 1 >= 0:
            T[i, i - 1] = 1
        if g.dep_self:
            T[i, i] = 1
        if g.dep_right and i + 1 < n:
            T[i, i + 1] = 1
        F[i] = g.invert

    # basis_images indexed by int bit position p; p corresponds to cell n-1-p.
    images = [0] * n
    rows, cols = np.nonzero(T)
    for r, c in zip(rows.tolist(), cols.tolist()):
        images[n - 1 - c] |= 1 << (n - 1 - r)
    invert_mask = 0
    for i in range(n):
        if F[i]:
            invert_mask |= 1 << (n - 1 - i)

    T.flags.writeable = False
    F.flags.writeable = False
    return TransitionSpec(T, F, n, tuple(images), invert_mask)


def _step_int(spec: TransitionSpec, bits: int) -> int:
    """(T . s) xor F on a packed state; T.s as an XOR of basis images."""
    acc = spec.invert_mask
    images = spec.basis_images
    t = bits
    while t:
        low = t & -t
        acc ^= images[low.bit_length() - 1]
        t ^= low
    return acc


def _check_width(spec: TransitionSpec, s: CaState) -> None:
    if s.width != spec.width:
        raise WidthMismatch(f"state width {s.width} != spec width {spec.width}")


def step(spec: TransitionSpec, s: CaState) -> CaState:
    """One synchronous update: (T . s) xor F over GF(2)."""
    _check_width(spec, s)
    return CaState(_step_int(spec, s.bits), s.width)


def step_local(dep: DependencyString, s: CaState) -> CaState:
    """One update evaluated cell by cell from the genes (null boundary).

    Independent of the matrix realization; must agree with step() on the
    TransitionSpec built from the same dependency string.
    """
    n = dep.width
    if s.width != n:
        raise WidthMismatch(f"state width {s.width} != rule width {n}")
    out = 0
    for i, g in enumerate(dep.genes):
        v = g.invert
        if g.dep_left and i > 0:
            v ^= s.bit(i - 1)
        if g.dep_self:
            v ^= s.bit(i)
        if g.dep_right and i < n - 1:
            v ^= s.bit(i + 1)
        out = out << 1 | v
    return CaState(out, n)


@dataclass(frozen=True)
class AttractorResult:
    """Identity of the attractor a trajectory drains into.

    attractor_id is the lexicographically smallest state on the cycle,
    which makes basin identities stable across detection algorithms.
    """

    attractor_id: CaState
    cycle_length: int
    transient_depth: int


def _find_cycle(step_fn, bits: int, width: int, max_steps: int) -> tuple[int, int, int]:
    """Walk bits under step_fn until a revisit: (canonical, cycle_len, transient)."""
    seen: dict[int, int] = {bits: 0}
    path = [bits]
    cur = bits
    for t in range(1, max_steps + 1):
        cur = step_fn(cur)
        first = seen.get(cur)
        if first is not None:
            cycle = path[first:]
            return min(cycle), t - first, first
        seen[cur] = t
        path.append(cur)
    raise StepBudgetExceeded(f"no cycle within {max_steps} steps at width {width}")


def evolve_to_attractor(
    spec: TransitionSpec, s: CaState, max_steps: int = DEFAULT_MAX_STEPS
) -> AttractorResult:
    """Iterate the CA from s until the trajectory revisits a state.

    Raises StepBudgetExceeded when no cycle closes within max_steps;
    cannot happen once max_steps >= 2^width.
    """
    _check_width(spec, s)
    if max_steps < 1:
        raise ValueError("max_steps must be >= 1")
    canonical, cycle_len, transient = _find_cycle(
        lambda bits: _step_int(spec, bits), s.bits, spec.width, max_steps
    )
    return AttractorResult(CaState(canonical, s.width), cycle_len, transient)


@dataclass(frozen=True, eq=False)
class BasinMap:
    """Total partition of the 2^n state space into attractor basins.

    assignment[state_int] is the index into attractors (sorted by
    canonical id); basin sizes therefore sum to 2^n.
    """

    attractors: tuple[AttractorResult, ...]
    assignment: np.ndarray
    width: int

    def basin_sizes(self) -> np.ndarray:
        return np.bincount(self.assignment, minlength=len(self.attractors))


def _next_state_table(spec: TransitionSpec) -> np.ndarray:
    """next_map[s] for all states, via the affine doubling identity
    next(s xor e_p) = next(s) xor T.e_p."""
    n = spec.width
    nxt = np.empty(1 << n, dtype=np.uint32)
    nxt[0] = spec.invert_mask
    for p in range(n):
        block = 1 << p
        nxt[block : 2 * block] = nxt[:block] ^ np.uint32(spec.basis_images[p])
    return nxt


def _enumerate(spec: TransitionSpec) -> tuple[tuple[AttractorResult, ...], np.ndarray, np.ndarray]:
    """Color every state with its attractor; also return transient depths."""
    if spec.width > ENUM_MAX_WIDTH:
        raise WidthTooLargeForEnumeration(
            f"width {spec.width} > enumeration cap {ENUM_MAX_WIDTH}"
        )
    nxt = _next_state_table(spec).tolist()
    size = 1 << spec.width
    assignment = np.full(size, -1, dtype=np.int32)
    transient = np.zeros(size, dtype=np.int32)
    found: list[tuple[int, int]] = []  # (canonical_id, cycle_length)

    for s0 in range(size):
        if assignment[s0] >= 0:
            continue
        path: list[int] = []
        pos: dict[int, int] = {}
        s = s0
        while assignment[s] < 0 and s not in pos:
            pos[s] = len(path)
            path.append(s)
            s = nxt[s]
        if assignment[s] >= 0:
            idx = int(assignment[s])
            base = int(transient[s])
        else:
            k = pos[s]
            cycle = path[k:]
            idx = len(found)
            found.append((min(cycle), len(cycle)))
            for c in cycle:
                assignment[c] = idx
            del path[k:]
            base = 0
        for back, state in enumerate(reversed(path)):
            assignment[state] = idx
            transient[state] = base + back + 1

    # Renumber so attractor indices follow canonical-id order.
    order = sorted(range(len(found)), key=lambda i: found[i][0])
    remap = np.empty(len(found), dtype=np.int32)
    for new, old in enumerate(order):
        remap[old] = new
    assignment = remap[assignment]
    attractors = tuple(
        AttractorResult(CaState(found[old][0], spec.width), found[old][1], 0)
        for old in order
    )
    return attractors, assignment, transient


def enumerate_basins(spec: TransitionSpec) -> BasinMap:
    """Exhaustively partition all 2^n states into attractor basins (n <= 20)."""
    attractors, assignment, _ = _enumerate(spec)
    return BasinMap(attractors, assignment, spec.width)


def gf2_row_echelon(M: np.ndarray) -> tuple[np.ndarray, list[int]]:
    """Row-reduce a binary matrix over GF(2) with XOR row operations.

    Returns the echelon form and the pivot column indices (their count is
    the GF(2) rank).
    """
    R = (np.asarray(M, dtype=np.uint8) % 2).copy()
    m, n = R.shape
    pivot_cols: list[int] = []
    pivot_row = 0
    for col in range(n):
        hit = -1
        for row in range(pivot_row, m):
            if R[row, col]:
                hit = row
                break
        if hit == -1:
            continue
        if hit != pivot_row:
            R[[pivot_row, hit]] = R[[hit, pivot_row]]
        for row in range(pivot_row + 1, m):
            if R[row, col]:
                R[row] ^= R[pivot_row]
        pivot_cols.append(col)
        pivot_row += 1
    return R, pivot_cols


def gf2_rank(M: np.ndarray) -> int:
    return len(gf2_row_echelon(M)[1])


def fixed_point_count(spec: TransitionSpec) -> int:
    """Number of fixed points of a linear CA: 2^(n - rank(T xor I)).

    Fixed points solve (T xor I).s = 0, so they form the kernel of
    T xor I and the count follows from its GF(2) rank.  Requires F = 0;
    see affine_fixed_point_count for the general case.
    """
    if spec.invert_mask:
        raise NotLinear("fixed_point_count requires F = 0")
    A = spec.matrix ^ np.eye(spec.width, dtype=np.uint8)
    return 1 << (spec.width - gf2_rank(A))


def affine_fixed_point_count(spec: TransitionSpec) -> int:
    """Fixed points of the affine map: solutions of (T xor I).s = F.

    Returns 0 when the system is inconsistent, else 2^(n - rank(T xor I)).
    """
    n = spec.width
    A = spec.matrix ^ np.eye(n, dtype=np.uint8)
    aug = np.concatenate([A, spec.invert.reshape(n, 1)], axis=1)
    R, pivots = gf2_row_echelon(aug)
    if n in pivots:  # pivot in the constant column -> no solution
        return 0
    return 1 << (n - len(pivots))


@dataclass(frozen=True)
class DynamicsSummary:
    """Coarse diagnostics of the state-transition graph.

    The tag is a heuristic: HOMOGENEOUS when the only attractor is the
    all-0 or all-1 fixed point, PERIODIC when several basins exist and
    every cycle is short, LONG_CYCLE otherwise.  It makes no claim about
    formal behavior-class membership.
    """

    attractor_count: int
    cycle_length_histogram: dict[int, int]
    max_transient: int
    tag: str


def dynamics_summary(spec: TransitionSpec) -> DynamicsSummary:
    attractors, _, transient = _enumerate(spec)
    histogram = dict(sorted(Counter(a.cycle_length for a in attractors).items()))
    all_ones = (1 << spec.width) - 1

    if (
        len(attractors) == 1
        and attractors[0].cycle_length == 1
        and attractors[0].attractor_id.bits in (0, all_ones)
    ):
        tag = TAG_HOMOGENEOUS
    elif len(attractors) > 1 and max(histogram) <= SHORT_CYCLE_LEN:
        tag = TAG_PERIODIC
    else:
        tag = TAG_LONG_CYCLE

    return DynamicsSummary(
        attractor_count=len(attractors),
        cycle_length_histogram=histogram,
        max_transient=int(transient.max()),
        tag=tag,
    )
