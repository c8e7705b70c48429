"""Genetic search over dependency strings.

Evolves a population of CA rule genomes so that the attractor basins of
the induced CA sort a labeled pattern set by class.  Fitness is the
fraction of patterns whose basin's majority label matches their own,
damped when the rule fragments the set over more basins than the target
count.  A run is reproducible from its seed alone: every stochastic
draw comes from a stream keyed by (seed, generation, slot), so results
do not depend on evaluation order.
"""

from __future__ import annotations

from bisect import bisect_right
from collections import Counter
from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field, replace

import numpy as np

from .ca import (
    ENUM_MAX_WIDTH,
    CaState,
    CellGene,
    DependencyString,
    build_transition,
    evolve_to_attractor,
    _find_cycle,
    _next_state_table,
    _step_int,
)
from .errors import UnevaluatedPopulation

DEFAULT_POPULATION = 500
DEFAULT_ELITES = 2
DEFAULT_CROSSOVER_RATE = 0.9
DEFAULT_STEP_BUDGET = 10_000

# spawn-key tags for deriving independent RNG streams from the master seed
_STREAM_INIT = 0
_STREAM_BREED = 1


@dataclass(frozen=True)
class Pattern:
    bits: CaState
    label: int


@dataclass(frozen=True)
class PatternSet:
    """Labeled training patterns sharing one CA width."""

    patterns: tuple[Pattern, ...]
    class_count: int
    width: int

    def __post_init__(self) -> None:
        if not self.patterns:
            raise ValueError("pattern set must be non-empty")
        if self.class_count < 1:
            raise ValueError("class_count must be positive")
        for p in self.patterns:
            if p.bits.width != self.width:
                raise ValueError(
                    f"pattern width {p.bits.width} != set width {self.width}"
                )
            if not 0 <= p.label < self.class_count:
                raise ValueError(f"label {p.label} outside [0, {self.class_count})")

    @staticmethod
    def from_patterns(
        patterns: Iterable[Pattern], class_count: int | None = None
    ) -> "PatternSet":
        pats = tuple(patterns)
        if not pats:
            raise ValueError("pattern set must be non-empty")
        k = class_count if class_count is not None else 1 + max(p.label for p in pats)
        return PatternSet(pats, k, pats[0].bits.width)


def to_pattern_set(windows, class_count: int | None = None) -> PatternSet:
    """Adapt any objects carrying .bits/.label (e.g. LabeledWindow)."""
    return PatternSet.from_patterns(
        (Pattern(w.bits, w.label) for w in windows), class_count
    )


@dataclass(frozen=True)
class Chromosome:
    genome: DependencyString
    fitness: float | None = None


@dataclass(frozen=True)
class GaConfig:
    """Knobs of the evolutionary search.

    mutation_rate_per_bit of None means 1/(4n), i.e. one expected bit
    flip per genome.  target_basin_count is the number of attractor
    basins the classifier is asked for; rules using more get penalized.
    """

    max_generations: int
    rng_seed: int
    target_basin_count: int
    population_size: int = DEFAULT_POPULATION
    elite_count: int = DEFAULT_ELITES
    crossover_rate: float = DEFAULT_CROSSOVER_RATE
    mutation_rate_per_bit: float | None = None
    step_budget: int = DEFAULT_STEP_BUDGET

    def __post_init__(self) -> None:
        if self.max_generations < 1:
            raise ValueError("max_generations must be positive")
        if self.rng_seed < 0:
            raise ValueError("rng_seed must be a non-negative integer")
        if self.target_basin_count < 1:
            raise ValueError("target_basin_count must be positive")
        if self.population_size < 1:
            raise ValueError("population_size must be positive")
        if not 0 <= self.elite_count < self.population_size:
            raise ValueError("elite_count must be in [0, population_size)")
        if not 0.0 <= self.crossover_rate <= 1.0:
            raise ValueError("crossover_rate must be in [0, 1]")
        if self.mutation_rate_per_bit is not None and not 0.0 <= self.mutation_rate_per_bit <= 1.0:
            raise ValueError("mutation_rate_per_bit must be in [0, 1]")
        if self.step_budget < 1:
            raise ValueError("step_budget must be positive")

    def mutation_rate(self, width: int) -> float:
        if self.mutation_rate_per_bit is not None:
            return self.mutation_rate_per_bit
        return 1.0 / (4.0 * width)


@dataclass(frozen=True)
class EvolveResult:
    best: Chromosome
    best_fitness: float
    generations_run: int
    fitness_history: tuple[float, ...]
    basin_label_map: dict[CaState, int] = field(repr=False)


def _rng(seed: int, *key: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=key)))


def init_population(config: GaConfig, width: int) -> list[Chromosome]:
    """population_size chromosomes with uniformly random genes (seeded)."""
    rng = _rng(config.rng_seed, _STREAM_INIT)
    return [
        Chromosome(DependencyString.random(width, rng))
        for _ in range(config.population_size)
    ]


def group_by_attractor(
    dep: DependencyString, pset: PatternSet, step_budget: int = DEFAULT_STEP_BUDGET
) -> dict[CaState, list[int]]:
    """Map each attractor reached to the indices of patterns draining there.

    For small widths with enough patterns the full next-state table is
    cheaper than stepping each trajectory; both routes compute the same
    map, so the choice is invisible to callers.
    """
    spec = build_transition(dep)
    width = pset.width
    if width <= ENUM_MAX_WIDTH and (1 << width) <= 512 * len(pset.patterns):
        step_fn = _next_state_table(spec).tolist().__getitem__
    else:
        step_fn = lambda bits: _step_int(spec, bits)  # noqa: E731

    groups: dict[CaState, list[int]] = {}
    for i, p in enumerate(pset.patterns):
        canonical, _, _ = _find_cycle(step_fn, p.bits.bits, width, step_budget)
        groups.setdefault(CaState(canonical, width), []).append(i)
    return groups


def _majority(labels: Sequence[int]) -> tuple[int, int]:
    """(majority label, its count); ties pick the smallest label index."""
    counts = Counter(labels)
    label = max(counts, key=lambda lb: (counts[lb], -lb))
    return label, counts[label]


def majority_labels(
    groups: dict[CaState, list[int]], pset: PatternSet
) -> dict[CaState, int]:
    return {
        att: _majority([pset.patterns[i].label for i in idxs])[0]
        for att, idxs in groups.items()
    }


def fitness_from_groups(
    groups: dict[CaState, list[int]], pset: PatternSet, k_target: int
) -> float:
    correct = 0
    for idxs in groups.values():
        _, count = _majority([pset.patterns[i].label for i in idxs])
        correct += count
    value = correct / len(pset.patterns)
    used = len(groups)
    if used > k_target:
        value *= k_target / used
    return value


def fitness(c: Chromosome, p: PatternSet, config: GaConfig) -> float:
    """Majority-label basin consistency in [0, 1]; 1.0 is a perfect rule."""
    groups = group_by_attractor(c.genome, p, config.step_budget)
    return fitness_from_groups(groups, p, config.target_basin_count)


def _sorted_by_fitness(pop: Sequence[Chromosome]) -> list[Chromosome]:
    for c in pop:
        if c.fitness is None:
            raise UnevaluatedPopulation("every chromosome needs a cached fitness")
    return sorted(pop, key=lambda c: (-c.fitness, c.genome.to_hex()))


def _select_index(cum_weights: list[int], u: float) -> int:
    return bisect_right(cum_weights, u * cum_weights[-1])


def _mutate(dep: DependencyString, rate: float, rng: np.random.Generator) -> DependencyString:
    n = dep.width
    flips = rng.random(4 * n) < rate
    if not flips.any():
        return dep
    nibbles = [g.nibble() for g in dep.genes]
    for b in np.nonzero(flips)[0]:
        nibbles[b // 4] ^= 1 << (3 - b % 4)
    return DependencyString(tuple(CellGene.from_nibble(v) for v in nibbles))


def _breed_one(
    ranked: list[Chromosome],
    cum_weights: list[int],
    config: GaConfig,
    width: int,
    rng: np.random.Generator,
) -> Chromosome:
    pa = ranked[_select_index(cum_weights, rng.random())].genome
    pb = ranked[_select_index(cum_weights, rng.random())].genome
    if width > 1 and rng.random() < config.crossover_rate:
        point = int(rng.integers(1, width))  # cell boundary, never mid-gene
        child = DependencyString(pa.genes[:point] + pb.genes[point:])
    else:
        child = pa
    return Chromosome(_mutate(child, config.mutation_rate(width), rng))


def next_generation(
    pop: Sequence[Chromosome], config: GaConfig, generation: int
) -> list[Chromosome]:
    """Elitism + rank selection + single-point crossover + per-bit mutation.

    Child slot i draws from an RNG stream keyed (seed, generation, i),
    so breeding is order-independent and reproducible.
    """
    ranked = _sorted_by_fitness(pop)
    width = ranked[0].genome.width
    size = config.population_size
    # linear rank weights: best gets size, worst gets 1
    cum_weights: list[int] = []
    acc = 0
    for r in range(len(ranked)):
        acc += len(ranked) - r
        cum_weights.append(acc)

    out: list[Chromosome] = list(ranked[: config.elite_count])
    for slot in range(config.elite_count, size):
        rng = _rng(config.rng_seed, _STREAM_BREED, generation, slot)
        out.append(_breed_one(ranked, cum_weights, config, width, rng))
    return out


def evolve(p: PatternSet, config: GaConfig) -> EvolveResult:
    """Run the full generational loop.

    Evaluates every generation, stops early the moment some chromosome
    reaches fitness 1.0, otherwise breeds exactly max_generations times
    and returns the best rule seen, with its basin -> label map.
    """
    pop = init_population(config, p.width)
    cache: dict[str, float] = {}
    history: list[float] = []
    best: Chromosome | None = None

    generations_run = 0
    for gen in range(config.max_generations + 1):
        evaluated: list[Chromosome] = []
        for c in pop:
            if c.fitness is None:
                key = c.genome.to_hex()
                f = cache.get(key)
                if f is None:
                    f = fitness(c, p, config)
                    cache[key] = f
                c = replace(c, fitness=f)
            evaluated.append(c)
        pop = evaluated

        gen_best = _sorted_by_fitness(pop)[0]
        history.append(gen_best.fitness)
        if best is None or gen_best.fitness > best.fitness:
            best = gen_best
        generations_run = gen
        if best.fitness == 1.0 or gen == config.max_generations:
            break
        pop = next_generation(pop, config, gen)

    labels = majority_labels(
        group_by_attractor(best.genome, p, config.step_budget), p
    )
    return EvolveResult(
        best=best,
        best_fitness=best.fitness,
        generations_run=generations_run,
        fitness_history=tuple(history),
        basin_label_map=labels,
    )


def history_tsv(result: EvolveResult) -> str:
    """Two-column TSV of per-generation best fitness, ready for plotting."""
    lines = ["generation\tbest_fitness"]
    lines.extend(f"{g}\t{f:.6f}" for g, f in enumerate(result.fitness_history))
    return "\n".join(lines) + "\n"
