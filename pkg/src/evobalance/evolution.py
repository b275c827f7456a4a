"""Genetic strategies: the reinforced EVOLVE schema and a classic GENETIC baseline.

A genotype assigns one node index to every task.  Fitness is the migration
cost saved compared with moving every task, so the fittest genotype is the
cheapest transformation.

EVOLVE keeps a single, freely recombining pool.  One cycle is

1. tournament-select parents and append one one-point-crossover child per pair,
2. append single-gene mutant clones of randomly chosen individuals,
3. drop unstable individuals (each survives with a small probability),
4. drop the weakest fraction,
5. refill the pool to its living-space limit with random *stable* migrants.

The population is stored column-wise (genes, fitness, stable) so that the
inner loops can run on whole arrays.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, replace
from typing import Optional, Sequence

import numpy as np

from . import _kernels
from .model import Assignment, Instance, SolveResult
from .strategies import ProblemArrays, SearchBudget

__all__ = [
    "Individual",
    "Population",
    "EvolveConfig",
    "random_stable_genotype",
    "tournament_select",
    "tournament_indices",
    "crossover_one_point",
    "mutate",
    "cull_unstable",
    "cull_weakest",
    "migrate_fill",
    "evolve_solve",
    "genetic_solve",
]


@dataclass(frozen=True)
class Individual:
    genotype: Assignment
    fitness_value: int
    stable: bool


class Population:
    """Ordered collection of evaluated genotypes.

    Row order is insertion order; the culling operators preserve it.
    """

    def __init__(self, genes: np.ndarray, fitness: np.ndarray, stable: np.ndarray):
        self.genes = np.asarray(genes, dtype=np.int64)
        self.fitness = np.asarray(fitness, dtype=np.int64)
        self.stable = np.asarray(stable, dtype=np.bool_)

    @classmethod
    def empty(cls, l: int) -> "Population":
        return cls(np.empty((0, l), dtype=np.int64), np.empty(0, dtype=np.int64), np.empty(0, dtype=np.bool_))

    @classmethod
    def evaluate(cls, problem: ProblemArrays, genes: np.ndarray) -> "Population":
        genes = np.ascontiguousarray(genes, dtype=np.int64)
        costs, stable = _kernels.eval_batch(genes, problem.demand, problem.capacity, problem.cost, problem.mu0)
        return cls(genes, problem.total_cost - costs, stable)

    @classmethod
    def from_individuals(cls, individuals: Sequence[Individual], l: Optional[int] = None) -> "Population":
        if not individuals:
            return cls.empty(l or 0)
        return cls(
            np.array([ind.genotype.node_of for ind in individuals], dtype=np.int64),
            np.array([ind.fitness_value for ind in individuals], dtype=np.int64),
            np.array([ind.stable for ind in individuals], dtype=np.bool_),
        )

    def __len__(self) -> int:
        return self.genes.shape[0]

    def __getitem__(self, i: int) -> Individual:
        return Individual(Assignment(self.genes[i].tolist()), int(self.fitness[i]), bool(self.stable[i]))

    def __iter__(self):
        return (self[i] for i in range(len(self)))

    def take(self, index) -> "Population":
        return Population(self.genes[index], self.fitness[index], self.stable[index])

    def concat(self, other: "Population") -> "Population":
        return Population(
            np.concatenate([self.genes, other.genes]),
            np.concatenate([self.fitness, other.fitness]),
            np.concatenate([self.stable, other.stable]),
        )


@dataclass(frozen=True)
class EvolveConfig:
    """Tuning knobs shared by EVOLVE and GENETIC.

    ``population_limit=None`` resolves to ``2 * tasks * nodes``.
    """

    population_limit: Optional[int] = None
    tournament_size: int = 4
    crossover_fraction: float = 0.25
    mutation_fraction: float = 0.05
    unstable_survival_rate: float = 0.10
    weakest_cull_fraction: float = 0.20
    migration_draw_cap: int = 10_000
    seed: int = 0

    def __post_init__(self):
        if self.population_limit is not None and self.population_limit < 2:
            raise ValueError("population_limit must be >= 2")
        if self.tournament_size < 2:
            raise ValueError("tournament_size must be >= 2")
        for name in ("crossover_fraction", "mutation_fraction", "unstable_survival_rate", "weakest_cull_fraction"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1], got {value}")
        if self.migration_draw_cap < 0:
            raise ValueError("migration_draw_cap must be >= 0")

    def resolved(self, instance: Instance) -> "EvolveConfig":
        if self.population_limit is not None:
            return self
        return replace(self, population_limit=max(2, 2 * instance.l * instance.m))


def _problem(instance_or_problem) -> ProblemArrays:
    if isinstance(instance_or_problem, ProblemArrays):
        return instance_or_problem
    return ProblemArrays.from_instance(instance_or_problem)


def random_stable_genotype(instance: Instance, rng: np.random.Generator, draw_cap: int = 0) -> Optional[Assignment]:
    """Draw uniform genotypes until one is stable; ``None`` once ``draw_cap`` draws fail."""
    p = _problem(instance)
    out = np.empty(p.mu0.shape[0], dtype=np.int64)
    _, ok = _kernels.draw_stable(rng, p.demand, p.capacity, draw_cap, out, p.sampling_order)
    return Assignment(out.tolist()) if ok else None


def _bracket_winner(scores: Sequence[int]) -> int:
    """Position of the single-elimination winner; byes go to the earliest entrants, ties to the earlier."""
    alive = list(range(len(scores)))
    while len(alive) > 1:
        nxt = []
        byes = len(alive) % 2
        nxt.extend(alive[:byes])
        rest = alive[byes:]
        for a, b in zip(rest[0::2], rest[1::2]):
            nxt.append(a if scores[a] >= scores[b] else b)
        alive = nxt
    return alive[0]


def tournament_select(population: Population, k: int, rng: np.random.Generator) -> Individual:
    """Play one k-entrant bracket among individuals drawn with replacement."""
    if len(population) == 0:
        raise ValueError("cannot select from an empty population")
    if k < 2:
        raise ValueError("tournament size must be >= 2")
    drawn = rng.integers(0, len(population), size=k)
    winner = _bracket_winner(population.fitness[drawn].tolist())
    return population[int(drawn[winner])]


def tournament_indices(scores: np.ndarray, k: int, count: int, rng: np.random.Generator) -> np.ndarray:
    """Row indices of ``count`` independent tournament winners.

    A bracket always promotes the earliest-drawn maximum, so each winner is
    the first argmax of its draw row.
    """
    drawn = rng.integers(0, scores.shape[0], size=(count, k))
    return drawn[np.arange(count), np.argmax(scores[drawn], axis=1)]


def _crossover_rows(a: np.ndarray, b: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    n, l = a.shape
    if l < 2:
        return a.copy()
    cuts = rng.integers(1, l, size=n)
    return np.where(np.arange(l)[None, :] < cuts[:, None], a, b)


def crossover_one_point(parent_a: Assignment, parent_b: Assignment, rng: np.random.Generator) -> Assignment:
    """Single child: a prefix of ``parent_a`` followed by the matching suffix of ``parent_b``."""
    if len(parent_a) != len(parent_b):
        raise ValueError("parents differ in length")
    if len(parent_a) < 2:
        raise ValueError("one-point crossover needs at least two genes")
    child = _crossover_rows(np.array([parent_a.node_of]), np.array([parent_b.node_of]), rng)
    return Assignment(child[0].tolist())


def _mutate_rows(genes: np.ndarray, m: int, rng: np.random.Generator) -> np.ndarray:
    out = genes.copy()
    n, l = out.shape
    pos = np.asarray(rng.integers(0, l, size=n))
    val = np.asarray(rng.integers(0, m, size=n))
    out[np.arange(n), pos] = val
    return out


def mutate(genotype: Assignment, instance: Instance, rng: np.random.Generator) -> Assignment:
    """Clone ``genotype`` and redraw one random gene uniformly (possibly to its old value)."""
    out = _mutate_rows(np.array([genotype.node_of], dtype=np.int64), instance.m, rng)
    return Assignment(out[0].tolist())


def cull_unstable(population: Population, survival_rate: float, rng: np.random.Generator) -> Population:
    lucky = rng.random(len(population)) < survival_rate
    return population.take(population.stable | lucky)


def cull_weakest(population: Population, fraction: float) -> Population:
    """Remove the ``floor(fraction * size)`` least fit individuals, newest first among equals.

    The fittest individual always survives.
    """
    n = len(population)
    k = min(math.floor(fraction * n), max(n - 1, 0))
    if k <= 0:
        return population
    idx = np.arange(n)
    doomed = np.lexsort((-idx, population.fitness))[:k]
    keep = np.ones(n, dtype=np.bool_)
    keep[doomed] = False
    return population.take(keep)


def migrate_fill(population: Population, instance, limit: int, rng: np.random.Generator,
                 draw_cap: int = 10_000) -> Population:
    """Append random stable migrants until the population holds ``limit`` individuals.

    A migrant whose rejection sampling exhausts ``draw_cap`` is replaced by a
    repaired random genotype, which may still be unstable.
    """
    need = limit - len(population)
    if need <= 0:
        return population
    p = _problem(instance)
    l, m = p.demand.shape[0], p.capacity.shape[0]
    genes = np.empty((need, l), dtype=np.int64)
    _kernels.fill_migrants(rng, p.demand, p.capacity, draw_cap, genes, l * m, p.sampling_order)
    return population.concat(Population.evaluate(p, genes))


class _BestTracker:
    """Best stable genotype seen so far (highest fitness, earliest on ties)."""

    def __init__(self, total_cost: int):
        self.total_cost = total_cost
        self.fitness = -1
        self.genes: Optional[np.ndarray] = None

    def offer(self, pop: Population) -> None:
        if len(pop) == 0 or not pop.stable.any():
            return
        masked = np.where(pop.stable, pop.fitness, -1)
        i = int(np.argmax(masked))
        if masked[i] > self.fitness:
            self.fitness = int(masked[i])
            self.genes = pop.genes[i].copy()

    @property
    def cost(self) -> Optional[int]:
        return None if self.genes is None else self.total_cost - self.fitness


class _Clock:
    def __init__(self, budget: SearchBudget):
        if budget.unlimited:
            raise ValueError("genetic strategies need a cycle limit or a time limit")
        self.budget = budget
        self.start = time.perf_counter()

    def elapsed_ms(self) -> float:
        return (time.perf_counter() - self.start) * 1000.0

    def expired(self, cycles: int) -> bool:
        if self.budget.node_limit and cycles >= self.budget.node_limit:
            return True
        return bool(self.budget.time_limit_ms) and self.elapsed_ms() >= self.budget.time_limit_ms


def _finish(instance: Instance, best: _BestTracker, fallback: np.ndarray, cycles: int, clock: _Clock,
            trace: list) -> SolveResult:
    if best.genes is None:
        genes = fallback
        p = ProblemArrays.from_instance(instance)
        costs, _ = _kernels.eval_batch(genes[None, :], p.demand, p.capacity, p.cost, p.mu0)
        cost, stable = int(costs[0]), False
    else:
        genes, cost, stable = best.genes, best.cost, True
    return SolveResult(Assignment(genes.tolist()), cost, stable, cycles, clock.elapsed_ms(),
                       complete=True, trace=tuple(trace))


def evolve_solve(instance: Instance, config: EvolveConfig = EvolveConfig(),
                 budget: SearchBudget = SearchBudget(node_limit=1000), trace: bool = False) -> SolveResult:
    """Run the reinforced evolution schema and return the best stable genotype found.

    ``budget.node_limit`` counts cycles.  With ``trace`` set the result
    carries ``(cycle, population size, best cost)`` after every cycle.
    """
    config = config.resolved(instance)
    clock = _Clock(budget)
    rng = np.random.default_rng(config.seed)
    p = ProblemArrays.from_instance(instance)
    l, m = instance.l, instance.m
    limit = config.population_limit
    best = _BestTracker(p.total_cost)
    history: list[tuple[int, int, Optional[int]]] = []

    best.offer(Population.evaluate(p, p.mu0[None, :]))
    if best.cost == 0:
        return _finish(instance, best, p.mu0, 0, clock, history)

    pop = migrate_fill(Population.empty(l), p, limit, rng, config.migration_draw_cap)
    best.offer(pop)
    cycle = 0
    while not clock.expired(cycle):
        cycle += 1
        # 1. crossover: consecutive winners pair up, an odd one out meets a fresh winner
        n_parents = math.ceil(config.crossover_fraction * len(pop))
        if n_parents > 0:
            winners = tournament_indices(pop.fitness, config.tournament_size, n_parents + n_parents % 2, rng)
            children = _crossover_rows(pop.genes[winners[0::2]], pop.genes[winners[1::2]], rng)
            born = Population.evaluate(p, children)
            best.offer(born)
            pop = pop.concat(born)
        # 2. mutation of uniformly chosen individuals
        n_mutants = min(math.ceil(config.mutation_fraction * len(pop)), len(pop))
        if n_mutants > 0:
            chosen = rng.choice(len(pop), size=n_mutants, replace=False)
            mutants = Population.evaluate(p, _mutate_rows(pop.genes[chosen], m, rng))
            best.offer(mutants)
            pop = pop.concat(mutants)
        # 3-4. termination
        pop = cull_unstable(pop, config.unstable_survival_rate, rng)
        pop = cull_weakest(pop, config.weakest_cull_fraction)
        # 5. migration
        before = len(pop)
        pop = migrate_fill(pop, p, limit, rng, config.migration_draw_cap)
        best.offer(pop.take(slice(before, None)))
        if trace:
            history.append((cycle, len(pop), best.cost))
    return _finish(instance, best, p.mu0, cycle, clock, history)


def genetic_solve(instance: Instance, config: EvolveConfig = EvolveConfig(),
                  budget: SearchBudget = SearchBudget(node_limit=1000), trace: bool = False) -> SolveResult:
    """Classic generational GA used as the baseline.

    Generation zero is uniformly random plus the initial assignment.  Every
    generation is replaced wholesale by tournament-selected, one-point
    crossed, per-gene mutated (rate 1/l) children.  Unstable genotypes are
    kept but ranked strictly below every stable one.
    """
    config = config.resolved(instance)
    clock = _Clock(budget)
    rng = np.random.default_rng(config.seed)
    p = ProblemArrays.from_instance(instance)
    l, m = instance.l, instance.m
    size = config.population_limit
    penalty = p.total_cost + 1
    best = _BestTracker(p.total_cost)
    history: list[tuple[int, int, Optional[int]]] = []

    genes = rng.integers(0, m, size=(size, l))
    genes[0] = p.mu0
    pop = Population.evaluate(p, genes)
    best.offer(pop)
    if best.cost == 0:
        return _finish(instance, best, p.mu0, 0, clock, history)

    generation = 0
    while not clock.expired(generation):
        generation += 1
        scores = np.where(pop.stable, pop.fitness, pop.fitness - penalty)
        winners = tournament_indices(scores, config.tournament_size, 2 * size, rng)
        children = _crossover_rows(pop.genes[winners[0::2]], pop.genes[winners[1::2]], rng)
        flips = rng.random(children.shape) < 1.0 / l
        children = np.where(flips, rng.integers(0, m, size=children.shape), children)
        pop = Population.evaluate(p, children)
        best.offer(pop)
        if trace:
            history.append((generation, len(pop), best.cost))
    return _finish(instance, best, p.mu0, generation, clock, history)
