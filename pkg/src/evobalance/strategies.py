"""Deterministic strategies: exact FULLSCAN search, GREEDY and BALANCE."""

from __future__ import annotations

import functools
import math
import time
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import _kernels
from .model import Assignment, Instance, SolveResult, transformation_cost

__all__ = ["SearchBudget", "ProblemArrays", "fullscan_solve", "greedy_solve", "balance_solve"]

# Search-tree nodes explored between budget checks.
_CHUNK = 200_000


@dataclass(frozen=True)
class SearchBudget:
    """Stop conditions.  ``node_limit`` counts search-tree nodes or GA cycles; 0 means unlimited."""

    time_limit_ms: int = 0
    node_limit: int = 0

    def __post_init__(self):
        if self.time_limit_ms < 0 or self.node_limit < 0:
            raise ValueError("budget limits must be >= 0")

    @property
    def unlimited(self) -> bool:
        return self.time_limit_ms == 0 and self.node_limit == 0


@dataclass(frozen=True)
class ProblemArrays:
    """Instance data packed into int64 arrays for the compiled kernels."""

    demand: np.ndarray
    capacity: np.ndarray
    cost: np.ndarray
    mu0: np.ndarray

    @classmethod
    def from_instance(cls, instance: Instance) -> "ProblemArrays":
        return cls(
            demand=np.array([t.demand.levels for t in instance.tasks], dtype=np.int64).reshape(instance.l, instance.d),
            capacity=np.array([n.capacity.levels for n in instance.nodes], dtype=np.int64).reshape(instance.m, instance.d),
            cost=np.array([t.migration_cost for t in instance.tasks], dtype=np.int64),
            mu0=np.array(instance.initial_assignment.node_of, dtype=np.int64),
        )

    @property
    def total_cost(self) -> int:
        return int(self.cost.sum())

    @functools.cached_property
    def sampling_order(self) -> np.ndarray:
        return _kernels.heavy_first_order(self.demand, self.capacity)


def _elapsed_ms(start: float) -> float:
    return (time.perf_counter() - start) * 1000.0


def fullscan_solve(instance: Instance, budget: SearchBudget = SearchBudget(),
                   mode: str = "branch_and_bound") -> SolveResult:
    """Exact minimum-cost stable assignment by depth-first enumeration.

    ``mode="exhaustive"`` visits all m**l leaves.  ``mode="branch_and_bound"``
    (alias ``"bnb"``) returns the same optimum while cutting overloaded
    prefixes and prefixes that cannot beat the incumbent.  When the budget
    runs out the incumbent is returned with ``complete=False``.
    """
    if mode == "bnb":
        mode = "branch_and_bound"
    if mode not in ("exhaustive", "branch_and_bound"):
        raise ValueError(f"unknown fullscan mode {mode!r}")
    start = time.perf_counter()
    p = ProblemArrays.from_instance(instance)
    l, m, d = instance.l, instance.m, instance.d

    # expensive tasks first so the cost bound bites early
    order = np.array(sorted(range(l), key=lambda j: (-int(p.cost[j]), j)), dtype=np.int64)
    position = np.empty(l, dtype=np.int64)
    position[order] = np.arange(l)

    width = max(1, int(np.bincount(p.mu0, minlength=m).max()))
    native_by_ratio = np.zeros((m, d, width), dtype=np.int64)
    native_count = np.zeros((m, d), dtype=np.int64)
    for n in range(m):
        natives = [j for j in range(l) if p.mu0[j] == n]
        for i in range(d):
            ranked = sorted((j for j in natives if p.demand[j, i] > 0),
                            key=lambda j: (p.cost[j] / p.demand[j, i], j))
            native_count[n, i] = len(ranked)
            native_by_ratio[n, i, : len(ranked)] = ranked

    choice = np.full(l + 1, -1, dtype=np.int64)
    genes = p.mu0.copy()
    usage = np.zeros((m, d), dtype=np.int64)
    rem = np.zeros((m, d), dtype=np.int64)
    np.add.at(rem, p.mu0, p.demand)
    scalars = np.array([0, 0, -1, 0, 0], dtype=np.int64)
    best = p.mu0.copy()

    status = _kernels.BNB_PAUSED
    while status == _kernels.BNB_PAUSED:
        step = _CHUNK
        if budget.node_limit:
            step = min(step, budget.node_limit - int(scalars[3]))
            if step <= 0:
                break
        if budget.time_limit_ms and _elapsed_ms(start) >= budget.time_limit_ms:
            break
        status = _kernels.fullscan(order, p.demand, p.capacity, p.cost, p.mu0, mode == "branch_and_bound",
                                   choice, genes, usage, rem, scalars, best, step,
                                   native_by_ratio, native_count, position)

    incumbent = int(scalars[2])
    stable = incumbent >= 0
    assignment = Assignment(best.tolist()) if stable else instance.initial_assignment
    return SolveResult(
        best=assignment,
        cost=incumbent if stable else transformation_cost(instance, assignment),
        stable=stable,
        cycles_or_nodes=int(scalars[3]),
        elapsed_ms=_elapsed_ms(start),
        complete=status == _kernels.BNB_DONE,
    )


class _LocalState:
    """Mutable per-node usage bookkeeping for the move-based heuristics."""

    def __init__(self, instance: Instance):
        self.instance = instance
        self.genes = list(instance.initial_assignment)
        self.cap = [list(n.capacity) for n in instance.nodes]
        self.dem = [list(t.demand) for t in instance.tasks]
        self.usage = [[0] * instance.d for _ in instance.nodes]
        for j, n in enumerate(self.genes):
            for i, r in enumerate(self.dem[j]):
                self.usage[n][i] += r

    def excess(self, n: int) -> list[int]:
        return [max(0, u - c) for u, c in zip(self.usage[n], self.cap[n])]

    def relative_overload(self, n: int) -> float:
        worst = 0.0
        for u, c in zip(self.usage[n], self.cap[n]):
            if c == 0:
                ratio = math.inf if u > 0 else 0.0
            else:
                ratio = u / c
            worst = max(worst, ratio)
        return worst

    def overloaded(self) -> list[int]:
        return [n for n in range(len(self.cap)) if any(u > c for u, c in zip(self.usage[n], self.cap[n]))]

    def fits(self, j: int, n: int) -> bool:
        return all(u + r <= c for u, r, c in zip(self.usage[n], self.dem[j], self.cap[n]))

    def move(self, j: int, n: int) -> None:
        src = self.genes[j]
        for i, r in enumerate(self.dem[j]):
            self.usage[src][i] -= r
            self.usage[n][i] += r
        self.genes[j] = n

    def result(self, start: float, moves: int) -> SolveResult:
        assignment = Assignment(self.genes)
        return SolveResult(
            best=assignment,
            cost=transformation_cost(self.instance, assignment),
            stable=not self.overloaded(),
            cycles_or_nodes=moves,
            elapsed_ms=_elapsed_ms(start),
        )


TaskScore = Callable[[_LocalState, int, int], float]
TargetScore = Callable[[_LocalState, int, int], float]


def _relieves(state: _LocalState, j: int, src: int) -> bool:
    return any(e > 0 and r > 0 for e, r in zip(state.excess(src), state.dem[j]))


def _move_loop(instance: Instance, task_key: TaskScore, target_score: TargetScore) -> SolveResult:
    start = time.perf_counter()
    state = _LocalState(instance)
    moves = 0
    while True:
        overloaded = state.overloaded()
        if not overloaded:
            break
        # most overloaded first; ties by lower node index
        overloaded.sort(key=lambda n: (-state.relative_overload(n), n))
        chosen = None
        for src in overloaded:
            candidates = []
            for j in range(instance.l):
                if state.genes[j] != src or not _relieves(state, j, src):
                    continue
                targets = [n for n in range(instance.m) if n != src and state.fits(j, n)]
                if targets:
                    candidates.append((task_key(state, j, src), j, targets))
            if candidates:
                _, j, targets = min(candidates, key=lambda c: (c[0], c[1]))
                target = max(targets, key=lambda n: (target_score(state, j, n), -n))
                chosen = (j, target)
                break
        if chosen is None:
            break
        state.move(*chosen)
        moves += 1
    return state.result(start, moves)


def _min_relative_residual(state: _LocalState, j: int, n: int) -> float:
    scores = [(c - u - r) / c for u, r, c in zip(state.usage[n], state.dem[j], state.cap[n]) if c > 0]
    return min(scores) if scores else 0.0


def greedy_solve(instance: Instance) -> SolveResult:
    """Repeatedly relieve the most overloaded node with its cheapest movable task.

    The moved task goes to the node that keeps the most relative headroom
    after receiving it.  Stops when stable or when no overloaded node has a
    task that fits anywhere else.
    """
    return _move_loop(
        instance,
        task_key=lambda s, j, src: _cheapest_key(s, j),
        target_score=_min_relative_residual,
    )


def _cheapest_key(state: _LocalState, j: int) -> float:
    # price of taking j off its current node; already-migrated tasks move for free
    home = state.instance.initial_assignment[j]
    return 0 if state.genes[j] != home else state.instance.tasks[j].migration_cost


def _tradeoff_score(state: _LocalState, j: int, n: int) -> float:
    """AdWords-style remaining-budget score: min over resources of 1 - e^(used_fraction - 1)."""
    scores = []
    for u, r, c in zip(state.usage[n], state.dem[j], state.cap[n]):
        used = u + r
        frac = (used / c) if c > 0 else (0.0 if used == 0 else math.inf)
        scores.append(1.0 - math.exp(frac - 1.0))
    return min(scores)


def _cost_per_relief(state: _LocalState, j: int, src: int) -> float:
    relief = 0.0
    for e, r, c in zip(state.excess(src), state.dem[j], state.cap[src]):
        if e > 0 and r > 0:
            relief += min(r, e) / c if c > 0 else math.inf
    price = _cheapest_key(state, j)
    if math.isinf(relief):
        return 0.0
    return price / relief


def balance_solve(instance: Instance) -> SolveResult:
    """Like :func:`greedy_solve` but scored on remaining capacity.

    Tasks are picked by migration cost per unit of relative overload they
    relieve; targets by the tradeoff score ``1 - exp(fraction_used - 1)``.
    """
    return _move_loop(instance, task_key=_cost_per_relief, target_score=_tradeoff_score)
