"""Core types for the d-resource system optimization problem.

A system is a set of capacity-constrained nodes and a set of tasks, each
task placed on exactly one node.  The system is *stable* when no node uses
more of any resource than it has.  Moving a task away from its initial node
costs that task's migration cost; the goal is a stable assignment with the
smallest total migration cost.

All functions here are pure.  Values are frozen dataclasses holding tuples,
so they may be shared freely between threads and processes.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator, Sequence

__all__ = [
    "ResourceVector",
    "Task",
    "Node",
    "Instance",
    "Assignment",
    "SolveResult",
    "ValidationReport",
    "resource_usage",
    "overloaded_resources",
    "is_stable",
    "reassign_cost",
    "transformation_cost",
    "max_migration_cost",
    "fitness",
    "validate_instance",
]


@dataclass(frozen=True)
class ResourceVector:
    """Integer resource levels, one per resource kind."""

    levels: tuple[int, ...]

    def __init__(self, levels: Sequence[int]):
        object.__setattr__(self, "levels", tuple(int(v) for v in levels))

    def __len__(self) -> int:
        return len(self.levels)

    def __iter__(self) -> Iterator[int]:
        return iter(self.levels)

    def __getitem__(self, i: int) -> int:
        return self.levels[i]

    def fits_within(self, other: "ResourceVector") -> bool:
        return len(self) == len(other) and all(a <= b for a, b in zip(self, other))

    @classmethod
    def zeros(cls, d: int) -> "ResourceVector":
        return cls((0,) * d)


@dataclass(frozen=True)
class Task:
    id: str
    demand: ResourceVector
    migration_cost: int

    def __post_init__(self):
        if not isinstance(self.demand, ResourceVector):
            object.__setattr__(self, "demand", ResourceVector(self.demand))


@dataclass(frozen=True)
class Node:
    id: str
    capacity: ResourceVector

    def __post_init__(self):
        if not isinstance(self.capacity, ResourceVector):
            object.__setattr__(self, "capacity", ResourceVector(self.capacity))


@dataclass(frozen=True)
class Assignment:
    """A genotype: ``node_of[j]`` is the index of the node hosting task ``j``."""

    node_of: tuple[int, ...]

    def __init__(self, node_of: Sequence[int]):
        object.__setattr__(self, "node_of", tuple(int(v) for v in node_of))

    def __len__(self) -> int:
        return len(self.node_of)

    def __iter__(self) -> Iterator[int]:
        return iter(self.node_of)

    def __getitem__(self, j: int) -> int:
        return self.node_of[j]

    def moved(self, task_index: int, node_index: int) -> "Assignment":
        genes = list(self.node_of)
        genes[task_index] = node_index
        return Assignment(genes)


@dataclass(frozen=True)
class Instance:
    resources: tuple[str, ...]
    nodes: tuple[Node, ...]
    tasks: tuple[Task, ...]
    initial_assignment: Assignment
    name: str = field(default="", compare=False)

    def __post_init__(self):
        object.__setattr__(self, "resources", tuple(self.resources))
        object.__setattr__(self, "nodes", tuple(self.nodes))
        object.__setattr__(self, "tasks", tuple(self.tasks))
        if not isinstance(self.initial_assignment, Assignment):
            object.__setattr__(self, "initial_assignment", Assignment(self.initial_assignment))

    @property
    def d(self) -> int:
        return len(self.resources)

    @property
    def m(self) -> int:
        return len(self.nodes)

    @property
    def l(self) -> int:  # noqa: E743
        return len(self.tasks)

    def node_index(self, node_id: str) -> int:
        for i, node in enumerate(self.nodes):
            if node.id == node_id:
                return i
        raise KeyError(node_id)

    def task_index(self, task_id: str) -> int:
        for j, task in enumerate(self.tasks):
            if task.id == task_id:
                return j
        raise KeyError(task_id)

    def assignment_from_ids(self, placement: dict[str, str]) -> Assignment:
        """Build an assignment from ``{task_id: node_id}``; unlisted tasks stay on their initial node."""
        genes = list(self.initial_assignment)
        for task_id, node_id in placement.items():
            genes[self.task_index(task_id)] = self.node_index(node_id)
        return Assignment(genes)


@dataclass(frozen=True)
class SolveResult:
    best: Assignment
    cost: int
    stable: bool
    cycles_or_nodes: int
    elapsed_ms: float
    complete: bool = True
    trace: tuple[tuple[int, int, int | None], ...] = field(default=(), compare=False, repr=False)


def _check_node(instance: Instance, node_index: int) -> None:
    if not 0 <= node_index < instance.m:
        raise IndexError(f"node index {node_index} out of range [0, {instance.m})")


def _check_task(instance: Instance, task_index: int) -> None:
    if not 0 <= task_index < instance.l:
        raise IndexError(f"task index {task_index} out of range [0, {instance.l})")


def resource_usage(instance: Instance, assignment: Assignment, node_index: int) -> ResourceVector:
    """Sum the demand vectors of every task placed on ``node_index``."""
    _check_node(instance, node_index)
    totals = [0] * instance.d
    for task, n in zip(instance.tasks, assignment):
        if n == node_index:
            for i, level in enumerate(task.demand):
                totals[i] += level
    return ResourceVector(totals)


def overloaded_resources(instance: Instance, assignment: Assignment) -> list[tuple[int, int]]:
    """All ``(node_index, resource_index)`` pairs where usage exceeds capacity."""
    out = []
    for n, node in enumerate(instance.nodes):
        usage = resource_usage(instance, assignment, n)
        for i, (used, cap) in enumerate(zip(usage, node.capacity)):
            if used > cap:
                out.append((n, i))
    return out


def is_stable(instance: Instance, assignment: Assignment) -> bool:
    return not overloaded_resources(instance, assignment)


def reassign_cost(instance: Instance, assignment: Assignment, task_index: int) -> int:
    _check_task(instance, task_index)
    if assignment[task_index] == instance.initial_assignment[task_index]:
        return 0
    return instance.tasks[task_index].migration_cost


def transformation_cost(instance: Instance, assignment: Assignment) -> int:
    return sum(reassign_cost(instance, assignment, j) for j in range(instance.l))


def max_migration_cost(instance: Instance) -> int:
    """Cost of migrating every task, i.e. the sum of all migration costs."""
    return sum(task.migration_cost for task in instance.tasks)


def fitness(instance: Instance, genotype: Assignment) -> int:
    """Genetic fitness: the migration cost *saved* relative to moving everything."""
    return max_migration_cost(instance) - transformation_cost(instance, genotype)


@dataclass
class ValidationReport:
    violations: list[str] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def __len__(self) -> int:
        return len(self.violations)


def validate_instance(instance: Instance) -> ValidationReport:
    """Check every structural invariant of ``instance``.

    Violations make the instance unusable.  Warnings flag legal but
    hopeless inputs, such as a task too large for every node.
    """
    report = ValidationReport()
    d, m, l = instance.d, instance.m, instance.l
    if d < 1:
        report.violations.append("no resource kinds declared")
    if m < 1:
        report.violations.append("no nodes declared")
    if l < 1:
        report.violations.append("no tasks declared")

    for node in instance.nodes:
        if len(node.capacity) != d:
            report.violations.append(f"capacity dimension mismatch on node {node.id}")
        if any(v < 0 for v in node.capacity):
            report.violations.append(f"negative capacity on node {node.id}")
    for task in instance.tasks:
        if len(task.demand) != d:
            report.violations.append(f"demand dimension mismatch on task {task.id}")
        if any(v < 0 for v in task.demand):
            report.violations.append(f"negative demand on task {task.id}")
        if task.migration_cost < 0:
            report.violations.append(f"negative migration cost on task {task.id}")

    if len(instance.initial_assignment) != l:
        report.violations.append(
            f"assignment length mismatch: {len(instance.initial_assignment)} entries for {l} tasks")
    for j, n in enumerate(instance.initial_assignment):
        if not 0 <= n < m:
            label = instance.tasks[j].id if j < l else str(j)
            report.violations.append(f"assignment entry out of range for task {label}: {n}")

    if report.ok:
        for task in instance.tasks:
            if not any(task.demand.fits_within(node.capacity) for node in instance.nodes):
                report.warnings.append(f"task {task.id} fits on no node; no stable assignment exists")
    return report
