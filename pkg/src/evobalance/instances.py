"""Instance file format, built-in benchmark fixtures and a random generator.

File format (UTF-8, one record per line, ``#`` starts a comment)::

    RESOURCES CPU Memory Network
    NODE Node1 60 60 50
    TASK J01 7 15 7 4        # id, one demand per resource, migration cost
    ASSIGN J01 Node1

Sections must appear in the order RESOURCES, NODE, TASK, ASSIGN and every
task needs exactly one ASSIGN line.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import Assignment, Instance, Node, Task, validate_instance

__all__ = [
    "ParseError",
    "GeneratorParams",
    "parse_instance",
    "serialize_instance",
    "load_instance",
    "builtin_fixture",
    "FIXTURE_NAMES",
    "generate_random_instance",
]

RESOURCES = ("CPU", "Memory", "Network")

# Node name -> (CPU, Memory, Network) available levels.
NODE_TABLE = (
    ("Node1", (60, 60, 50)),
    ("Node2", (70, 40, 50)),
    ("Node3", (70, 70, 70)),
    ("Node4", (80, 50, 90)),
    ("Node5", (60, 80, 50)),
    ("Node6", (60, 70, 50)),
    ("Node7", (80, 70, 80)),
    ("Node8", (80, 90, 60)),
)

# Task name -> ((CPU, Memory, Network) demand, migration cost).
TASK_TABLE = (
    ("J01", (7, 15, 7), 4),
    ("J02", (20, 3, 16), 5),
    ("J03", (1, 1, 1), 4),
    ("J04", (18, 13, 9), 7),
    ("J05", (14, 10, 1), 10),
    ("J06", (3, 12, 13), 3),
    ("J07", (11, 18, 12), 6),
    ("J08", (1, 4, 8), 6),
    ("J09", (4, 3, 17), 4),
    ("J10", (8, 19, 19), 4),
    ("J11", (5, 9, 18), 8),
    ("J12", (16, 14, 3), 6),
    ("J13", (6, 5, 17), 4),
    ("J14", (18, 11, 13), 5),
    ("J15", (10, 9, 12), 1),
    ("J16", (12, 17, 14), 9),
    ("J17", (3, 6, 8), 5),
    ("J18", (8, 12, 3), 5),
    ("J19", (15, 12, 8), 7),
    ("J20", (4, 8, 6), 1),
    ("J21", (12, 10, 5), 7),
    ("J22", (3, 19, 16), 2),
    ("J23", (6, 19, 1), 5),
    ("J24", (19, 11, 2), 3),
    ("J25", (14, 8, 15), 4),
    ("J26", (4, 15, 7), 10),
    ("J27", (20, 19, 5), 2),
    ("J28", (16, 2, 3), 8),
    ("J29", (16, 10, 3), 6),
    ("J30", (1, 1, 3), 5),
    ("J31", (19, 18, 1), 4),
    ("J32", (6, 14, 3), 10),
    ("J33", (3, 10, 3), 2),
    ("J34", (2, 8, 1), 4),
    ("J35", (8, 9, 9), 9),
    ("J36", (8, 15, 13), 4),
    ("J37", (19, 8, 5), 2),
    ("J38", (16, 20, 1), 2),
    ("J39", (15, 20, 4), 8),
    ("J40", (6, 13, 10), 10),
)

# Initial placements of the three benchmark scenarios, node by node.
CONFIGURATIONS = {
    "test1": (
        ("J01", "J04", "J14", "J16"),
        ("J08", "J11", "J12", "J15", "J18"),
        ("J02", "J03", "J06", "J07", "J13", "J19", "J20"),
        ("J05", "J09", "J10", "J17"),
    ),
    "test2": (
        ("J01", "J03", "J04", "J06", "J16", "J20", "J26"),
        ("J08", "J09", "J17", "J18", "J25", "J28", "J30"),
        ("J07", "J14", "J19", "J22", "J29"),
        ("J10", "J11", "J23", "J24", "J27"),
        ("J02", "J13"),
        ("J05", "J12", "J15", "J21"),
    ),
    # The published table lists J36 on both Node5 and Node6 and never
    # places J38.  Node6's second J36 is read as J38 so that each of the
    # forty tasks appears exactly once.
    "test3": (
        ("J01", "J04", "J16"),
        ("J11", "J18", "J27", "J28"),
        ("J02", "J06", "J07", "J19"),
        ("J05", "J09", "J10", "J17", "J24", "J39"),
        ("J14", "J31", "J34", "J35", "J36"),
        ("J08", "J12", "J15", "J21", "J25", "J30", "J33", "J38"),
        ("J03", "J13", "J20", "J22", "J26", "J29", "J37", "J40"),
        ("J23", "J32"),
    ),
}

# Wall-clock limits the benchmark used per scenario, in milliseconds.
FIXTURE_TIME_LIMITS_MS = {"test1": 30_000, "test2": 600_000, "test3": 3_600_000}

FIXTURE_NAMES = ("test1", "test2", "test3", "nodes_fig2", "tasks_fig3")


class ParseError(ValueError):
    """Raised for malformed instance text; ``line`` is 1-based or None."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


def _scenario(name: str) -> Instance:
    layout = CONFIGURATIONS[name]
    nodes = tuple(Node(nid, cap) for nid, cap in NODE_TABLE[: len(layout)])
    placed = {tid: n for n, tids in enumerate(layout) for tid in tids}
    tasks = tuple(Task(tid, dem, cost) for tid, dem, cost in TASK_TABLE if tid in placed)
    return Instance(RESOURCES, nodes, tasks, Assignment(placed[t.id] for t in tasks), name=name)


def builtin_fixture(name: str):
    """Return a benchmark scenario (``test1``..``test3``) or a raw table.

    ``nodes_fig2`` gives all eight nodes and ``tasks_fig3`` all forty tasks.
    """
    if name in CONFIGURATIONS:
        return _scenario(name)
    if name == "nodes_fig2":
        return tuple(Node(nid, cap) for nid, cap in NODE_TABLE)
    if name == "tasks_fig3":
        return tuple(Task(tid, dem, cost) for tid, dem, cost in TASK_TABLE)
    raise KeyError(f"unknown fixture {name!r}; expected one of {', '.join(FIXTURE_NAMES)}")


_SECTION_ORDER = {"RESOURCES": 0, "NODE": 1, "TASK": 2, "ASSIGN": 3}


def _int_field(token: str, what: str, lineno: int) -> int:
    try:
        value = int(token)
    except ValueError:
        raise ParseError(f"{what} must be an integer, got {token!r}", lineno) from None
    if value < 0:
        raise ParseError(f"{what} must be non-negative, got {value}", lineno)
    return value


def parse_instance(text: str, name: str = "") -> Instance:
    resources: list[str] | None = None
    nodes: list[Node] = []
    tasks: list[Task] = []
    node_ids: dict[str, int] = {}
    task_ids: dict[str, int] = {}
    placed: dict[str, int] = {}
    stage = -1

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        keyword, *fields = line.split()
        if keyword not in _SECTION_ORDER:
            raise ParseError(f"unknown record type {keyword!r}", lineno)
        order = _SECTION_ORDER[keyword]
        if order < stage or (order == 0 and stage == 0):
            raise ParseError(f"{keyword} record out of order", lineno)
        if order > stage + 1:
            missing = next(k for k, v in _SECTION_ORDER.items() if v == stage + 1)
            raise ParseError(f"{keyword} before any {missing} record", lineno)
        stage = order

        if keyword == "RESOURCES":
            if not fields:
                raise ParseError("RESOURCES needs at least one resource name", lineno)
            if len(set(fields)) != len(fields):
                raise ParseError("duplicate resource name", lineno)
            resources = fields
        elif keyword == "NODE":
            d = len(resources)
            if len(fields) != d + 1:
                raise ParseError(
                    f"dimension mismatch: NODE needs an id and {d} capacities, got {len(fields)} fields",
                    lineno)
            nid = fields[0]
            if nid in node_ids:
                raise ParseError(f"duplicate node id {nid!r}", lineno)
            cap = [_int_field(tok, "capacity", lineno) for tok in fields[1:]]
            node_ids[nid] = len(nodes)
            nodes.append(Node(nid, cap))
        elif keyword == "TASK":
            d = len(resources)
            if len(fields) != d + 2:
                raise ParseError(
                    f"dimension mismatch: TASK needs an id, {d} demands and a cost, got {len(fields)} fields",
                    lineno)
            tid = fields[0]
            if tid in task_ids:
                raise ParseError(f"duplicate task id {tid!r}", lineno)
            demand = [_int_field(tok, "demand", lineno) for tok in fields[1:-1]]
            cost = _int_field(fields[-1], "migration cost", lineno)
            task_ids[tid] = len(tasks)
            tasks.append(Task(tid, demand, cost))
        else:
            if len(fields) != 2:
                raise ParseError("ASSIGN needs a task id and a node id", lineno)
            tid, nid = fields
            if tid not in task_ids:
                raise ParseError(f"ASSIGN references undeclared task {tid!r}", lineno)
            if nid not in node_ids:
                raise ParseError(f"ASSIGN references undeclared node {nid!r}", lineno)
            if tid in placed:
                raise ParseError(f"duplicate ASSIGN for task {tid!r}", lineno)
            placed[tid] = node_ids[nid]

    if resources is None:
        raise ParseError("missing RESOURCES record")
    if not nodes:
        raise ParseError("missing NODE records")
    if not tasks:
        raise ParseError("missing TASK records")
    unplaced = [t.id for t in tasks if t.id not in placed]
    if unplaced:
        raise ParseError(f"tasks without ASSIGN: {', '.join(unplaced)}")

    instance = Instance(resources, nodes, tasks, Assignment(placed[t.id] for t in tasks), name=name)
    report = validate_instance(instance)
    if not report.ok:
        raise ParseError("; ".join(report.violations))
    return instance


def serialize_instance(instance: Instance) -> str:
    lines = ["RESOURCES " + " ".join(instance.resources)]
    lines += [" ".join(["NODE", n.id, *map(str, n.capacity)]) for n in instance.nodes]
    lines += [" ".join(["TASK", t.id, *map(str, t.demand), str(t.migration_cost)]) for t in instance.tasks]
    lines += [f"ASSIGN {t.id} {instance.nodes[n].id}" for t, n in zip(instance.tasks, instance.initial_assignment)]
    return "\n".join(lines) + "\n"


def load_instance(source: str) -> Instance:
    """Resolve a fixture name or read an instance file from disk."""
    if source in CONFIGURATIONS:
        return builtin_fixture(source)
    with open(source, encoding="utf-8") as fh:
        return parse_instance(fh.read(), name=source)


@dataclass(frozen=True)
class GeneratorParams:
    task_count: int
    node_count: int
    resource_count: int
    demand_range: tuple[int, int] = (1, 20)
    capacity_range: tuple[int, int] = (40, 90)
    cost_range: tuple[int, int] = (1, 10)
    seed: int = 0

    def __post_init__(self):
        if min(self.task_count, self.node_count, self.resource_count) < 1:
            raise ValueError("counts must be >= 1")
        for label, (lo, hi) in (("demand", self.demand_range), ("capacity", self.capacity_range),
                                ("cost", self.cost_range)):
            if lo < 0 or lo > hi:
                raise ValueError(f"{label} range must satisfy 0 <= min <= max, got {(lo, hi)}")


def generate_random_instance(params: GeneratorParams) -> Instance:
    rng = np.random.default_rng(params.seed)
    l, m, d = params.task_count, params.node_count, params.resource_count
    demand = rng.integers(params.demand_range[0], params.demand_range[1], size=(l, d), endpoint=True)
    capacity = rng.integers(params.capacity_range[0], params.capacity_range[1], size=(m, d), endpoint=True)
    cost = rng.integers(params.cost_range[0], params.cost_range[1], size=l, endpoint=True)
    mu0 = rng.integers(0, m, size=l)
    width = len(str(l))
    return Instance(
        resources=tuple(f"R{i + 1}" for i in range(d)),
        nodes=tuple(Node(f"Node{n + 1}", capacity[n].tolist()) for n in range(m)),
        tasks=tuple(Task(f"J{j + 1:0{width}d}", demand[j].tolist(), int(cost[j])) for j in range(l)),
        initial_assignment=Assignment(mu0.tolist()),
        name=f"random-l{l}-m{m}-d{d}-s{params.seed}",
    )
