"""Solvers and a benchmark harness for multi-resource task reassignment.

Tasks with d-dimensional resource demands sit on capacity-limited nodes.
The solvers look for a stable placement (no node over capacity on any
resource) that migrates as little total cost as possible.
"""

from .evolution import EvolveConfig, evolve_solve, genetic_solve
from .harness import ExperimentSpec, StatsReport, render_report, run_experiment, summarize
from .instances import builtin_fixture, generate_random_instance, parse_instance, serialize_instance
from .model import (
    Assignment,
    Instance,
    Node,
    ResourceVector,
    SolveResult,
    Task,
    fitness,
    is_stable,
    max_migration_cost,
    transformation_cost,
    validate_instance,
)
from .strategies import SearchBudget, balance_solve, fullscan_solve, greedy_solve

__version__ = "0.1.0"
