"""Benchmark driver: repeated runs, summary statistics and report rendering."""

from __future__ import annotations

import csv
import io
import logging
import statistics
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from decimal import Decimal
from typing import Optional, Sequence

from .evolution import EvolveConfig, evolve_solve, genetic_solve
from .instances import FIXTURE_TIME_LIMITS_MS, load_instance
from .model import Instance, SolveResult, is_stable, max_migration_cost, transformation_cost, validate_instance
from .strategies import SearchBudget, balance_solve, fullscan_solve, greedy_solve

__all__ = [
    "STRATEGIES",
    "ExperimentSpec",
    "Stats",
    "StatsReport",
    "VerificationError",
    "search_space_size",
    "summarize",
    "run_experiment",
    "render_report",
    "parse_csv_report",
]

log = logging.getLogger(__name__)

STRATEGIES = ("fullscan", "greedy", "balance", "genetic", "evolve")
DETERMINISTIC = frozenset({"fullscan", "greedy", "balance"})
CSV_FIELDS = ("instance", "tasks", "nodes", "resources", "search_space_size", "max_migration_cost",
              "strategy", "runs", "stable_runs", "med", "avg", "min", "max", "stdev", "costs")


class VerificationError(RuntimeError):
    """A solver reported a cost or stability flag that does not re-check."""


@dataclass(frozen=True)
class ExperimentSpec:
    instance: str
    strategy: str
    runs: int = 1
    budget: SearchBudget = SearchBudget()
    base_seed: int = 0
    overrides: dict = field(default_factory=dict)
    fullscan_mode: str = "branch_and_bound"

    def __post_init__(self):
        if self.strategy not in STRATEGIES:
            raise ValueError(f"unknown strategy {self.strategy!r}; expected one of {', '.join(STRATEGIES)}")
        if self.runs < 1:
            raise ValueError("runs must be >= 1")


@dataclass(frozen=True)
class Stats:
    med: float
    avg: float
    min: int
    max: int
    stdev: float
    count: int


@dataclass
class StatsReport:
    instance: str
    tasks: int
    nodes: int
    resources: int
    strategy: str
    costs: list[int]
    stable: list[bool]
    stats: Optional[Stats]
    max_migration_cost: int
    search_space_size: str
    elapsed_ms: list[float] = field(default_factory=list)
    traces: list[tuple] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)

    @property
    def count(self) -> int:
        return len(self.costs)

    @property
    def stable_runs(self) -> int:
        return sum(self.stable)


def search_space_size(instance: Instance) -> str:
    """``m ** l`` in three-significant-digit scientific notation, e.g. ``1.10E+12``."""
    return f"{Decimal(instance.m ** instance.l):.2E}"


def summarize(costs: Sequence[int]) -> Stats:
    """Median, mean, extremes and sample standard deviation of ``costs``."""
    if not costs:
        raise ValueError("cannot summarize an empty sequence")
    ordered = sorted(costs)
    return Stats(
        med=float(statistics.median(ordered)),
        avg=statistics.fmean(ordered),
        min=ordered[0],
        max=ordered[-1],
        stdev=statistics.stdev(ordered) if len(ordered) > 1 else 0.0,
        count=len(ordered),
    )


def _default_budget(spec: ExperimentSpec) -> SearchBudget:
    if not spec.budget.unlimited or spec.strategy not in ("genetic", "evolve"):
        return spec.budget
    return SearchBudget(time_limit_ms=FIXTURE_TIME_LIMITS_MS.get(spec.instance, 30_000))


def _solve_once(spec: ExperimentSpec, instance: Instance, seed: int, trace: bool) -> SolveResult:
    budget = _default_budget(spec)
    if spec.strategy == "fullscan":
        return fullscan_solve(instance, budget, spec.fullscan_mode)
    if spec.strategy == "greedy":
        return greedy_solve(instance)
    if spec.strategy == "balance":
        return balance_solve(instance)
    config = EvolveConfig(**{**spec.overrides, "seed": seed})
    solver = evolve_solve if spec.strategy == "evolve" else genetic_solve
    return solver(instance, config, budget, trace=trace)


def _verify(instance: Instance, result: SolveResult) -> None:
    stable = is_stable(instance, result.best)
    if result.stable and not stable:
        raise VerificationError("solver claimed a stable assignment that overloads a node")
    if result.stable and transformation_cost(instance, result.best) != result.cost:
        raise VerificationError(
            f"reported cost {result.cost} != recomputed {transformation_cost(instance, result.best)}")


def _run_task(args):
    spec, instance, seed, trace = args
    result = _solve_once(spec, instance, seed, trace)
    _verify(instance, result)
    return result


def run_experiment(spec: ExperimentSpec, workers: int = 1, trace: bool = False,
                   instance: Optional[Instance] = None) -> StatsReport:
    """Run ``spec.runs`` independent solves and aggregate them.

    Run ``i`` uses seed ``base_seed + i``.  Deterministic strategies are
    solved once and the result is repeated.  Every result is re-verified
    before it is counted; unstable runs are excluded from the statistics.
    """
    if instance is None:
        instance = load_instance(spec.instance)
    report = validate_instance(instance)
    if not report.ok:
        raise ValueError("invalid instance: " + "; ".join(report.violations))

    distinct = 1 if spec.strategy in DETERMINISTIC else spec.runs
    jobs = [(spec, instance, spec.base_seed + i, trace) for i in range(distinct)]
    if workers > 1 and distinct > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_run_task, jobs))
    else:
        results = [_run_task(job) for job in jobs]
    if distinct < spec.runs:
        results = results * spec.runs

    stable = [r.stable for r in results]
    good = [r.cost for r in results if r.stable]
    warnings = list(report.warnings)
    if not good:
        warnings.append("no run produced a stable assignment")
    elif len(good) < len(results):
        warnings.append(f"{len(results) - len(good)} run(s) ended unstable and were excluded")
    for w in warnings:
        log.warning("%s/%s: %s", spec.instance, spec.strategy, w)
    incomplete = sum(1 for r in results if not r.complete)
    if incomplete:
        warnings.append(f"{incomplete} run(s) hit the budget before proving optimality")

    return StatsReport(
        instance=spec.instance,
        tasks=instance.l,
        nodes=instance.m,
        resources=instance.d,
        strategy=spec.strategy,
        costs=[r.cost for r in results],
        stable=stable,
        stats=summarize(good) if good else None,
        max_migration_cost=max_migration_cost(instance),
        search_space_size=search_space_size(instance),
        elapsed_ms=[r.elapsed_ms for r in results],
        traces=[r.trace for r in results],
        warnings=warnings,
    )


def _num(x) -> str:
    if isinstance(x, float) and x.is_integer():
        return str(int(x))
    return repr(x) if isinstance(x, float) else str(x)


def _row(report: StatsReport) -> dict:
    s = report.stats
    return {
        "instance": report.instance,
        "tasks": report.tasks,
        "nodes": report.nodes,
        "resources": report.resources,
        "search_space_size": report.search_space_size,
        "max_migration_cost": report.max_migration_cost,
        "strategy": report.strategy,
        "runs": report.count,
        "stable_runs": report.stable_runs,
        "med": _num(s.med) if s else "",
        "avg": _num(s.avg) if s else "",
        "min": s.min if s else "",
        "max": s.max if s else "",
        "stdev": _num(s.stdev) if s else "",
        "costs": ";".join(str(c) if ok else f"{c}!" for c, ok in zip(report.costs, report.stable)),
    }


def render_report(reports, fmt: str = "table") -> str:
    """Render one report (or several, one row each) as ``table`` or ``csv`` text.

    In the ``costs`` column a trailing ``!`` marks an unstable run.
    """
    if isinstance(reports, StatsReport):
        reports = [reports]
    rows = [_row(r) for r in reports]
    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.DictWriter(buf, fieldnames=CSV_FIELDS, lineterminator="\n")
        writer.writeheader()
        writer.writerows(rows)
        return buf.getvalue()
    if fmt != "table":
        raise ValueError(f"unknown report format {fmt!r}")

    columns = [c for c in CSV_FIELDS if c != "costs"]
    cells = [[str(row[c]) for c in columns] for row in rows]
    widths = [max(len(c), *(len(r[k]) for r in cells)) for k, c in enumerate(columns)]
    out = ["  ".join(c.rjust(w) for c, w in zip(columns, widths))]
    out.append("  ".join("-" * w for w in widths))
    out += ["  ".join(v.rjust(w) for v, w in zip(r, widths)) for r in cells]
    for report in reports:
        out.append(f"{report.strategy} costs: {_row(report)['costs']}")
        out += [f"warning: {w}" for w in report.warnings]
    return "\n".join(out) + "\n"


def parse_csv_report(text: str) -> list[dict]:
    """Read :func:`render_report` csv output back into typed rows."""
    rows = []
    for raw in csv.DictReader(io.StringIO(text)):
        row = dict(raw)
        for key in ("tasks", "nodes", "resources", "max_migration_cost", "runs", "stable_runs", "min", "max"):
            row[key] = int(row[key]) if row[key] != "" else None
        for key in ("med", "avg", "stdev"):
            row[key] = float(row[key]) if row[key] != "" else None
        row["costs"] = [int(c.rstrip("!")) for c in row["costs"].split(";") if c]
        rows.append(row)
    return rows


def trace_lines(report: StatsReport, base_seed: int = 0) -> list[str]:
    lines = ["run,seed,cycle,population_size,best_cost"]
    for run, trace in enumerate(report.traces):
        for cycle, size, best in trace:
            lines.append(f"{run},{base_seed + run},{cycle},{size},{'' if best is None else best}")
    return lines

