"""Command-line benchmark driver.

Example::

    evobalance --instance test1 --strategy greedy,balance,evolve --runs 40 \\
        --cycle-limit 10000 --format csv --output results.csv
"""

from __future__ import annotations

import argparse
import logging
import sys

from .harness import STRATEGIES, ExperimentSpec, render_report, run_experiment, trace_lines
from .instances import ParseError
from .strategies import SearchBudget


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="evobalance",
        description="Benchmark task-reassignment strategies on a d-resource load balancing instance.")
    parser.add_argument("--instance", required=True,
                        help="fixture name (test1, test2, test3) or path to an instance file")
    parser.add_argument("--strategy", default="evolve",
                        help=f"comma-separated list from {', '.join(STRATEGIES)}, or 'all'")
    parser.add_argument("--runs", type=int, default=1, help="repetitions per strategy (default 1)")
    parser.add_argument("--time-limit-ms", type=int, default=0, help="wall-clock budget per run, 0 = none")
    parser.add_argument("--cycle-limit", type=int, default=0,
                        help="GA cycles or search-tree nodes per run, 0 = none")
    parser.add_argument("--seed", type=int, default=0, help="base seed; run i uses seed + i")
    parser.add_argument("--population-limit", type=int, default=None)
    parser.add_argument("--tournament-size", type=int, default=None)
    parser.add_argument("--format", choices=("table", "csv"), default="table")
    parser.add_argument("--output", default="stdout", help="report destination (default stdout)")
    parser.add_argument("--trace", default=None, help="write the per-cycle best-cost trace as csv")
    parser.add_argument("--fullscan-mode", choices=("exhaustive", "bnb"), default="bnb")
    parser.add_argument("--workers", type=int, default=1, help="processes for independent runs")
    parser.add_argument("-v", "--verbose", action="store_true")
    return parser


def _strategies(text: str) -> list[str]:
    if text == "all":
        return list(STRATEGIES)
    names = [s.strip() for s in text.split(",") if s.strip()]
    unknown = [s for s in names if s not in STRATEGIES]
    if unknown or not names:
        raise ValueError(f"unknown strategy {', '.join(unknown) or text!r}")
    return names


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    overrides = {}
    if args.population_limit is not None:
        overrides["population_limit"] = args.population_limit
    if args.tournament_size is not None:
        overrides["tournament_size"] = args.tournament_size

    try:
        budget = SearchBudget(time_limit_ms=args.time_limit_ms, node_limit=args.cycle_limit)
        specs = [
            ExperimentSpec(instance=args.instance, strategy=name, runs=args.runs, budget=budget,
                           base_seed=args.seed, overrides=overrides,
                           fullscan_mode="branch_and_bound" if args.fullscan_mode == "bnb" else "exhaustive")
            for name in _strategies(args.strategy)
        ]
        reports = [run_experiment(spec, workers=args.workers, trace=args.trace is not None) for spec in specs]
    except (OSError, ParseError, ValueError, KeyError) as exc:
        print(f"evobalance: error: {exc}", file=sys.stderr)
        return 2

    text = render_report(reports, args.format)
    try:
        if args.output in ("-", "stdout"):
            sys.stdout.write(text)
        else:
            with open(args.output, "w", encoding="utf-8") as fh:
                fh.write(text)
        if args.trace:
            with open(args.trace, "w", encoding="utf-8") as fh:
                for report in reports:
                    if any(report.traces):
                        fh.write(f"# {report.strategy}\n")
                        fh.write("\n".join(trace_lines(report, args.seed)) + "\n")
    except OSError as exc:
        print(f"evobalance: error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
