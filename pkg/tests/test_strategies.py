import itertools

import pytest

from evobalance.instances import GeneratorParams, builtin_fixture, generate_random_instance
from evobalance.model import Assignment, Instance, Node, Task, is_stable, transformation_cost
from evobalance.strategies import SearchBudget, balance_solve, fullscan_solve, greedy_solve

from oracles import brute_force_optimum


def truncated_test1():
    """Node1-Node3 of test1 with the twelve tasks that start on Node2 and Node3."""
    full = builtin_fixture("test1")
    keep = [j for j, n in enumerate(full.initial_assignment) if n in (1, 2)]
    return Instance(
        full.resources,
        full.nodes[:3],
        [full.tasks[j] for j in keep],
        [full.initial_assignment[j] for j in keep],
        name="test1-trunc12",
    )


def one_dim(caps, tasks):
    """``tasks`` is a list of (demand, cost, initial node)."""
    return Instance(
        ["r"],
        [Node(f"N{n}", (c,)) for n, c in enumerate(caps)],
        [Task(f"T{j}", (dem,), cost) for j, (dem, cost, _) in enumerate(tasks)],
        [home for _, _, home in tasks],
    )


def check_result(instance, result):
    if result.stable:
        assert is_stable(instance, result.best)
        assert transformation_cost(instance, result.best) == result.cost


class TestFullscan:
    def test_test1_optimum(self):
        result = fullscan_solve(builtin_fixture("test1"))
        assert result.stable and result.complete
        assert result.cost == 5
        check_result(builtin_fixture("test1"), result)

    def test_truncation_exhaustive_matches_oracle(self):
        inst = truncated_test1()
        assert inst.l == 12 and inst.m == 3
        oracle, n_stable = brute_force_optimum(inst)
        exhaustive = fullscan_solve(inst, mode="exhaustive")
        bnb = fullscan_solve(inst, mode="bnb")
        assert n_stable > 0
        assert exhaustive.cost == bnb.cost == oracle
        # exhaustive visits every internal node and leaf of the m-ary tree
        assert exhaustive.cycles_or_nodes == sum(3 ** k for k in range(1, 13))
        assert bnb.cycles_or_nodes < exhaustive.cycles_or_nodes

    def test_forced_single_move(self):
        inst = one_dim([3, 10], [(5, 7, 0)])
        for mode in ("exhaustive", "branch_and_bound"):
            result = fullscan_solve(inst, mode=mode)
            assert result.stable and result.cost == 7
            assert result.best == Assignment([1])

    def test_already_stable(self):
        inst = one_dim([10, 10], [(2, 5, 0), (3, 4, 1)])
        result = fullscan_solve(inst)
        assert result.cost == 0 and result.best == inst.initial_assignment

    def test_infeasible(self):
        inst = one_dim([3, 3], [(5, 1, 0)])
        result = fullscan_solve(inst)
        assert not result.stable and result.complete

    def test_node_budget_marks_incomplete(self):
        result = fullscan_solve(builtin_fixture("test1"), SearchBudget(node_limit=10))
        assert not result.complete
        assert result.cycles_or_nodes <= 10
        assert not result.stable

    def test_unknown_mode(self):
        with pytest.raises(ValueError):
            fullscan_solve(builtin_fixture("test1"), mode="magic")

    @pytest.mark.parametrize("seed", range(40))
    def test_modes_agree_with_brute_force(self, seed):
        l = 2 + seed % 6
        inst = generate_random_instance(GeneratorParams(l, 1 + seed % 3, 1 + seed % 3, capacity_range=(10, 40),
                                                        seed=seed))
        oracle, _ = brute_force_optimum(inst)
        for mode in ("exhaustive", "bnb"):
            result = fullscan_solve(inst, mode=mode)
            assert result.complete
            assert (result.cost if result.stable else None) == oracle
            check_result(inst, result)


class TestGreedy:
    def test_fixture_stable(self):
        inst = builtin_fixture("test1")
        result = greedy_solve(inst)
        assert result.stable
        check_result(inst, result)
        assert result.cost >= 5

    def test_already_stable(self):
        inst = one_dim([10, 10], [(2, 5, 0)])
        result = greedy_solve(inst)
        assert result.cost == 0 and result.best == inst.initial_assignment and result.cycles_or_nodes == 0

    def test_moves_cheaper_task(self):
        inst = one_dim([10, 20], [(6, 3, 0), (6, 7, 0)])
        # both single moves fix the overload; enumerate them
        options = {}
        for j in range(2):
            a = inst.initial_assignment.moved(j, 1)
            assert is_stable(inst, a)
            options[j] = transformation_cost(inst, a)
        result = greedy_solve(inst)
        assert result.cost == min(options.values()) == 3
        assert result.best == inst.initial_assignment.moved(0, 1)

    def test_stuck_reports_unstable(self):
        inst = one_dim([3, 3], [(5, 1, 0)])
        assert not greedy_solve(inst).stable

    def test_deterministic(self):
        inst = builtin_fixture("test3")
        assert greedy_solve(inst).best == greedy_solve(inst).best


class TestBalance:
    def test_fixture_stable(self):
        inst = builtin_fixture("test1")
        result = balance_solve(inst)
        assert result.stable
        check_result(inst, result)

    def test_already_stable(self):
        inst = one_dim([10, 10], [(2, 5, 0)])
        assert balance_solve(inst).cost == 0

    def test_prefers_less_utilised_target(self):
        inst = one_dim([5, 100, 100], [(6, 1, 0), (10, 1, 1), (90, 1, 2)])
        result = balance_solve(inst)
        assert result.best == Assignment([1, 1, 2])

    def test_deterministic(self):
        inst = builtin_fixture("test2")
        assert balance_solve(inst).best == balance_solve(inst).best


@pytest.mark.parametrize("name", ["test1", "test2", "test3"])
def test_exact_never_worse_than_heuristics(name):
    inst = builtin_fixture(name)
    exact = fullscan_solve(inst)
    for heuristic in (greedy_solve, balance_solve):
        result = heuristic(inst)
        check_result(inst, result)
        if result.stable and exact.stable:
            assert exact.cost <= result.cost


def test_test2_optimum():
    result = fullscan_solve(builtin_fixture("test2"), SearchBudget(time_limit_ms=600_000))
    assert result.complete and result.cost == 15


def test_brute_force_oracle_self_check():
    # 2 tasks, 2 nodes: enumerate by hand
    inst = one_dim([5, 5], [(4, 2, 0), (4, 3, 0)])
    costs = []
    for genes in itertools.product(range(2), repeat=2):
        a = Assignment(genes)
        if is_stable(inst, a):
            costs.append(transformation_cost(inst, a))
    assert brute_force_optimum(inst) == (min(costs), len(costs)) == (2, 2)
