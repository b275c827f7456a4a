import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from evobalance.instances import builtin_fixture
from evobalance.model import (
    Assignment,
    Instance,
    Node,
    ResourceVector,
    Task,
    fitness,
    is_stable,
    max_migration_cost,
    overloaded_resources,
    reassign_cost,
    resource_usage,
    transformation_cost,
    validate_instance,
)

from oracles import FIG2, FIG3, TEST1_LAYOUT, node_usage_by_hand


@pytest.fixture(scope="module")
def test1():
    return builtin_fixture("test1")


def tiny(demands, caps, mu0, costs=None):
    d = len(caps[0])
    costs = costs or [1] * len(demands)
    return Instance(
        resources=[f"R{i}" for i in range(d)],
        nodes=[Node(f"N{n}", c) for n, c in enumerate(caps)],
        tasks=[Task(f"T{j}", dem, c) for j, (dem, c) in enumerate(zip(demands, costs))],
        initial_assignment=mu0,
    )


class TestResourceUsage:
    def test_node3_under_initial(self, test1):
        expected = node_usage_by_hand(FIG3, TEST1_LAYOUT["Node3"])
        assert expected == (60, 59, 73)
        assert resource_usage(test1, test1.initial_assignment, 2).levels == expected

    def test_node2_under_initial(self, test1):
        # hand sum of J08, J11, J12, J15, J18
        expected = node_usage_by_hand(FIG3, TEST1_LAYOUT["Node2"])
        assert expected == (40, 48, 44)
        assert resource_usage(test1, test1.initial_assignment, 1).levels == expected

    def test_empty_node_is_zero(self):
        inst = tiny([(3, 4)], [(5, 5), (5, 5)], [0])
        assert resource_usage(inst, inst.initial_assignment, 1) == ResourceVector.zeros(2)

    def test_out_of_range(self, test1):
        with pytest.raises(IndexError):
            resource_usage(test1, test1.initial_assignment, 4)


class TestStability:
    def test_initial_test1_overloaded(self, test1):
        assert not is_stable(test1, test1.initial_assignment)
        assert overloaded_resources(test1, test1.initial_assignment) == [(1, 1), (2, 2)]

    def test_zero_demand_is_stable(self):
        inst = tiny([(0, 0, 0)], [(0, 0, 0)], [0])
        assert is_stable(inst, inst.initial_assignment)

    def test_cost5_optimum_is_stable(self, test1):
        a = test1.assignment_from_ids({"J15": "Node3", "J13": "Node4"})
        assert is_stable(test1, a)
        assert transformation_cost(test1, a) == 5

    def test_both_moves_to_node4_overload_memory(self, test1):
        a = test1.assignment_from_ids({"J15": "Node4", "J13": "Node4"})
        # Node4 memory: 38 + 9 + 5 = 52 > 50
        assert resource_usage(test1, a, 3).levels[1] == 52
        assert not is_stable(test1, a)


class TestCosts:
    def test_reassign_zero_at_home(self, test1):
        assert all(reassign_cost(test1, test1.initial_assignment, j) == 0 for j in range(test1.l))

    @pytest.mark.parametrize("task, src, dst, cost", [("J13", "Node3", "Node1", 4), ("J05", "Node4", "Node1", 10)])
    def test_reassign_moved(self, test1, task, src, dst, cost):
        j = test1.task_index(task)
        assert test1.initial_assignment[j] == test1.node_index(src)
        a = test1.assignment_from_ids({task: dst})
        assert reassign_cost(test1, a, j) == cost

    def test_reassign_out_of_range(self, test1):
        with pytest.raises(IndexError):
            reassign_cost(test1, test1.initial_assignment, 20)

    def test_transformation_cost_all_moved(self, test1):
        moved = Assignment((n + 1) % test1.m for n in test1.initial_assignment)
        assert transformation_cost(test1, moved) == 104

    @pytest.mark.parametrize("name, total", [("test1", 104), ("test2", 156), ("test3", 211)])
    def test_max_migration_cost(self, name, total):
        assert max_migration_cost(builtin_fixture(name)) == total

    def test_fitness_values(self, test1):
        assert fitness(test1, test1.initial_assignment) == 104
        assert fitness(test1, test1.assignment_from_ids({"J15": "Node3", "J13": "Node4"})) == 99
        moved = Assignment((n + 1) % test1.m for n in test1.initial_assignment)
        assert fitness(test1, moved) == 0


class TestValidation:
    def test_fixture_clean(self, test1):
        report = validate_instance(test1)
        assert report.ok and len(report) == 0 and report.warnings == []

    def test_assignment_out_of_range(self):
        inst = tiny([(1,)], [(5,)], [1])
        report = validate_instance(inst)
        assert len(report.violations) == 1
        assert report.violations[0].startswith("assignment entry out of range")

    def test_demand_dimension_mismatch(self):
        inst = Instance(["a", "b", "c"], [Node("N", (5, 5, 5))], [Task("T", (1, 2), 0)], [0])
        report = validate_instance(inst)
        assert len(report.violations) == 1
        assert report.violations[0].startswith("demand dimension mismatch")

    def test_negative_cost(self):
        inst = tiny([(1,)], [(5,)], [0], costs=[-1])
        assert any("negative migration cost" in v for v in validate_instance(inst).violations)

    def test_oversized_task_warns(self):
        inst = tiny([(9,)], [(5,), (6,)], [0])
        report = validate_instance(inst)
        assert report.ok
        assert report.warnings and "fits on no node" in report.warnings[0]


def test_fixture_capacities_match_table(test1):
    for node in builtin_fixture("nodes_fig2"):
        assert node.capacity.levels == FIG2[node.id]
    for task in builtin_fixture("tasks_fig3"):
        assert (task.demand.levels, task.migration_cost) == FIG3[task.id]


genotypes = st.lists(st.integers(0, 3), min_size=20, max_size=20).map(Assignment)


@given(genotypes)
@settings(max_examples=200, deadline=None)
def test_fitness_cost_affine(genotype):
    inst = builtin_fixture("test1")
    cost = transformation_cost(inst, genotype)
    assert 0 <= cost <= max_migration_cost(inst)
    assert fitness(inst, genotype) + cost == max_migration_cost(inst)


@given(genotypes)
@settings(max_examples=200, deadline=None)
def test_stability_matches_resummation(genotype):
    inst = builtin_fixture("test1")
    demand = np.array([list(t.demand) for t in inst.tasks])
    cap = np.array([list(n.capacity) for n in inst.nodes])
    usage = np.zeros_like(cap)
    for j, n in enumerate(genotype):
        usage[n] += demand[j]
    assert is_stable(inst, genotype) == bool((usage <= cap).all())


@given(genotypes, st.integers(0, 19), st.integers(1, 3))
@settings(max_examples=200, deadline=None)
def test_moving_more_never_cheaper(genotype, j, shift):
    inst = builtin_fixture("test1")
    home = inst.initial_assignment[j]
    if genotype[j] != home:
        return
    moved = genotype.moved(j, (home + shift) % inst.m)
    assert transformation_cost(inst, moved) >= transformation_cost(inst, genotype)


@pytest.mark.parametrize("name", ["test1", "test2", "test3"])
def test_initial_assignment_is_free(name):
    inst = builtin_fixture(name)
    assert transformation_cost(inst, inst.initial_assignment) == 0
    assert fitness(inst, inst.initial_assignment) == max_migration_cost(inst)
