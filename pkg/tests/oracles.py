"""Independent reference computations used by the test-suite.

Nothing here imports the solver kernels; the brute-force enumerator works on
the raw instance objects with numpy broadcasting only.
"""

import itertools

import numpy as np


def raw_arrays(instance):
    demand = np.array([list(t.demand) for t in instance.tasks], dtype=np.int64).reshape(instance.l, instance.d)
    capacity = np.array([list(n.capacity) for n in instance.nodes], dtype=np.int64).reshape(instance.m, instance.d)
    cost = np.array([t.migration_cost for t in instance.tasks], dtype=np.int64)
    mu0 = np.array(list(instance.initial_assignment), dtype=np.int64)
    return demand, capacity, cost, mu0


def all_assignments(m, l):
    """Every vector in {0..m-1}^l as rows, lexicographic order."""
    return np.array(list(itertools.product(range(m), repeat=l)), dtype=np.int64).reshape(-1, l)


def brute_force_optimum(instance):
    """Return (optimal cost or None, number of stable assignments)."""
    demand, capacity, cost, mu0 = raw_arrays(instance)
    genes = all_assignments(instance.m, instance.l)
    onehot = genes[:, :, None] == np.arange(instance.m)[None, None, :]     # (B, l, m)
    usage = np.einsum("blm,ld->bmd", onehot.astype(np.int64), demand)
    stable = (usage <= capacity[None]).all(axis=(1, 2))
    costs = ((genes != mu0[None]) * cost[None]).sum(axis=1)
    if not stable.any():
        return None, 0
    return int(costs[stable].min()), int(stable.sum())


def node_usage_by_hand(table, task_ids):
    """Sum demand rows of ``task_ids`` from a ``{id: (demand tuple, cost)}`` table."""
    totals = [0, 0, 0]
    for tid in task_ids:
        for i, v in enumerate(table[tid][0]):
            totals[i] += v
    return tuple(totals)


# Transcribed independently of the package source; used to cross-check the fixtures.
FIG3 = {
    "J01": ((7, 15, 7), 4), "J02": ((20, 3, 16), 5), "J03": ((1, 1, 1), 4), "J04": ((18, 13, 9), 7),
    "J05": ((14, 10, 1), 10), "J06": ((3, 12, 13), 3), "J07": ((11, 18, 12), 6), "J08": ((1, 4, 8), 6),
    "J09": ((4, 3, 17), 4), "J10": ((8, 19, 19), 4), "J11": ((5, 9, 18), 8), "J12": ((16, 14, 3), 6),
    "J13": ((6, 5, 17), 4), "J14": ((18, 11, 13), 5), "J15": ((10, 9, 12), 1), "J16": ((12, 17, 14), 9),
    "J17": ((3, 6, 8), 5), "J18": ((8, 12, 3), 5), "J19": ((15, 12, 8), 7), "J20": ((4, 8, 6), 1),
    "J21": ((12, 10, 5), 7), "J22": ((3, 19, 16), 2), "J23": ((6, 19, 1), 5), "J24": ((19, 11, 2), 3),
    "J25": ((14, 8, 15), 4), "J26": ((4, 15, 7), 10), "J27": ((20, 19, 5), 2), "J28": ((16, 2, 3), 8),
    "J29": ((16, 10, 3), 6), "J30": ((1, 1, 3), 5), "J31": ((19, 18, 1), 4), "J32": ((6, 14, 3), 10),
    "J33": ((3, 10, 3), 2), "J34": ((2, 8, 1), 4), "J35": ((8, 9, 9), 9), "J36": ((8, 15, 13), 4),
    "J37": ((19, 8, 5), 2), "J38": ((16, 20, 1), 2), "J39": ((15, 20, 4), 8), "J40": ((6, 13, 10), 10),
}
FIG2 = {
    "Node1": (60, 60, 50), "Node2": (70, 40, 50), "Node3": (70, 70, 70), "Node4": (80, 50, 90),
    "Node5": (60, 80, 50), "Node6": (60, 70, 50), "Node7": (80, 70, 80), "Node8": (80, 90, 60),
}
TEST1_LAYOUT = {
    "Node1": ("J01", "J04", "J14", "J16"),
    "Node2": ("J08", "J11", "J12", "J15", "J18"),
    "Node3": ("J02", "J03", "J06", "J07", "J13", "J19", "J20"),
    "Node4": ("J05", "J09", "J10", "J17"),
}
