"""Compiled inner loops shared by the search and evolution strategies.

Every kernel works on plain int64 arrays:

    demand    (l, d)  per-task resource demand
    capacity  (m, d)  per-node available resources
    cost      (l,)    migration cost
    mu0       (l,)    initial node of every task

Random numbers come from a ``numpy.random.Generator`` passed in by the
caller, so each kernel advances the caller's stream deterministically.
"""

from __future__ import annotations

import numpy as np
from numba import njit

BNB_DONE = 0
BNB_PAUSED = 1


@njit(cache=True)
def eval_batch(genes, demand, capacity, cost, mu0):
    """Return (transformation cost, stable flag) for every row of ``genes``."""
    n_rows, l = genes.shape
    m, d = capacity.shape
    costs = np.zeros(n_rows, dtype=np.int64)
    stable = np.ones(n_rows, dtype=np.bool_)
    usage = np.zeros((m, d), dtype=np.int64)
    for b in range(n_rows):
        usage[:, :] = 0
        c = 0
        for j in range(l):
            n = genes[b, j]
            if n != mu0[j]:
                c += cost[j]
            for i in range(d):
                usage[n, i] += demand[j, i]
        costs[b] = c
        ok = True
        for n in range(m):
            for i in range(d):
                if usage[n, i] > capacity[n, i]:
                    ok = False
        stable[b] = ok
    return costs, stable


@njit(cache=True)
def draw_stable(rng, demand, capacity, draw_cap, out, order):
    """Rejection-sample a uniform stable genotype into ``out``.

    Genes are drawn in ``order`` (any permutation gives the same
    distribution; heavy tasks first reject sooner).  A draw is abandoned as
    soon as a partial placement overloads a node; demands are non-negative
    so the full draw would be rejected anyway.  Returns
    ``(draws_used, success)``.
    """
    l, d = demand.shape
    m = capacity.shape[0]
    usage = np.zeros((m, d), dtype=np.int64)
    draws = 0
    while True:
        if draw_cap > 0 and draws >= draw_cap:
            return draws, False
        draws += 1
        usage[:, :] = 0
        ok = True
        for q in range(l):
            j = order[q]
            n = min(int(rng.random() * m), m - 1)
            out[j] = n
            for i in range(d):
                usage[n, i] += demand[j, i]
                if usage[n, i] > capacity[n, i]:
                    ok = False
            if not ok:
                break
        if ok:
            return draws, True


@njit(cache=True)
def _min_relative_residual(usage_row, cap_row, extra):
    """Smallest (capacity - usage - extra) / capacity over resources; -1 if it does not fit."""
    d = cap_row.shape[0]
    best = np.inf
    for i in range(d):
        left = cap_row[i] - usage_row[i] - extra[i]
        if left < 0:
            return -1.0
        if cap_row[i] > 0:
            r = left / cap_row[i]
            if r < best:
                best = r
    if best == np.inf:
        best = 0.0
    return best


@njit(cache=True)
def repair(rng, genes, demand, capacity, max_steps):
    """Push a random genotype towards stability in place; return whether it became stable.

    Each step picks a random overloaded node and one of its tasks at random
    and moves that task to the node with the most relative headroom that
    can take it.
    """
    l, d = demand.shape
    m = capacity.shape[0]
    usage = np.zeros((m, d), dtype=np.int64)
    for j in range(l):
        for i in range(d):
            usage[genes[j], i] += demand[j, i]
    over = np.empty(m, dtype=np.int64)
    members = np.empty(l, dtype=np.int64)
    for _ in range(max_steps):
        n_over = 0
        for n in range(m):
            for i in range(d):
                if usage[n, i] > capacity[n, i]:
                    over[n_over] = n
                    n_over += 1
                    break
        if n_over == 0:
            return True
        src = over[min(int(rng.random() * n_over), n_over - 1)]
        k = 0
        for j in range(l):
            if genes[j] == src:
                members[k] = j
                k += 1
        task = members[min(int(rng.random() * k), k - 1)]
        target = -1
        best = -1.0
        for n in range(m):
            if n == src:
                continue
            score = _min_relative_residual(usage[n], capacity[n], demand[task])
            if score > best:
                best = score
                target = n
        if target >= 0:
            for i in range(d):
                usage[src, i] -= demand[task, i]
                usage[target, i] += demand[task, i]
            genes[task] = target
    for n in range(m):
        for i in range(d):
            if usage[n, i] > capacity[n, i]:
                return False
    return True


@njit(cache=True)
def _cover_bound(depth, usage, rem_native, capacity, native_by_ratio, native_count,
                 position, demand, cost):
    """Lower bound on the cost still needed to relieve every node.

    For a node whose fixed usage plus its not-yet-placed native tasks
    exceeds capacity on resource i, some of those native tasks must leave.
    The cheapest fractional choice (best cost per unit of resource i first)
    bounds that from below; nodes own disjoint native sets so the per-node
    maxima add up.
    """
    m, d = capacity.shape
    total = 0.0
    for n in range(m):
        worst = 0.0
        for i in range(d):
            excess = usage[n, i] + rem_native[n, i] - capacity[n, i]
            if excess <= 0:
                continue
            need = float(excess)
            acc = 0.0
            for q in range(native_count[n, i]):
                j = native_by_ratio[n, i, q]
                if position[j] < depth:
                    continue
                r = demand[j, i]
                if r >= need:
                    acc += cost[j] * need / r
                    need = 0.0
                    break
                acc += cost[j]
                need -= r
            if need > 0.0:
                return np.inf
            if acc > worst:
                worst = acc
        total += worst
    return total


@njit(cache=True)
def fullscan(order, demand, capacity, cost, mu0, prune, state_choice, state_genes, state_usage,
             state_rem, state_scalars, best_genes, node_budget,
             native_by_ratio, native_count, position):
    """Resumable depth-first search over all assignments.

    Tasks are branched in ``order``; children try the initial node first,
    then the remaining nodes in index order.  With ``prune`` set, branches
    are cut when a node is overloaded by already-placed tasks, when the
    accumulated cost reaches the incumbent, or when the relief lower bound
    shows the incumbent cannot be beaten.

    ``state_scalars`` holds ``[depth, acc_cost, incumbent, nodes, started]``
    and is updated in place so the search can continue after a pause.
    Returns BNB_DONE or BNB_PAUSED.
    """
    l = order.shape[0]
    m, d = capacity.shape
    depth = state_scalars[0]
    acc = state_scalars[1]
    incumbent = state_scalars[2]
    nodes = state_scalars[3]
    if state_scalars[4] == 0:
        state_scalars[4] = 1
        depth = 0
        state_choice[0] = -1
    explored = 0
    while depth >= 0:
        if explored >= node_budget:
            state_scalars[0] = depth
            state_scalars[1] = acc
            state_scalars[2] = incumbent
            state_scalars[3] = nodes
            return BNB_PAUSED
        if depth == l:
            # leaf: every task placed
            ok = True
            for n in range(m):
                for i in range(d):
                    if state_usage[n, i] > capacity[n, i]:
                        ok = False
            if ok and (incumbent < 0 or acc < incumbent):
                incumbent = acc
                for j in range(l):
                    best_genes[j] = state_genes[j]
            depth -= 1
            continue
        j = order[depth]
        k = state_choice[depth]
        if k >= 0:
            # undo previous child at this depth
            prev = state_genes[j]
            for i in range(d):
                state_usage[prev, i] -= demand[j, i]
            if prev != mu0[j]:
                acc -= cost[j]
        else:
            # entering this depth: task j leaves the pool of unplaced natives
            for i in range(d):
                state_rem[mu0[j], i] -= demand[j, i]
        k += 1
        if k >= m:
            state_choice[depth] = -1
            for i in range(d):
                state_rem[mu0[j], i] += demand[j, i]
            depth -= 1
            continue
        state_choice[depth] = k
        # child k: 0 -> initial node, then other nodes ascending
        if k == 0:
            n = mu0[j]
        else:
            n = k - 1
            if n >= mu0[j]:
                n += 1
        state_genes[j] = n
        for i in range(d):
            state_usage[n, i] += demand[j, i]
        if n != mu0[j]:
            acc += cost[j]
        nodes += 1
        explored += 1
        if prune:
            cut = False
            if incumbent >= 0 and acc >= incumbent:
                cut = True
            if not cut:
                for i in range(d):
                    if state_usage[n, i] > capacity[n, i]:
                        cut = True
            if not cut and incumbent >= 0:
                lb = _cover_bound(depth + 1, state_usage, state_rem, capacity, native_by_ratio,
                                  native_count, position, demand, cost)
                if acc + lb > incumbent - 1.0 + 1e-9:
                    cut = True
            if cut:
                continue
        depth += 1
        if depth < l:
            state_choice[depth] = -1
    state_scalars[0] = depth
    state_scalars[1] = acc
    state_scalars[2] = incumbent
    state_scalars[3] = nodes
    return BNB_DONE


@njit(cache=True)
def fill_migrants(rng, demand, capacity, draw_cap, out, repair_steps, order):
    """Fill every row of ``out`` with a stable random genotype.

    Rows whose rejection sampling exhausts ``draw_cap`` are filled with a
    fresh uniform genotype pushed through :func:`repair` instead.  Returns a
    boolean array marking the rows that needed the fallback.
    """
    k, l = out.shape
    m = capacity.shape[0]
    fallback = np.zeros(k, dtype=np.bool_)
    row = np.empty(l, dtype=np.int64)
    for q in range(k):
        draws, ok = draw_stable(rng, demand, capacity, draw_cap, row, order)
        if not ok:
            fallback[q] = True
            for j in range(l):
                row[j] = min(int(rng.random() * m), m - 1)
            repair(rng, row, demand, capacity, repair_steps)
        out[q, :] = row
    return fallback


def heavy_first_order(demand, capacity):
    """Task permutation by decreasing largest demand relative to mean node capacity."""
    scale = np.maximum(capacity.mean(axis=0), 1.0)
    weight = (demand / scale).max(axis=1) if demand.shape[1] else np.zeros(demand.shape[0])
    return np.argsort(-weight, kind="stable").astype(np.int64)
