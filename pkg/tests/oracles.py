"""Slow, independent reference routines used to freeze expected values.

Nothing here imports the solver code paths under test.
"""

import itertools
import math

import numpy as np
from scipy.optimize import brentq


def chromatic_number_dp(adj):
    """Exact chromatic number by dynamic programming over vertex subsets."""
    adj = np.asarray(adj, dtype=bool)
    n = adj.shape[0]
    if n == 0:
        return 0
    nbr = [sum(1 << j for j in range(n) if adj[i, j]) for i in range(n)]
    independent = [True] * (1 << n)
    for s in range(1 << n):
        low = s & -s
        if s and low != s:
            i = low.bit_length() - 1
            rest = s ^ low
            independent[s] = independent[rest] and not (nbr[i] & rest)
    best = [math.inf] * (1 << n)
    best[0] = 0
    for s in range(1, 1 << n):
        low = s & -s
        sub = s
        while sub:
            if sub & low and independent[sub]:
                best[s] = min(best[s], best[s ^ sub] + 1)
            sub = (sub - 1) & s
    return int(best[(1 << n) - 1])


def proximity_graph(table, r):
    t = np.asarray(table, dtype=float)
    adj = t <= r
    np.fill_diagonal(adj, False)
    return adj


def set_partitions(n, admissible=None):
    """Set partitions of range(n) as lists of lists (restricted growth strings).

    ``admissible(block, i)`` may veto adding point ``i`` to a block.
    """
    def rec(i, blocks):
        if i == n:
            yield [list(b) for b in blocks]
            return
        for b in blocks:
            if admissible is None or admissible(b, i):
                b.append(i)
                yield from rec(i + 1, blocks)
                b.pop()
        blocks.append([i])
        yield from rec(i + 1, blocks)
        blocks.pop()
    yield from rec(0, [])


def min_families_partition_oracle(table, r, D, tol=1e-9):
    """Least family count over every D-bounded partition, via exact coloring.

    For each partition into pieces of diameter <= D, two pieces conflict
    when some cross pair is within r; the count is the chromatic number of
    that conflict graph.  Exponential in the number of points.
    """
    t = np.asarray(table, dtype=float)
    n = t.shape[0]
    best = math.inf
    for part in set_partitions(n, lambda b, i: t[i, b].max() <= D + tol):
        m = len(part)
        adj = np.zeros((m, m), dtype=bool)
        for a, b in itertools.combinations(range(m), 2):
            if t[np.ix_(part[a], part[b])].min() <= r:
                adj[a, b] = adj[b, a] = True
        best = min(best, chromatic_number_dp(adj))
    return int(best)


def brute_open_ball(points_1d, center_value, radius):
    """Open ball in a subset of the real line by direct comparison."""
    pts = np.asarray(points_1d, dtype=float)
    return np.flatnonzero(np.abs(pts - center_value) < radius)


def crossing_threshold(g, lo=1.0 + 1e-12, hi=1e6):
    """Root of a function that is >= 0 before its single crossing and < 0 after."""
    return brentq(g, lo, hi, xtol=1e-12)


def random_metric_table(rng, n, kind):
    """A random valid distance table: Euclidean/L1 point clouds or a path-metric closure."""
    if kind == "euclid":
        x = rng.normal(size=(n, rng.integers(1, 4)))
        return np.sqrt(((x[:, None] - x[None]) ** 2).sum(-1))
    if kind == "l1":
        x = rng.integers(-20, 21, size=(n, 2)).astype(float) + rng.random((n, 2))
        return np.abs(x[:, None] - x[None]).sum(-1)
    w = rng.uniform(0.1, 10.0, size=(n, n))
    w = np.triu(w, 1)
    w = w + w.T
    for k in range(n):
        w = np.minimum(w, w[:, [k]] + w[[k], :])
    return w
