"""Graph coloring used on conflict graphs of cover pieces."""

from __future__ import annotations

import numpy as np

from .errors import BudgetExceeded

COLOR_LIMIT = 20


def _as_adjacency(adj):
    a = np.asarray(adj, dtype=bool)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError("adjacency must be a square boolean matrix")
    a = a | a.T
    np.fill_diagonal(a, False)
    return a


def greedy_coloring(adj) -> list:
    """Largest-degree-first greedy coloring, ties broken by lowest index."""
    a = _as_adjacency(adj)
    n = a.shape[0]
    degree = a.sum(axis=1)
    order = sorted(range(n), key=lambda v: (-int(degree[v]), v))
    colors = [-1] * n
    for v in order:
        used = {colors[u] for u in np.flatnonzero(a[v]) if colors[u] >= 0}
        c = 0
        while c in used:
            c += 1
        colors[v] = c
    return colors


def chromatic_number(adj, limit: int = COLOR_LIMIT):
    """Exact chromatic number by DSATUR branch and bound.

    Returns ``(k, colors)``.  Graphs with more than ``limit`` vertices are
    refused rather than answered heuristically.
    """
    a = _as_adjacency(adj)
    n = a.shape[0]
    if n > limit:
        raise BudgetExceeded(f"exact coloring limited to {limit} vertices, got {n}",
                             budget=limit, requested=n)
    if n == 0:
        return 0, []
    nbrs = [np.flatnonzero(a[v]).tolist() for v in range(n)]
    best_colors = greedy_coloring(a)
    best = [max(best_colors) + 1, best_colors]
    colors = [-1] * n

    def pick():
        # uncolored vertex with most distinct neighbour colors, then degree, then index
        choice, key = -1, None
        for v in range(n):
            if colors[v] >= 0:
                continue
            sat = len({colors[u] for u in nbrs[v] if colors[u] >= 0})
            k = (-sat, -len(nbrs[v]), v)
            if key is None or k < key:
                choice, key = v, k
        return choice

    def search(colored, used):
        if used >= best[0]:
            return
        if colored == n:
            best[0] = used
            best[1] = list(colors)
            return
        v = pick()
        forbidden = {colors[u] for u in nbrs[v] if colors[u] >= 0}
        for c in range(min(used + 1, best[0] - 1)):
            if c in forbidden:
                continue
            colors[v] = c
            search(colored + 1, max(used, c + 1))
            colors[v] = -1

    search(0, 0)
    return best[0], best[1]
