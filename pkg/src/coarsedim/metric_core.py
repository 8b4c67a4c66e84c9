"""Finite metric spaces, their generators and the log-remetrization.

A :class:`MetricSpace` is a finite point set ``0..N-1`` together with a
distance kernel.  Small spaces keep an eager symmetric table; lattice spaces
compute rows from integer coordinates on demand so that long intervals
(10^5 points and more) stay cheap.  Remetrized spaces wrap their parent
kernel with ``log1p`` (or ``expm1`` for the inverse) and never copy it.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass
from functools import cached_property
from typing import Optional, Sequence

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components, shortest_path

from .errors import BudgetExceeded, DomainError, MetricError, OutOfRangeError

TOL = 1e-9
DEFAULT_POINT_BUDGET = 4096
# largest d with expm1(d) finite in float64
_EXPM1_LIMIT = math.log(np.finfo(float).max)

NORMS = ("L1", "L2", "Linf")


@dataclass(frozen=True)
class PointId:
    index: int
    label: Optional[str] = None


class _DenseKernel:
    def __init__(self, table):
        table = np.array(table, dtype=float)
        table.setflags(write=False)
        self.table = table

    def row(self, i):
        return self.table[i]

    def block(self, rows, cols):
        return self.table[np.ix_(rows, cols)]

    def max_pair(self):
        flat = int(np.argmax(self.table))
        i, j = divmod(flat, self.table.shape[0])
        return i, j, float(self.table[i, j])


class _LatticeKernel:
    def __init__(self, coords, norm):
        coords = np.asarray(coords, dtype=np.int64)
        coords.setflags(write=False)
        self.coords = coords
        self.norm = norm
        self.sorted_1d = coords.shape[1] == 1 and bool(np.all(np.diff(coords[:, 0]) > 0))

    def _reduce(self, diff):
        diff = np.abs(diff).astype(float)
        if self.norm == "L1":
            return diff.sum(axis=-1)
        if self.norm == "L2":
            return np.sqrt((diff ** 2).sum(axis=-1))
        return diff.max(axis=-1)

    def row(self, i):
        return self._reduce(self.coords - self.coords[i])

    def block(self, rows, cols):
        c = self.coords
        return self._reduce(c[np.asarray(rows)][:, None, :] - c[np.asarray(cols)][None, :, :])

    def max_pair(self):
        # the box corners realise the diameter for every supported norm
        order = np.lexsort(self.coords.T[::-1])
        lo, hi = int(order[0]), int(order[-1])
        return lo, hi, float(self._reduce(self.coords[hi] - self.coords[lo]))


class _MappedKernel:
    """Applies a monotone increasing ``fn`` with ``fn(0) = 0`` to a parent."""

    def __init__(self, parent, fn):
        self.parent = parent
        self.fn = fn

    def row(self, i):
        return self.fn(self.parent.row(i))

    def block(self, rows, cols):
        return self.fn(self.parent.block(rows, cols))

    def max_pair(self):
        i, j, d = self.parent.max_pair()
        return i, j, float(self.fn(d))


class MetricSpace:
    """Immutable finite metric space on the points ``0..size-1``.

    ``truncation_radius`` records the scale at which a generated space was
    cut off from its infinite model (the radius of a Cayley ball, the side of
    a grid); asymptotic verdicts computed on the space are estimates over
    that window only.
    """

    def __init__(self, kernel, size: int, generator_tag: str, labels=None,
                 truncation_radius: Optional[float] = None):
        self._kernel = kernel
        self.size = int(size)
        self.generator_tag = generator_tag
        self._labels = labels
        self.truncation_radius = truncation_radius

    # construction -----------------------------------------------------

    @classmethod
    def from_matrix(cls, table, labels: Optional[Sequence[str]] = None,
                    tag: str = "explicit-matrix", tol: float = TOL,
                    check_triangle: bool = True) -> "MetricSpace":
        table = np.asarray(table, dtype=float)
        problem = metric_violation(table, tol=tol, check_triangle=check_triangle)
        if problem is not None:
            raise MetricError(problem)
        space = cls(_DenseKernel(table), table.shape[0], tag,
                    labels=tuple(labels) if labels is not None else None)
        space.truncation_radius = space.diameter()
        return space

    @classmethod
    def from_lower_triangle(cls, rows: Sequence[Sequence[float]], **kw) -> "MetricSpace":
        """Rebuild from ``[[d10], [d20, d21], ...]`` (row i holds d(i, 0..i-1))."""
        n = len(rows) + 1
        table = np.zeros((n, n))
        for i, row in enumerate(rows, start=1):
            if len(row) != i:
                raise MetricError(f"lower-triangle row {i} has {len(row)} entries, expected {i}")
            table[i, :i] = row
            table[:i, i] = row
        return cls.from_matrix(table, **kw)

    # access -------------------------------------------------------------

    def __len__(self):
        return self.size

    def __repr__(self):
        return f"MetricSpace(size={self.size}, tag={self.generator_tag!r})"

    def label(self, i: int) -> Optional[str]:
        if self._labels is None:
            return None
        if callable(self._labels):
            return self._labels(i)
        return self._labels[i]

    @property
    def points(self) -> list:
        return [PointId(i, self.label(i)) for i in range(self.size)]

    def dist(self, i: int, j: int) -> float:
        return float(self._kernel.row(i)[j])

    def row(self, i: int) -> np.ndarray:
        """Distances from point ``i`` to every point."""
        return self._kernel.row(i)

    def block(self, rows, cols) -> np.ndarray:
        return self._kernel.block(np.asarray(rows, dtype=np.int64),
                                  np.asarray(cols, dtype=np.int64))

    def table(self, limit: int = DEFAULT_POINT_BUDGET) -> np.ndarray:
        """The full distance table; refuses to materialise more than ``limit`` points."""
        if isinstance(self._kernel, _DenseKernel):
            return self._kernel.table
        if self.size > limit:
            raise BudgetExceeded(
                f"refusing to materialise a {self.size}x{self.size} table (limit {limit})",
                budget=limit, requested=self.size)
        idx = np.arange(self.size)
        return self._kernel.block(idx, idx)

    def ball_indices(self, center: int, radius: float, tol: float = TOL) -> np.ndarray:
        """Sorted indices of points at distance ``< radius`` from ``center``.

        Distances within ``tol`` of the radius count as on the sphere and are
        left out, so that floating-point ties behave like exact ties.
        """
        k = self._kernel
        if isinstance(k, _LatticeKernel) and k.coords.shape[1] == 1 and k.sorted_1d:
            line = k.coords[:, 0]
            c0 = line[center]
            lo = np.searchsorted(line, c0 - (radius - tol), side="right")
            hi = np.searchsorted(line, c0 + (radius - tol), side="left")
            return np.arange(lo, max(lo, hi))
        return np.flatnonzero(self.row(center) < radius - tol)

    def diameter(self) -> float:
        if self.size <= 1:
            return 0.0
        return self._kernel.max_pair()[2]

    def _derived(self, fn, tag):
        return MetricSpace(_MappedKernel(self._kernel, fn), self.size, tag,
                           labels=self._labels,
                           truncation_radius=None if self.truncation_radius is None
                           else float(fn(self.truncation_radius)))


@dataclass(frozen=True)
class PointedSpace:
    space: MetricSpace
    basepoint: int = 0

    def __post_init__(self):
        if not 0 <= self.basepoint < self.space.size:
            raise DomainError(f"basepoint {self.basepoint} not in space of size {self.space.size}")

    @cached_property
    def norms(self) -> np.ndarray:
        """``|x| = dist(x, basepoint)`` for every point."""
        return self.space.row(self.basepoint)

    def norm(self, i: int) -> float:
        return float(self.norms[i])

    @property
    def truncation_radius(self) -> float:
        return float(self.norms.max())

    def __len__(self):
        return self.space.size


@dataclass(frozen=True)
class PointMap:
    source: MetricSpace
    target: MetricSpace
    assignment: tuple

    def __post_init__(self):
        if len(self.assignment) != self.source.size:
            raise DomainError("assignment must be total on the source points")
        object.__setattr__(self, "assignment", tuple(int(a) for a in self.assignment))


# validation ---------------------------------------------------------------

def metric_violation(table, tol: float = TOL, check_triangle: bool = True) -> Optional[str]:
    """Return a description of the first metric-axiom violation, or None."""
    d = np.asarray(table, dtype=float)
    if d.ndim != 2 or d.shape[0] != d.shape[1]:
        return f"distance table must be square, got shape {d.shape}"
    n = d.shape[0]
    if n == 0:
        return "a metric space needs at least one point"
    if not np.all(np.isfinite(d)):
        i, j = np.argwhere(~np.isfinite(d))[0]
        return f"non-finite distance at ({i}, {j})"
    if np.any(d < -tol):
        i, j = np.argwhere(d < -tol)[0]
        return f"negative distance {d[i, j]} at ({i}, {j})"
    if np.any(np.abs(np.diag(d)) > tol):
        i = int(np.argmax(np.abs(np.diag(d))))
        return f"dist({i}, {i}) = {d[i, i]} is not zero"
    asym = np.abs(d - d.T)
    if np.any(asym > tol):
        i, j = np.argwhere(asym > tol)[0]
        return f"asymmetric pair ({i}, {j}): {d[i, j]} vs {d[j, i]}"
    off = d + np.eye(n) * (tol + 1.0)
    if np.any(off <= tol):
        i, j = np.argwhere(off <= tol)[0]
        return f"distinct points {i} and {j} at distance zero"
    if check_triangle:
        for k in range(n):
            via = d[:, k][:, None] + d[k][None, :]
            bad = d > via + tol
            if bad.any():
                i, j = np.argwhere(bad)[0]
                return (f"triangle inequality fails: d({i},{j})={d[i, j]} > "
                        f"d({i},{k})+d({k},{j})={via[i, j]}")
    return None


def _check_budget(n, budget):
    if n > budget:
        raise BudgetExceeded(f"space would have {n} points, over the point budget {budget}",
                             budget=budget, requested=n)


# generators ---------------------------------------------------------------

def build_grid(n: int, side: int, norm: str = "L1", budget: int = DEFAULT_POINT_BUDGET,
               offset: int = 0) -> MetricSpace:
    """The integer box ``{offset..offset+side-1}^n`` under an L1, L2 or Linf norm."""
    if n not in (1, 2, 3):
        raise DomainError(f"grid dimension must be 1, 2 or 3, got {n}")
    if side < 1:
        raise DomainError(f"grid side must be positive, got {side}")
    norm = _canonical_norm(norm)
    _check_budget(side ** n, budget)
    axes = [np.arange(side, dtype=np.int64) + offset] * n
    coords = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, n)
    if n == 1:
        labels = lambda i: str(int(coords[i, 0]))  # noqa: E731
    else:
        labels = lambda i: "(" + ",".join(str(int(v)) for v in coords[i]) + ")"  # noqa: E731
    kernel = _LatticeKernel(coords, norm)
    space = MetricSpace(kernel, coords.shape[0], "grid", labels=labels)
    space.truncation_radius = space.diameter()
    return space


def build_interval(lo: int, hi: int, budget: int = DEFAULT_POINT_BUDGET,
                   basepoint_value: Optional[int] = None) -> PointedSpace:
    """``{lo..hi}`` in Z with ``|a-b|``, pointed at ``basepoint_value`` (default: 0 or lo)."""
    if hi < lo:
        raise DomainError("empty interval")
    space = build_grid(1, hi - lo + 1, "L1", budget=budget, offset=lo)
    if basepoint_value is None:
        basepoint_value = 0 if lo <= 0 <= hi else lo
    if not lo <= basepoint_value <= hi:
        raise DomainError(f"basepoint {basepoint_value} outside [{lo}, {hi}]")
    return PointedSpace(space, basepoint_value - lo)


def _canonical_norm(norm):
    key = str(norm).lower().replace("_", "")
    table = {"l1": "L1", "l2": "L2", "linf": "Linf", "inf": "Linf", "sup": "Linf"}
    if key not in table:
        raise DomainError(f"unsupported norm {norm!r}; expected one of {NORMS}")
    return table[key]


def _free_letters(rank):
    if rank > 26:
        raise DomainError("free groups of rank above 26 are not supported")
    lower = [chr(ord("a") + i) for i in range(rank)]
    return lower + [c.upper() for c in lower]


def _inverse_letter(c):
    return c.lower() if c.isupper() else c.upper()


def build_cayley_ball(group: str, rank: int, radius: int,
                      budget: int = DEFAULT_POINT_BUDGET) -> PointedSpace:
    """Ball of word length ``<= radius`` in Z^rank or the free group F_rank.

    Elements are enumerated breadth-first from the identity using canonical
    normal forms (integer vectors, resp. freely reduced words).  Distances are
    graph distances in the Cayley graph induced on the ball; for these two
    groups geodesics between ball elements never leave the ball, so this is
    the word metric restricted to the ball.
    """
    if rank < 1:
        raise DomainError(f"rank must be at least 1, got {rank}")
    if radius < 1:
        raise DomainError(f"radius must be positive, got {radius}")
    key = group.lower().replace("_", "-")
    if key in ("free-abelian", "abelian", "z"):
        gens = []
        for i in range(rank):
            for s in (1, -1):
                g = [0] * rank
                g[i] = s
                gens.append(tuple(g))
        identity = (0,) * rank

        def step(elem, g):
            return tuple(a + b for a, b in zip(elem, g))

        def label(elem):
            return str(elem[0]) if rank == 1 else "(" + ",".join(map(str, elem)) + ")"
        tag = "cayley-ball(free-abelian)"
    elif key in ("free", "f"):
        gens = _free_letters(rank)
        identity = ""

        def step(word, letter):
            if word and word[-1] == _inverse_letter(letter):
                return word[:-1]
            return word + letter

        def label(word):
            return word or "e"
        tag = "cayley-ball(free)"
    else:
        raise DomainError(f"unsupported group {group!r}; expected 'free-abelian' or 'free'")

    index = {identity: 0}
    elements = [identity]
    depth = [0]
    edges = []
    queue = deque([identity])
    while queue:
        elem = queue.popleft()
        i = index[elem]
        for g in gens:
            nxt = step(elem, g)
            if nxt not in index:
                if depth[i] + 1 > radius:
                    continue
                index[nxt] = len(elements)
                elements.append(nxt)
                depth.append(depth[i] + 1)
                _check_budget(len(elements), budget)
                queue.append(nxt)
            edges.append((i, index[nxt]))
    n = len(elements)
    rows, cols = zip(*edges) if edges else ((), ())
    graph = csr_matrix((np.ones(len(rows)), (rows, cols)), shape=(n, n))
    table = shortest_path(graph, method="D", unweighted=True, directed=False)
    labels = tuple(label(e) for e in elements)
    space = MetricSpace(_DenseKernel(table), n, tag, labels=labels,
                        truncation_radius=float(radius))
    return PointedSpace(space, 0)


def regular_tree_parents(branching: int, depth: int) -> list:
    """Parent list of the rooted tree with given branching and depth (root parent -1)."""
    if branching < 1 or depth < 0:
        raise DomainError("branching must be >= 1 and depth >= 0")
    parents = [-1]
    frontier = [0]
    for _ in range(depth):
        nxt = []
        for p in frontier:
            for _ in range(branching):
                parents.append(p)
                nxt.append(len(parents) - 1)
        frontier = nxt
    return parents


def build_tree(parents: Sequence[int], weights: Optional[Sequence[float]] = None,
               budget: int = DEFAULT_POINT_BUDGET) -> MetricSpace:
    """Path metric of a weighted rooted tree given by a parent list."""
    n = len(parents)
    _check_budget(n, budget)
    roots = [i for i, p in enumerate(parents) if p < 0]
    if len(roots) != 1:
        raise DomainError(f"a tree needs exactly one root, found {len(roots)}")
    if weights is None:
        weights = [1.0] * n
    if len(weights) != n:
        raise DomainError("weights must have one entry per node (root entry ignored)")
    rows, cols, vals = [], [], []
    for i, p in enumerate(parents):
        if p < 0:
            continue
        if not 0 <= p < n or p == i:
            raise DomainError(f"node {i} has invalid parent {p}")
        w = float(weights[i])
        if not w > 0:
            raise DomainError(f"edge weight at node {i} must be positive")
        rows.append(i)
        cols.append(p)
        vals.append(w)
    graph = csr_matrix((vals, (rows, cols)), shape=(n, n))
    if connected_components(graph, directed=False)[0] != 1:
        raise DomainError("parent list does not describe a connected tree")
    table = shortest_path(graph, method="D", directed=False)
    space = MetricSpace(_DenseKernel(table), n, "tree")
    space.truncation_radius = space.diameter()
    return space


# remetrization --------------------------------------------------------------

def log_remetrize(space):
    """``d -> ln(1 + d)``; accepts a MetricSpace or a PointedSpace."""
    if isinstance(space, PointedSpace):
        return PointedSpace(log_remetrize(space.space), space.basepoint)
    return space._derived(np.log1p, f"remetrized({space.generator_tag})")


def inverse_remetrize(space):
    """``d -> e^d - 1``; raises OutOfRangeError when a distance overflows."""
    if isinstance(space, PointedSpace):
        return PointedSpace(inverse_remetrize(space.space), space.basepoint)
    if space.size > 1:
        i, j, dmax = space._kernel.max_pair()
        if dmax >= _EXPM1_LIMIT:
            raise OutOfRangeError(
                f"e^d - 1 overflows for pair ({i}, {j}) with d = {dmax!r}")
    return space._derived(np.expm1, f"inverse-remetrized({space.generator_tag})")


# predicates -----------------------------------------------------------------

def is_M_connected(space, M: float) -> bool:
    """True iff every two points are joined by a chain with steps ``<= M``."""
    if not M > 0:
        raise DomainError(f"M must be positive, got {M}")
    if isinstance(space, PointedSpace):
        space = space.space
    n = space.size
    seen = np.zeros(n, dtype=bool)
    seen[0] = True
    stack = [0]
    while stack:
        i = stack.pop()
        fresh = np.flatnonzero((space.row(i) <= M) & ~seen)
        seen[fresh] = True
        stack.extend(fresh.tolist())
    return bool(seen.all())


def is_isometry(pmap: PointMap, tol: float = TOL) -> bool:
    """True iff ``pmap`` is a distance-preserving bijection."""
    src, tgt, a = pmap.source, pmap.target, np.asarray(pmap.assignment, dtype=np.int64)
    if src.size != tgt.size:
        raise DomainError("isometry check needs equal point counts")
    if a.size and (a.min() < 0 or a.max() >= tgt.size):
        return False
    if len(set(a.tolist())) != a.size:
        return False
    for i in range(src.size):
        if np.any(np.abs(tgt.row(int(a[i]))[a] - src.row(i)) > tol):
            return False
    return True


def identity_map(space: MetricSpace) -> PointMap:
    return PointMap(space, space, tuple(range(space.size)))


def transport_map(pmap: PointMap, source: MetricSpace, target: MetricSpace) -> PointMap:
    """The same point assignment viewed between two other spaces on the same ids."""
    return PointMap(source, target, pmap.assignment)
