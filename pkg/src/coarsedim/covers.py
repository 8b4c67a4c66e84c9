"""Cover families at a scale pair (r, D): predicates, validation and solvers.

A family is r-disjoint when distinct pieces are at distance strictly
greater than r, and D-bounded when every piece has diameter at most D.
Solvers count the least number of r-disjoint, D-bounded families whose
union covers the space.  Both solvers produce disjoint pieces; on a finite
space any cover refines to such a partition without losing either property.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence, Tuple

import numpy as np

from .coloring import COLOR_LIMIT, chromatic_number, greedy_coloring
from .errors import BudgetExceeded, DomainError
from .metric_core import TOL, MetricSpace, PointedSpace, build_interval

EXHAUSTIVE_BUDGET = 12
_CHUNK = 512

Piece = Tuple[int, ...]


@dataclass(frozen=True)
class Linear:
    """Bound ``c * r`` (Assouad-Nagata type)."""

    c: float

    def bound(self, r: float) -> float:
        return self.c * r

    def describe(self):
        return f"linear(c={self.c:.12g})"


@dataclass(frozen=True)
class Power:
    """Bound ``r ** alpha`` (power type); only meaningful for r > 1."""

    alpha: float

    def bound(self, r: float) -> float:
        return r ** self.alpha

    def describe(self):
        return f"power(alpha={self.alpha:.12g})"


def _space_of(space):
    return space.space if isinstance(space, PointedSpace) else space


def _piece(members) -> Piece:
    p = tuple(sorted({int(m) for m in members}))
    if not p:
        raise DomainError("pieces must be nonempty")
    return p


@dataclass(frozen=True)
class CoverFamilySet:
    space: MetricSpace
    families: Tuple[Tuple[Piece, ...], ...]
    claimed_r: float
    claimed_bound: float

    def __post_init__(self):
        space = _space_of(self.space)
        object.__setattr__(self, "space", space)
        fams = tuple(tuple(_piece(p) for p in fam) for fam in self.families)
        if not fams:
            raise DomainError("a cover family set needs at least one family")
        for fam in fams:
            for p in fam:
                if p[0] < 0 or p[-1] >= space.size:
                    raise DomainError(f"piece {p[:5]}... has points outside the space")
        object.__setattr__(self, "families", fams)

    @property
    def family_count(self) -> int:
        return len(self.families)

    def relabel(self, space, claimed_r, claimed_bound) -> "CoverFamilySet":
        """The same pieces reinterpreted over another metric on the same points."""
        return CoverFamilySet(space, self.families, claimed_r, claimed_bound)


# predicates -------------------------------------------------------------------

def piece_diam(space, piece) -> float:
    space = _space_of(space)
    idx = np.asarray(sorted(set(piece)), dtype=np.int64)
    if idx.size == 0:
        raise DomainError("diameter of an empty piece is undefined")
    if idx.size == 1:
        return 0.0
    best = 0.0
    for start in range(0, idx.size, _CHUNK):
        best = max(best, float(space.block(idx[start:start + _CHUNK], idx).max()))
    return best


def _distance_to_piece(space, piece) -> np.ndarray:
    """For every point, the distance to the nearest member of ``piece``."""
    idx = np.asarray(piece, dtype=np.int64)
    out = np.full(space.size, np.inf)
    allpts = np.arange(space.size)
    for start in range(0, idx.size, _CHUNK):
        out = np.minimum(out, space.block(idx[start:start + _CHUNK], allpts).min(axis=0))
    return out


def min_cross_distance(space, a, b) -> float:
    space = _space_of(space)
    a = np.asarray(sorted(set(a)), dtype=np.int64)
    b = np.asarray(sorted(set(b)), dtype=np.int64)
    return float(_distance_to_piece(space, a)[b].min())


def is_D_bounded(space, family, D: float, tol: float = TOL) -> bool:
    if D < 0:
        raise DomainError(f"D must be nonnegative, got {D}")
    return all(piece_diam(space, p) <= D + tol for p in family)


def _first_close_pair(space, family, r):
    """First (i, j, distance) of distinct pieces at distance <= r, else None."""
    pieces = [np.asarray(sorted(set(p)), dtype=np.int64) for p in family]
    for i, p in enumerate(pieces[:-1]):
        near = _distance_to_piece(space, p)
        for j in range(i + 1, len(pieces)):
            d = float(near[pieces[j]].min())
            if not d > r:
                return i, j, d
    return None


def is_r_disjoint(space, family, r: float) -> bool:
    """Distinct pieces strictly more than ``r`` apart (overlap counts as distance 0)."""
    if r < 0:
        raise DomainError(f"r must be nonnegative, got {r}")
    return _first_close_pair(_space_of(space), list(family), r) is None


# validation --------------------------------------------------------------------

@dataclass
class CoverReport:
    r: float
    bound: float
    family_count: int
    covering: bool
    disjoint: bool
    bounded: bool
    uncovered_point: Optional[int] = None
    disjoint_witness: Optional[dict] = None
    bounded_witness: Optional[dict] = None

    @property
    def passed(self) -> bool:
        return self.covering and self.disjoint and self.bounded

    def to_dict(self) -> dict:
        return {
            "r": self.r, "bound": self.bound, "family_count": self.family_count,
            "covering": self.covering, "disjoint": self.disjoint, "bounded": self.bounded,
            "passed": self.passed, "uncovered_point": self.uncovered_point,
            "disjoint_witness": self.disjoint_witness, "bounded_witness": self.bounded_witness,
        }


def check_cover(coverset: CoverFamilySet, r: Optional[float] = None,
                bound: Optional[float] = None, tol: float = TOL) -> CoverReport:
    """Check covering, r-disjointness and bound at given (default: claimed) values."""
    space = coverset.space
    r = coverset.claimed_r if r is None else r
    bound = coverset.claimed_bound if bound is None else bound
    covered = np.zeros(space.size, dtype=bool)
    for fam in coverset.families:
        for p in fam:
            covered[list(p)] = True
    report = CoverReport(r=r, bound=bound, family_count=coverset.family_count,
                         covering=bool(covered.all()), disjoint=True, bounded=True)
    if not report.covering:
        report.uncovered_point = int(np.flatnonzero(~covered)[0])
    for f, fam in enumerate(coverset.families):
        if report.disjoint:
            hit = _first_close_pair(space, list(fam), r)
            if hit is not None:
                report.disjoint = False
                report.disjoint_witness = {"family": f, "pieces": [hit[0], hit[1]],
                                           "distance": hit[2]}
        if report.bounded:
            for k, p in enumerate(fam):
                d = piece_diam(space, p)
                if d > bound + tol:
                    report.bounded = False
                    report.bounded_witness = {"family": f, "piece": k, "diameter": d}
                    break
    return report


def validate(coverset: CoverFamilySet, bound_kind) -> CoverReport:
    """Check a cover against ``Linear(c)`` (bound c*r) or ``Power(alpha)`` (bound r^alpha)."""
    r = coverset.claimed_r
    if not r > 0:
        raise DomainError(f"claimed r must be positive, got {r}")
    if isinstance(bound_kind, Power) and not r > 1:
        raise DomainError(f"power bounds are only validated for r > 1, got r = {r}")
    return check_cover(coverset, r=r, bound=bound_kind.bound(r))


# a witness on Z -------------------------------------------------------------------

def interval_witness_Z(half_length: int, alpha: float, r: float,
                       space: Optional[MetricSpace] = None) -> CoverFamilySet:
    """Two families of alternating blocks of length floor(r)+1 on {-N..N}.

    Blocks have diameter floor(r) <= r <= r**alpha and same-family blocks are
    floor(r)+2 > r apart, so the pair witnesses asdim_P Z <= 1 at scale r.
    """
    N = int(half_length)
    if N < 1:
        raise DomainError(f"half length must be a positive integer, got {half_length}")
    if not r > 1:
        raise DomainError(f"interval witness needs r > 1, got {r}")
    if not alpha >= 1:
        raise DomainError(f"interval witness needs alpha >= 1, got {alpha}")
    if space is None:
        space = build_interval(-N, N).space
    space = _space_of(space)
    if space.size != 2 * N + 1:
        raise DomainError("space does not match the interval {-N..N}")
    L = math.floor(r) + 1
    values = np.arange(-N, N + 1)
    blocks = np.floor_divide(values, L)
    families = ([], [])
    for b in np.unique(blocks):
        members = np.flatnonzero(blocks == b)
        families[int(b) % 2].append(tuple(members.tolist()))
    return CoverFamilySet(space, (tuple(families[0]), tuple(families[1])),
                          claimed_r=float(r), claimed_bound=float(r) ** alpha)


# exact solver -----------------------------------------------------------------------

def _exact_search(table, r, D, tol=TOL):
    """Least k with a k-coloring of the points whose color classes split into
    r-proximity components of diameter <= D.  Returns (k, classes-as-pieces).

    Within one family, points at distance <= r must share a piece, so the
    coarsest admissible pieces of a color class are exactly its r-components;
    diameters only grow as points are added, which makes pruning exact.
    """
    n = table.shape[0]
    near = table <= r
    order = sorted(range(n), key=lambda v: (-int(near[v].sum()), v))

    def place(comps, p):
        touching = [c for c in comps if near[p, list(c)].any()]
        merged = [p] + [q for c in touching for q in c]
        if len(merged) > 1 and table[np.ix_(merged, merged)].max() > D + tol:
            return None
        rest = [c for c in comps if c not in touching]
        return rest + [tuple(sorted(merged))]

    for k in range(1, n + 1):
        classes = []

        def search(pos):
            if pos == n:
                return True
            p = order[pos]
            for ci in range(len(classes)):
                new = place(classes[ci], p)
                if new is None:
                    continue
                old = classes[ci]
                classes[ci] = new
                if search(pos + 1):
                    return True
                classes[ci] = old
            if len(classes) < k:
                classes.append([(p,)])
                if search(pos + 1):
                    return True
                classes.pop()
            return False

        if search(0):
            return k, [tuple(c) for c in classes]
    raise AssertionError("n singleton classes always succeed")


def _conflict_graph(space, pieces, r):
    m = len(pieces)
    adj = np.zeros((m, m), dtype=bool)
    arrays = [np.asarray(p, dtype=np.int64) for p in pieces]
    for i in range(m - 1):
        near = _distance_to_piece(space, arrays[i])
        for j in range(i + 1, m):
            if not near[arrays[j]].min() > r:
                adj[i, j] = adj[j, i] = True
    return adj


def _families_from_colors(pieces, colors):
    k = max(colors) + 1 if colors else 0
    return tuple(tuple(p for p, c in zip(pieces, colors) if c == i) for i in range(k))


def exact_cover(space, r: float, D: float, budget: int = EXHAUSTIVE_BUDGET,
                pieces: Optional[Sequence[Iterable[int]]] = None,
                color_limit: int = COLOR_LIMIT) -> CoverFamilySet:
    """A cover realising :func:`min_families_exact`."""
    space = _space_of(space)
    if r < 0 or D < 0:
        raise DomainError("r and D must be nonnegative")
    if pieces is not None:
        pieces = [_piece(p) for p in pieces]
        seen = sorted(q for p in pieces for q in p)
        if seen != list(range(space.size)):
            raise DomainError("supplied pieces must partition the point set")
        for p in pieces:
            if piece_diam(space, p) > D + TOL:
                raise DomainError(f"supplied piece {p[:5]} is not {D:g}-bounded")
        _, colors = chromatic_number(_conflict_graph(space, pieces, r), limit=color_limit)
        return CoverFamilySet(space, _families_from_colors(pieces, colors), r, D)
    if space.size > budget:
        raise BudgetExceeded(
            f"exhaustive search limited to {budget} points, space has {space.size}",
            budget=budget, requested=space.size)
    _, classes = _exact_search(space.table(), r, D)
    return CoverFamilySet(space, tuple(tuple(c) for c in classes), r, D)


def min_families_exact(space, r: float, D: float, budget: int = EXHAUSTIVE_BUDGET,
                       pieces=None, color_limit: int = COLOR_LIMIT) -> int:
    """Exact least number of r-disjoint D-bounded families covering the space.

    Without ``pieces`` the search is exhaustive and refuses spaces above
    ``budget`` points.  With ``pieces`` (a D-bounded partition) the answer is
    the exact chromatic number of their conflict graph.
    """
    return exact_cover(space, r, D, budget=budget, pieces=pieces,
                       color_limit=color_limit).family_count


# greedy solver ----------------------------------------------------------------------

def carve_pieces(space, D: float, seed: int = 0, tol: float = TOL) -> list:
    """Ball carving: each uncovered seed absorbs uncovered points within D/2."""
    space = _space_of(space)
    n = space.size
    order = np.arange(n) if seed == 0 else np.random.default_rng(seed).permutation(n)
    uncovered = np.ones(n, dtype=bool)
    pieces = []
    for p in order:
        if not uncovered[p]:
            continue
        members = np.flatnonzero(uncovered & (space.row(int(p)) <= D / 2 + tol))
        uncovered[members] = False
        pieces.append(tuple(members.tolist()))
    return pieces


def min_families_greedy(space, r: float, D: float, seed: int = 0) -> CoverFamilySet:
    """Upper-bound cover from ball carving plus largest-degree-first coloring.

    ``seed = 0`` carves in index order; other seeds carve in a seeded
    random order.  The output is always checked before it is returned.
    """
    space = _space_of(space)
    if r < 0 or D < 0:
        raise DomainError("r and D must be nonnegative")
    pieces = carve_pieces(space, D, seed=seed)
    colors = greedy_coloring(_conflict_graph(space, pieces, r))
    cover = CoverFamilySet(space, _families_from_colors(pieces, colors), r, D)
    report = check_cover(cover)
    if not report.passed:
        raise AssertionError(f"greedy cover failed its own check: {report.to_dict()}")
    return cover


# scale profile ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ScaleVerdict:
    r: float
    D: float
    min_families_exact: Optional[int]
    greedy_families: int
    method: str

    def __post_init__(self):
        if self.min_families_exact is not None and self.min_families_exact > self.greedy_families:
            raise ValueError("exact count cannot exceed the greedy count")

    @property
    def families(self) -> int:
        return self.min_families_exact if self.min_families_exact is not None else self.greedy_families


@dataclass(frozen=True)
class DimensionProfile:
    verdicts: Tuple[ScaleVerdict, ...]
    bound_kind: object = field(default=None)

    def __iter__(self):
        return iter(self.verdicts)

    def __len__(self):
        return len(self.verdicts)

    def __getitem__(self, i):
        return self.verdicts[i]

    @property
    def counts(self) -> list:
        return [v.families for v in self.verdicts]

    @property
    def monotone(self) -> bool:
        """Whether counts are nonincreasing along the r list (reported only)."""
        c = self.counts
        return all(b <= a for a, b in zip(c, c[1:]))


def dimension_profile(space, r_list: Sequence[float], bound_kind,
                      exact_budget: int = EXHAUSTIVE_BUDGET, seed: int = 0) -> DimensionProfile:
    """Family counts at each r with D given by the bound kind."""
    space = _space_of(space)
    r_list = [float(r) for r in r_list]
    if any(r <= 0 for r in r_list) or any(b <= a for a, b in zip(r_list, r_list[1:])):
        raise DomainError("r_list must be positive and strictly increasing")
    out = []
    for r in r_list:
        D = bound_kind.bound(r)
        greedy = min_families_greedy(space, r, D, seed=seed).family_count
        exact = None
        if space.size <= exact_budget:
            exact = min_families_exact(space, r, D, budget=exact_budget)
        out.append(ScaleVerdict(r, D, exact, greedy,
                                "exhaustive" if exact is not None else "greedy"))
    return DimensionProfile(tuple(out), bound_kind)
