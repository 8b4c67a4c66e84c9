"""Finite-window estimates of Higson subpower / sublinear behaviour.

A bounded function f on a pointed space is Higson subpower (sublinear) when
its oscillation over the open ball of radius p(|x|) around x tends to zero
for every subpower (sublinear) scale function p.  On a finite truncation we
measure the worst oscillation per geometric annulus of |x| and ask whether
the tail of that profile is small compared to its head.  Every verdict is
an estimate over the observed window, never a statement about the algebra.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence

import numpy as np
from scipy.spatial import ConvexHull
from scipy.spatial.distance import pdist

from .errors import DomainError, PreconditionError, WindowTooSmall
from .metric_core import TOL, PointedSpace, log_remetrize
from .scale_functions import (UNKNOWN, YES, ScaleFunction, classify, mono, numeric_check,
                              psi_backward, psi_forward, to_text)

ANNULUS_COUNT = 12
MAX_CENTERS = 64
RATIO_THRESHOLD = 0.3
TAIL_FRACTION = 0.25
NON_DECAY_RATIO = 0.9

DECAYING, NON_DECAYING, INCONCLUSIVE = "decaying", "non-decaying", "inconclusive"

SUBPOWER_BATTERY = (mono(1, 0, 0), mono(1, 0, 1), mono(1, 0, 2))
# x/2 is linear, not sublinear, so it is not part of the default battery
SUBLINEAR_BATTERY = (mono(1, 0, 0), mono(1, 0, 1), mono(1, 0.5, 0), mono(1, 1, -1))


@dataclass(frozen=True)
class ObservedFunction:
    values: np.ndarray
    description: Optional[str] = None

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim == 1:
            v = v[:, None]
        if v.ndim != 2 or v.shape[1] < 1:
            raise DomainError("values must be a vector or an (N, m) array")
        if not np.all(np.isfinite(v)):
            raise DomainError("observed functions must be bounded (all values finite)")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @classmethod
    def of_norm(cls, space: PointedSpace, fn: Callable, description: Optional[str] = None):
        """``x -> fn(|x|)`` evaluated on every point."""
        return cls(np.asarray(fn(space.norms), dtype=float), description)

    @property
    def sup_norm(self) -> float:
        return float(np.abs(self.values).max())

    def __add__(self, other):
        return ObservedFunction(self.values + other.values,
                                f"({self.description}) + ({other.description})")

    def __mul__(self, other):
        return ObservedFunction(self.values * other.values,
                                f"({self.description}) * ({other.description})")


def _metric(space):
    return space.space if isinstance(space, PointedSpace) else space


def ball(space, center: int, radius: float, tol: float = TOL) -> np.ndarray:
    """Open ball ``{y : d(y, center) < radius}`` as sorted point indices."""
    space = _metric(space)
    if not 0 <= center < space.size:
        raise DomainError(f"center {center} not in the space")
    return space.ball_indices(int(center), float(radius), tol=tol)


def value_diameter(values: np.ndarray) -> float:
    """Euclidean diameter of a set of value vectors."""
    if values.shape[0] <= 1:
        return 0.0
    if values.shape[1] == 1:
        col = values[:, 0]
        return float(col.max() - col.min())
    pts = np.unique(values, axis=0)
    if pts.shape[0] > 2000 and pts.shape[1] <= 3:
        try:
            pts = pts[ConvexHull(pts).vertices]
        except Exception:  # degenerate hulls (collinear values) fall back to all points
            pass
    return float(pdist(pts).max()) if pts.shape[0] > 1 else 0.0


def _radius(p: ScaleFunction, t: float) -> float:
    r = float(p(np.asarray(t, dtype=float)))
    if not math.isfinite(r) or r < 0:
        raise DomainError(f"scale function {to_text(p)} is not usable at |x| = {t:g}")
    return r


def local_oscillation(space: PointedSpace, f: ObservedFunction, x: int, p: ScaleFunction) -> float:
    """Diameter of f over the open ball of radius p(|x|) around x."""
    members = ball(space, x, _radius(p, space.norm(x)))
    return value_diameter(f.values[members])


@dataclass(frozen=True)
class Annulus:
    r_lo: float
    r_hi: float
    worst_oscillation: float
    witness_point: int
    excluded: int
    evaluated: int


@dataclass
class HigsonProfile:
    annuli: List[Annulus]
    scale_function: ScaleFunction
    mode: Optional[str] = None
    dropped_annuli: int = 0

    @property
    def oscillations(self) -> np.ndarray:
        return np.array([a.worst_oscillation for a in self.annuli])

    @property
    def excluded(self) -> int:
        return sum(a.excluded for a in self.annuli)


def _pick_centers(points, limit):
    if limit is None or points.size <= limit:
        return points
    return points[np.unique(np.linspace(0, points.size - 1, limit).round().astype(int))]


def higson_profile(space: PointedSpace, f: ObservedFunction, p: ScaleFunction,
                   annulus_count: int = ANNULUS_COUNT, max_centers: Optional[int] = MAX_CENTERS,
                   mode: Optional[str] = None) -> HigsonProfile:
    """Worst local oscillation per geometric annulus of |x|.

    Points whose ball could reach past the truncation (``|x| + p(|x|)``
    beyond the largest norm) are excluded and counted.  Annuli with more
    than ``max_centers`` admissible points are evaluated at that many
    centers spread evenly in |x|; ``max_centers=None`` evaluates all.
    """
    if annulus_count < 2:
        raise DomainError("a profile needs at least two annuli")
    if f.values.shape[0] != space.space.size:
        raise DomainError("observed function and space have different point counts")
    norms = space.norms
    positive = norms[norms > 0]
    if positive.size == 0:
        raise WindowTooSmall("no point with |x| > 0")
    R = float(norms.max())
    lo = float(positive.min())
    if R <= lo:
        raise WindowTooSmall("all points lie on a single sphere around the basepoint")
    edges = np.geomspace(lo, R, annulus_count + 1)
    order = np.argsort(norms, kind="stable")
    sorted_norms = norms[order]
    radii_all = np.asarray(p(sorted_norms), dtype=float)
    annuli, dropped = [], 0
    for k in range(annulus_count):
        a = np.searchsorted(sorted_norms, edges[k], side="left")
        b = np.searchsorted(sorted_norms, edges[k + 1],
                            side="right" if k == annulus_count - 1 else "left")
        pts = order[a:b]
        radii = radii_all[a:b]
        ok = np.isfinite(radii) & (sorted_norms[a:b] + radii <= R + TOL)
        admissible = pts[ok]
        if admissible.size == 0:
            dropped += 1
            continue
        centers = _pick_centers(admissible, max_centers)
        worst, witness = -1.0, int(centers[0])
        for x in centers:
            osc = local_oscillation(space, f, int(x), p)
            if osc > worst:
                worst, witness = osc, int(x)
        annuli.append(Annulus(float(edges[k]), float(edges[k + 1]), worst, witness,
                              int(pts.size - admissible.size), int(centers.size)))
    if not annuli:
        raise WindowTooSmall(f"every annulus is boundary-contaminated for p = {to_text(p)}")
    return HigsonProfile(annuli, p, mode, dropped)


def decay_verdict(profile, ratio_threshold: float = RATIO_THRESHOLD,
                  tail_fraction: float = TAIL_FRACTION) -> str:
    """Compare the last ``tail_fraction`` of annuli against the rest."""
    osc = profile.oscillations if isinstance(profile, HigsonProfile) else np.asarray(profile, float)
    if osc.size == 0:
        raise DomainError("empty profile")
    if not 0 < ratio_threshold < 1 or not 0 < tail_fraction < 1:
        raise DomainError("ratio_threshold and tail_fraction must lie in (0, 1)")
    if osc.max() == 0:
        return DECAYING
    n_tail = max(1, int(math.ceil(tail_fraction * osc.size - 1e-12)))
    if n_tail >= osc.size:
        return INCONCLUSIVE
    head, tail = osc[:-n_tail].max(), osc[-n_tail:].max()
    if tail <= ratio_threshold * head:
        return DECAYING
    if tail >= NON_DECAY_RATIO * head:
        return NON_DECAYING
    return INCONCLUSIVE


# membership -----------------------------------------------------------------------

@dataclass
class BatteryEntry:
    function: str
    verdict: str
    profile: HigsonProfile = field(repr=False)


@dataclass
class MembershipReport:
    mode: str
    entries: List[BatteryEntry]

    @property
    def in_algebra(self) -> bool:
        return all(e.verdict == DECAYING for e in self.entries)

    @property
    def witness(self) -> Optional[str]:
        """First battery member whose profile does not decay."""
        for e in self.entries:
            if e.verdict != DECAYING:
                return e.function
        return None

    def summary(self) -> str:
        alg = "CB_P" if self.mode == "subpower" else "CB_L"
        if self.in_algebra:
            return f"in {alg} (window)"
        return f"not in {alg} (window); witness p = {self.witness}"


def default_battery(mode: str):
    if mode == "subpower":
        return SUBPOWER_BATTERY
    if mode == "sublinear":
        return SUBLINEAR_BATTERY
    raise DomainError(f"mode must be 'subpower' or 'sublinear', got {mode!r}")


def check_battery(mode: str, test_functions, horizon: float = 1e6):
    """Raise PreconditionError unless every test function matches the mode."""
    for p in test_functions:
        verdict = classify(p).verdict(mode)
        if verdict == UNKNOWN:
            verdict = numeric_check(p, mode, horizon,
                                    grid=(1.0, 0.5) if mode == "subpower" else (2.0, 1.0, 0.5)).verdict(mode)
        if verdict != YES:
            raise PreconditionError(f"test function {to_text(p)} is not asymptotically {mode} "
                                    f"(classified {verdict})")


def membership_estimate(space: PointedSpace, f: ObservedFunction, mode: str,
                        test_functions: Optional[Sequence[ScaleFunction]] = None,
                        annulus_count: int = ANNULUS_COUNT,
                        max_centers: Optional[int] = MAX_CENTERS,
                        ratio_threshold: float = RATIO_THRESHOLD,
                        tail_fraction: float = TAIL_FRACTION) -> MembershipReport:
    """Profile f against every test function; in the algebra iff all decay."""
    battery = tuple(default_battery(mode) if test_functions is None else test_functions)
    check_battery(mode, battery)
    entries = []
    for p in battery:
        prof = higson_profile(space, f, p, annulus_count, max_centers, mode=f"{mode}-test")
        entries.append(BatteryEntry(to_text(p), decay_verdict(prof, ratio_threshold, tail_fraction),
                                    prof))
    return MembershipReport(mode, entries)


# the CB_P(X) = CB_L(X') cross-check -------------------------------------------------------

@dataclass
class CrosscheckReport:
    subpower_on_X: MembershipReport
    sublinear_on_Xprime: MembershipReport
    ball_identity_checked: int = 0
    ball_inclusion_checked: int = 0
    violations: List[dict] = field(default_factory=list)
    notes: List[str] = field(default_factory=list)

    @property
    def agreement(self) -> bool:
        return self.subpower_on_X.in_algebra == self.sublinear_on_Xprime.in_algebra

    @property
    def passed(self) -> bool:
        return self.agreement and not self.violations


def _sample_centers(space: PointedSpace, count, seed, eligible=None):
    idx = np.flatnonzero(space.norms > 0) if eligible is None else np.asarray(eligible)
    if idx.size <= count:
        return idx
    return np.sort(np.random.default_rng(seed).choice(idx, size=count, replace=False))


def ball_identity_violations(space: PointedSpace, phi: ScaleFunction, centers,
                             space_prime: Optional[PointedSpace] = None) -> list:
    """Centers where the rho'-ball of radius phi(|x|') differs from the
    rho-ball of radius psi_forward(phi)(|x|)."""
    space_prime = log_remetrize(space) if space_prime is None else space_prime
    psi = psi_forward(phi)
    bad = []
    for x in centers:
        x = int(x)
        b_prime = ball(space_prime, x, _radius(phi, space_prime.norm(x)))
        b = ball(space, x, _radius(psi, space.norm(x)))
        if not np.array_equal(b_prime, b):
            bad.append({"check": "ball-identity", "phi": to_text(phi), "point": x,
                        "only_prime": np.setdiff1d(b_prime, b)[:5].tolist(),
                        "only_rho": np.setdiff1d(b, b_prime)[:5].tolist()})
    return bad


def theorem_crosscheck(space: PointedSpace, f: ObservedFunction,
                       subpower_battery: Optional[Sequence[ScaleFunction]] = None,
                       sublinear_battery: Optional[Sequence[ScaleFunction]] = None,
                       samples: int = 20, seed: int = 0, backward_depth: int = 2,
                       backward_horizon: float = 1e12, **profile_kw) -> CrosscheckReport:
    """Compare CB_P(X) with CB_L(X') and test both ball relations pointwise."""
    sub_p = tuple(SUBPOWER_BATTERY if subpower_battery is None else subpower_battery)
    sub_l = tuple(SUBLINEAR_BATTERY if sublinear_battery is None else sublinear_battery)
    xprime = log_remetrize(space)
    report = CrosscheckReport(membership_estimate(space, f, "subpower", sub_p, **profile_kw),
                              membership_estimate(xprime, f, "sublinear", sub_l, **profile_kw))
    centers = _sample_centers(space, samples, seed)
    for phi in sub_l:
        report.violations += ball_identity_violations(space, phi, centers, xprime)
        report.ball_identity_checked += len(centers)
    for phi in sub_p:
        psi = psi_backward(phi, backward_depth, backward_horizon)
        th = psi.thresholds
        eligible = np.flatnonzero((space.norms > th[-1]) & (np.log1p(space.norms) > th[0]))
        pts = _sample_centers(space, samples, seed, eligible)
        if pts.size == 0:
            report.notes.append(f"window empty for ball inclusion with phi = {to_text(phi)}: "
                                f"thresholds {th} exceed the truncation")
            continue
        for x in pts:
            x = int(x)
            inner = ball(space, x, _radius(phi, space.norm(x)))
            outer = ball(xprime, x, _radius(psi, xprime.norm(x)))
            missing = np.setdiff1d(inner, outer)
            if missing.size:
                report.violations.append({"check": "ball-inclusion", "phi": to_text(phi),
                                          "point": x, "missing": missing[:5].tolist()})
        report.ball_inclusion_checked += int(pts.size)
    return report
