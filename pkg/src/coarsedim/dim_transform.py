"""Transport dimension witnesses between (X, rho) and (X, ln(1 + rho)).

A power witness (alpha, r0, generator) supplies, for every r > r0, families
that are r-disjoint and r**alpha-bounded in rho.  A Nagata witness
(c, r0', generator) supplies r-disjoint and c*r-bounded families in
rho' = ln(1 + rho).  The two maps below reuse the very same families at a
transformed scale, so the number of families never changes:

* forward:  c = 2*alpha, r0' = max(r0, ln 2 / alpha), families at e^r - 1;
* backward: alpha = c + 2**c, r0 = e^r0', families at ln(r + 1).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence

import numpy as np

from .covers import CoverFamilySet, Linear, Power, interval_witness_Z, validate
from .errors import DomainError
from .metric_core import MetricSpace, PointedSpace, build_interval, inverse_remetrize, log_remetrize

LN2 = math.log(2.0)
SAMPLE_COUNT = 8
SAMPLE_SPAN = math.e ** 3
COMFORTABLE_R = 2.0


def _space_of(space):
    return space.space if isinstance(space, PointedSpace) else space


@dataclass(frozen=True)
class PowerWitness:
    space: MetricSpace
    alpha: float
    r0: float
    generate: Callable[[float], CoverFamilySet] = field(repr=False)
    family_count: int
    recipe: Optional[dict] = None

    def __post_init__(self):
        object.__setattr__(self, "space", _space_of(self.space))
        if not self.alpha > 0 or not self.r0 > 0:
            raise DomainError("power witness needs alpha > 0 and r0 > 0")

    @property
    def threshold(self) -> float:
        return self.r0

    def bound_kind(self):
        return Power(self.alpha)

    def families(self, r: float) -> CoverFamilySet:
        if not r > self.r0:
            raise DomainError(f"power witness is only defined for r > r0 = {self.r0:.12g}, got {r}")
        cover = self.generate(r)
        if cover.family_count != self.family_count:
            raise DomainError(f"generator produced {cover.family_count} families, "
                              f"witness declares {self.family_count}")
        return cover


@dataclass(frozen=True)
class NagataWitness:
    space: MetricSpace
    c: float
    r0_prime: float
    generate: Callable[[float], CoverFamilySet] = field(repr=False)
    family_count: int
    recipe: Optional[dict] = None
    base_space: Optional[MetricSpace] = field(default=None, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "space", _space_of(self.space))
        if not self.c > 0 or not self.r0_prime > 0:
            raise DomainError("Nagata witness needs c > 0 and r0' > 0")

    @property
    def threshold(self) -> float:
        return self.r0_prime

    def bound_kind(self):
        return Linear(self.c)

    def families(self, r: float) -> CoverFamilySet:
        if not r > self.r0_prime:
            raise DomainError(f"Nagata witness is only defined for r > r0' = {self.r0_prime:.12g}, got {r}")
        cover = self.generate(r)
        if cover.family_count != self.family_count:
            raise DomainError(f"generator produced {cover.family_count} families, "
                              f"witness declares {self.family_count}")
        return cover


def power_to_nagata(w: PowerWitness, target: Optional[MetricSpace] = None) -> NagataWitness:
    """Forward direction: families of ``w`` at scale e^r - 1, read in ln(1 + rho)."""
    c = 2.0 * w.alpha
    r0p = max(w.r0, LN2 / w.alpha)
    target = log_remetrize(w.space) if target is None else _space_of(target)

    def generate(r):
        return w.families(math.expm1(r)).relabel(target, r, c * r)

    recipe = None
    if w.recipe is not None:
        recipe = {"kind": "nagata", "c": c, "r0_prime": r0p,
                  "generator": {"name": "power_to_nagata", "source": w.recipe}}
    return NagataWitness(target, c, r0p, generate, w.family_count, recipe, base_space=w.space)


def nagata_to_power(w: NagataWitness, target: Optional[MetricSpace] = None) -> PowerWitness:
    """Backward direction: families of ``w`` at scale ln(r + 1), read in rho."""
    alpha = w.c + 2.0 ** w.c
    r0 = math.exp(w.r0_prime)
    if target is None:
        if w.base_space is None:
            target = inverse_remetrize(w.space)
        else:
            target = w.base_space
    target = _space_of(target)

    def generate(r):
        return w.families(math.log1p(r)).relabel(target, r, r ** alpha)

    recipe = None
    if w.recipe is not None:
        recipe = {"kind": "power", "alpha": alpha, "r0": r0,
                  "generator": {"name": "nagata_to_power", "source": w.recipe}}
    return PowerWitness(target, alpha, r0, generate, w.family_count, recipe)


# ready-made witnesses -------------------------------------------------------------

def interval_power_witness(N: int, alpha: float, r0: float = 1.0,
                           space: Optional[MetricSpace] = None) -> PowerWitness:
    """The alternating-block witness for asdim_P Z <= 1 on {-N..N}."""
    if r0 < 1:
        raise DomainError("the interval witness needs r0 >= 1 (it is built for r > 1)")
    space = build_interval(-N, N).space if space is None else _space_of(space)
    recipe = {"kind": "power", "alpha": float(alpha), "r0": float(r0),
              "generator": {"name": "interval", "N": int(N)}}
    return PowerWitness(space, float(alpha), float(r0),
                        lambda r: interval_witness_Z(N, alpha, r, space=space), 2, recipe)


def interval_nagata_witness(N: int, c: float, r0_prime: float = 1.0) -> NagataWitness:
    """Alternating blocks of length floor(e^r - 1) + 1 read over ln(1 + |a - b|)."""
    if c < 1:
        raise DomainError("the interval Nagata witness needs c >= 1")
    if r0_prime < math.log(2.0):
        raise DomainError("the interval Nagata witness needs r0' >= ln 2 so that e^r - 1 > 1")
    base = build_interval(-N, N).space
    target = log_remetrize(base)
    recipe = {"kind": "nagata", "c": float(c), "r0_prime": float(r0_prime),
              "generator": {"name": "interval", "N": int(N)}}

    def generate(r):
        return interval_witness_Z(N, 1.0, math.expm1(r), space=base).relabel(target, r, c * r)
    return NagataWitness(target, float(c), float(r0_prime), generate, 2, recipe, base_space=base)


def witness_from_recipe(recipe: dict):
    """Rebuild a witness from its serialisable description."""
    kind = recipe.get("kind")
    gen = recipe.get("generator") or {}
    name = gen.get("name")
    if name == "interval":
        if kind == "power":
            return interval_power_witness(int(gen["N"]), float(recipe["alpha"]),
                                          float(recipe.get("r0", 1.0)))
        if kind == "nagata":
            return interval_nagata_witness(int(gen["N"]), float(recipe["c"]),
                                           float(recipe.get("r0_prime", 1.0)))
    if name == "power_to_nagata" and kind == "nagata":
        return power_to_nagata(witness_from_recipe(gen["source"]))
    if name == "nagata_to_power" and kind == "power":
        return nagata_to_power(witness_from_recipe(gen["source"]))
    if name == "opaque":
        raise DomainError("opaque generators are not serialisable")
    raise DomainError(f"unknown witness recipe kind={kind!r} generator={name!r}")


# on-demand validation ---------------------------------------------------------------

def sample_scales(threshold: float, count: int = SAMPLE_COUNT, span: float = SAMPLE_SPAN) -> list:
    """``count`` log-spaced scales in (threshold, threshold * span]."""
    return np.geomspace(threshold, threshold * span, count + 1)[1:].tolist()


@dataclass
class WitnessValidation:
    kind: str
    threshold: float
    family_count: int
    rows: List[tuple] = field(default_factory=list)
    skipped: List[float] = field(default_factory=list)
    window_empty: bool = False
    note: str = ""

    @property
    def passed(self) -> bool:
        if self.window_empty:
            return True
        return all(rep.passed and rep.family_count == self.family_count for _, rep in self.rows)


def validate_witness(w, r_samples: Optional[Sequence[float]] = None) -> WitnessValidation:
    """Validate a Power- or NagataWitness at a finite schedule of scales.

    A schedule with no scale above the threshold, or a threshold at or
    beyond the diameter of the space, is reported as an empty window.
    """
    kind = "power" if isinstance(w, PowerWitness) else "nagata"
    r_samples = sample_scales(w.threshold) if r_samples is None else list(r_samples)
    out = WitnessValidation(kind, w.threshold, w.family_count)
    diam = w.space.diameter()
    if w.threshold >= diam:
        out.window_empty = True
        out.skipped = list(r_samples)
        out.note = (f"window empty: threshold {w.threshold:.12g} is not below the "
                    f"diameter {diam:.12g} of the space")
        return out
    for r in r_samples:
        if not r > w.threshold or (kind == "power" and not r > 1):
            out.skipped.append(r)
            continue
        cover = w.families(r)
        out.rows.append((r, validate(cover, w.bound_kind())))
    if not out.rows:
        out.window_empty = True
        out.note = f"window empty: no sampled r above the threshold {w.threshold:.12g}"
    return out


# inequality audit ----------------------------------------------------------------------

@dataclass(frozen=True)
class Link:
    name: str
    lhs: float
    relation: str
    rhs: float

    @property
    def holds(self) -> bool:
        ops = {"<": self.lhs < self.rhs, "<=": self.lhs <= self.rhs,
               ">": self.lhs > self.rhs, ">=": self.lhs >= self.rhs}
        return bool(ops[self.relation])


@dataclass
class ChainReport:
    direction: str
    parameter: float
    r: float
    derived: dict
    links: List[Link]
    notes: List[str]

    @property
    def all_hold(self) -> bool:
        return all(link.holds for link in self.links)


def _forward_links(alpha, r, distances):
    s = math.expm1(r)
    log_bound = alpha * math.log(s)              # ln((e^r - 1)^alpha)
    if log_bound < 700:
        lhs3 = math.log1p(s ** alpha)             # ln(1 + (e^r - 1)^alpha)
    else:
        lhs3 = float(np.logaddexp(0.0, log_bound))
    mid = float(np.logaddexp(0.0, alpha * r))     # ln(1 + e^(alpha r))
    links = [Link("e^r - 1 >= r", s, ">=", r)]
    for d in distances:
        if d > s:
            links.append(Link(f"rho={d:.6g} > e^r-1  =>  ln(1+rho) > r", math.log1p(d), ">", r))
        if log_bound >= 700 or d <= math.exp(log_bound):
            links.append(Link(f"rho={d:.6g} <= (e^r-1)^a  =>  ln(1+rho) <= ln(1+(e^r-1)^a)",
                              math.log1p(d), "<=", lhs3))
    links += [
        Link("ln(1+(e^r-1)^a) <= ln(1+e^(a r))", lhs3, "<=", mid),
        Link("ln(1+e^(a r)) <= ln(2 e^(a r))", mid, "<=", LN2 + alpha * r),
        Link("ln(2 e^(a r)) < ln e^(2 a r) = c r", LN2 + alpha * r, "<", 2 * alpha * r),
    ]
    return links


def _backward_links(c, alpha, r, distances, r0_prime):
    lr = math.log1p(r)
    links = []
    if r0_prime is not None:
        links.append(Link("ln(r+1) > r0'", lr, ">", r0_prime))
    for d in distances:
        if d > lr:
            links.append(Link(f"rho'={d:.6g} > ln(r+1)  =>  e^rho' - 1 > r", math.expm1(d), ">", r))
        if d <= c * lr:
            links.append(Link(f"rho'={d:.6g} <= c ln(r+1)  =>  e^rho'-1 <= e^(c ln(r+1))-1",
                              math.expm1(d), "<=", math.expm1(c * lr)))
    links += [
        Link("e^(c ln(r+1)) - 1 < (r+1)^c", math.expm1(c * lr), "<", (r + 1) ** c),
        Link("(r+1)^c < (2r)^c", (r + 1) ** c, "<", (2 * r) ** c),
        Link("(2r)^c < r^alpha", (2 * r) ** c, "<", r ** alpha),
    ]
    if r > 1:
        links.append(Link("alpha > c + log_r 2^c", alpha, ">", c + c * LN2 / math.log(r)))
    return links


def proof_chain_check(direction: str, parameter: float, r: float,
                      distances: Optional[Sequence[float]] = None,
                      r0_prime: Optional[float] = None) -> ChainReport:
    """Evaluate each inequality of the forward or backward transport at concrete numbers.

    ``parameter`` is alpha (forward) or c (backward).  ``distances`` are
    sample distances in the source metric (rho forward, rho' backward).
    """
    notes = []
    if direction == "forward":
        alpha = float(parameter)
        if not alpha > 0 or not r > 0:
            raise DomainError("forward audit needs alpha > 0 and r > 0")
        if not alpha * r > LN2:
            raise DomainError(f"forward audit needs alpha*r > ln 2, got {alpha * r:.6g}")
        if distances is None:
            s = math.expm1(r)
            distances = [0.0, 1.0, s / 2, s, s + 1.0]
        links = _forward_links(alpha, r, distances)
        derived = {"c": 2 * alpha, "bound": 2 * alpha * r, "scale_in_rho": math.expm1(r)}
    elif direction == "backward":
        c = float(parameter)
        if not c > 0 or not r > 0:
            raise DomainError("backward audit needs c > 0 and r > 0")
        alpha = c + 2.0 ** c
        if distances is None:
            lr = math.log1p(r)
            distances = [0.0, lr / 2, lr, lr + 0.5, c * lr]
        links = _backward_links(c, alpha, r, distances, r0_prime)
        derived = {"alpha": alpha, "bound": r ** alpha, "scale_in_rho_prime": math.log1p(r)}
        if r <= 1:
            notes.append("r <= 1: log_r 2^c is undefined or negative; justification link omitted")
        if r <= COMFORTABLE_R:
            notes.append(f"r = {r:.6g} <= {COMFORTABLE_R:g}: outside the comfortable regime; "
                         "links evaluated numerically, not assumed")
    else:
        raise DomainError(f"direction must be 'forward' or 'backward', got {direction!r}")
    return ChainReport(direction, float(parameter), float(r), derived, links, notes)
