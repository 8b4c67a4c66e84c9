"""Scale functions on R_+: evaluation, growth classification, psi builders.

Scale functions are small immutable expression trees.  Every node evaluates
vectorised over numpy arrays.  The text form is prefix notation::

    sum(mono(1,0.5,0), mono(2,0,1))
    explogwrap(mono(0.5,1,0))
    piecewise(10,100)
    tab(1,1,4,2,9,3)          # (x, value) pairs, linear interpolation
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Sequence, Tuple

import numpy as np

from .errors import ConstructionError, DomainError, OutOfRangeError, ParseError

YES, NO, UNKNOWN = "yes", "no", "unknown"

ALPHA_GRID = (1.0, 0.5, 0.25, 0.125)
C_GRID = (2.0, 1.0, 0.5, 0.25, 0.125)
THRESHOLD_RATIO = 1.05
SCAN_RATIO = 1.01
DENSE_RATIO = 1.001


class ScaleFunction:
    """Base node.  Subclasses implement ``_eval`` on arrays of x >= 0."""

    def __call__(self, x):
        with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
            return self._eval(np.asarray(x, dtype=float))

    def domain(self) -> Tuple[float, float]:
        return (0.0, math.inf)

    def __str__(self):
        return to_text(self)


@dataclass(frozen=True, eq=True)
class Monomial(ScaleFunction):
    """``c * x**beta * ln(e + x)**k``.

    Negative ``k`` is allowed so that x/ln(e+x) stays inside the class.
    """

    c: float
    beta: float
    k: int = 0

    def __post_init__(self):
        if self.c < 0:
            raise DomainError(f"monomial coefficient must be nonnegative, got {self.c}")
        if int(self.k) != self.k:
            raise DomainError(f"log power must be an integer, got {self.k}")

    def _eval(self, x):
        if self.c == 0:
            return np.zeros_like(x)
        out = self.c * np.power(x, self.beta)
        if self.k:
            out = out * np.power(np.log(np.e + x), self.k)
        return out


@dataclass(frozen=True, eq=True)
class Sum(ScaleFunction):
    terms: Tuple[ScaleFunction, ...]

    def __init__(self, terms: Sequence[ScaleFunction]):
        if not terms:
            raise DomainError("sum needs at least one term")
        object.__setattr__(self, "terms", tuple(terms))

    def _eval(self, x):
        total = np.zeros_like(x)
        for t in self.terms:
            total = total + t._eval(x)
        return total

    def domain(self):
        lo, hi = 0.0, math.inf
        for t in self.terms:
            a, b = t.domain()
            lo, hi = max(lo, a), min(hi, b)
        return lo, hi


@dataclass(frozen=True, eq=True)
class ExpLogWrap(ScaleFunction):
    """``x -> exp(inner(ln(1 + x))) - 1``."""

    inner: ScaleFunction

    def _eval(self, x):
        return np.expm1(self.inner._eval(np.log1p(x)))

    def domain(self):
        a, b = self.inner.domain()
        return float(np.expm1(a)), (math.inf if b >= 709 else float(np.expm1(b)))


@dataclass(frozen=True, eq=True)
class PiecewiseSlope(ScaleFunction):
    """1 on (0, c_1], x/n on (c_n, c_{n+1}], x/m beyond c_m."""

    thresholds: Tuple[float, ...]

    def __init__(self, thresholds: Sequence[float]):
        th = tuple(float(t) for t in thresholds)
        if not th:
            raise DomainError("piecewise slope needs at least one threshold")
        if th[0] <= 0 or any(b <= a for a, b in zip(th, th[1:])):
            raise DomainError(f"thresholds must be positive and strictly increasing: {th}")
        object.__setattr__(self, "thresholds", th)

    def _eval(self, x):
        n = np.searchsorted(np.asarray(self.thresholds), x, side="left")
        return np.where(n == 0, 1.0, x / np.maximum(n, 1))


@dataclass(frozen=True, eq=True)
class Tabulated(ScaleFunction):
    xs: Tuple[float, ...]
    ys: Tuple[float, ...]

    def __init__(self, xs: Sequence[float], ys: Sequence[float]):
        xs = tuple(float(v) for v in xs)
        ys = tuple(float(v) for v in ys)
        if len(xs) != len(ys) or len(xs) < 2:
            raise DomainError("tabulated function needs at least two (x, value) pairs")
        if any(b <= a for a, b in zip(xs, xs[1:])):
            raise DomainError("tabulated abscissae must strictly increase")
        if min(ys) < 0:
            raise DomainError("tabulated values must be nonnegative")
        object.__setattr__(self, "xs", xs)
        object.__setattr__(self, "ys", ys)

    @classmethod
    def sample(cls, fn, xs) -> "Tabulated":
        xs = np.asarray(xs, dtype=float)
        return cls(xs.tolist(), np.asarray(fn(xs), dtype=float).tolist())

    def _eval(self, x):
        lo, hi = self.xs[0], self.xs[-1]
        if np.any((x < lo) | (x > hi)):
            bad = x[(x < lo) | (x > hi)].flat[0]
            raise OutOfRangeError(f"x = {bad!r} outside tabulated range [{lo}, {hi}]")
        return np.interp(x, self.xs, self.ys)

    def domain(self):
        return self.xs[0], self.xs[-1]


def mono(c, beta=0.0, k=0) -> Monomial:
    return Monomial(float(c), float(beta), int(k))


IDENTITY = Monomial(1.0, 1.0, 0)
LOG = Monomial(1.0, 0.0, 1)


def evaluate(f: ScaleFunction, x):
    """Value of ``f`` at ``x > 0`` (scalar or array)."""
    arr = np.asarray(x, dtype=float)
    if np.any(~(arr > 0)):
        raise DomainError("scale functions are evaluated at x > 0 only")
    out = f(arr)
    return float(out) if np.ndim(out) == 0 else out


# classification ---------------------------------------------------------------

@dataclass(frozen=True)
class Classification:
    subpower: str
    sublinear: str
    certificate: str

    def __post_init__(self):
        if self.subpower == YES and self.sublinear != YES:
            raise ValueError("a subpower function is always sublinear")

    def verdict(self, mode: str) -> str:
        return self.subpower if mode == "subpower" else self.sublinear


def _combine(verdicts):
    if all(v == YES for v in verdicts):
        return YES
    if any(v == NO for v in verdicts):
        return NO
    return UNKNOWN


def classify(f: ScaleFunction) -> Classification:
    """Symbolic subpower/sublinear decision, exact on monomial sums."""
    if isinstance(f, Monomial):
        name = to_text(f)
        if f.c == 0:
            return Classification(YES, YES, f"{name} is identically zero")
        if f.beta <= 0:
            return Classification(YES, YES, f"{name}: power {f.beta:g} <= 0, only log growth")
        sub = f.beta < 1 or (f.beta == 1 and f.k < 0)
        cert = f"{name} >= x^{f.beta / 2:g} eventually (power {f.beta:g} > 0)"
        if sub:
            return Classification(NO, YES, cert + "; power below linear")
        return Classification(NO, NO, cert + f"; fails c={f.c / 2:g}: not below c*x")
    if isinstance(f, Sum):
        parts = [classify(t) for t in f.terms]
        sp = _combine([p.subpower for p in parts])
        sl = _combine([p.sublinear for p in parts])
        worst = [f"{to_text(t)}: {p.certificate}" for t, p in zip(f.terms, parts)
                 if p.subpower != YES or p.sublinear != YES]
        cert = "; ".join(worst) if worst else "every term qualifies"
        return Classification(sp, sl, cert)
    if isinstance(f, PiecewiseSlope):
        m = len(f.thresholds)
        return Classification(NO, UNKNOWN,
                              f"equals x/{m} beyond {f.thresholds[-1]:g}; truncated construction")
    return Classification(UNKNOWN, UNKNOWN, "no symbolic rule; use numeric_check")


def scan_points(lo: float, hi: float, ratio: float = SCAN_RATIO) -> np.ndarray:
    """Geometric sample of [lo, hi] with consecutive ratio at most ``ratio``."""
    count = max(2, int(math.ceil(math.log(hi / lo) / math.log(ratio))) + 1)
    return np.geomspace(lo, hi, count)


def numeric_check(f: ScaleFunction, mode: str, horizon: float,
                  grid: Sequence[float] = None, start: float = 1.0,
                  ratio: float = SCAN_RATIO) -> Classification:
    """Window-relative test of ``f(x) < x**alpha`` (or ``< c*x``) over (r0, horizon].

    For every grid value the last violating sample is located.  A violation
    at the horizon sample means "violated"; a last violation at or below
    ``horizon/2`` means a threshold exists; anything in between is unknown.
    """
    if mode not in ("subpower", "sublinear"):
        raise DomainError(f"mode must be 'subpower' or 'sublinear', got {mode!r}")
    if grid is None:
        grid = ALPHA_GRID if mode == "subpower" else C_GRID
    grid = list(grid)
    if not grid:
        raise DomainError("numeric_check needs a nonempty parameter grid")
    lo, hi = f.domain()
    if horizon > hi:
        raise DomainError(f"horizon {horizon:g} beyond the function's sampled range {hi:g}")
    start = max(start, lo)
    if horizon / 2 <= start:
        raise DomainError(f"horizon {horizon:g} too small for a window starting at {start:g}")
    x = scan_points(start, horizon, ratio)
    values = f(x)
    outcomes, notes = [], []
    for p in grid:
        bound = x ** p if mode == "subpower" else p * x
        bad = ~(values < bound)
        sym = "alpha" if mode == "subpower" else "c"
        if not bad.any():
            outcomes.append(YES)
            notes.append(f"{sym}={p:g}: holds from {start:g}")
        elif bad[-1]:
            outcomes.append(NO)
            notes.append(f"{sym}={p:g}: violated at the horizon {horizon:g}")
        else:
            last = float(x[bad][-1])
            if last <= horizon / 2:
                outcomes.append(YES)
                notes.append(f"{sym}={p:g}: r0={last:.6g}")
            else:
                outcomes.append(UNKNOWN)
                notes.append(f"{sym}={p:g}: last violation {last:.6g} beyond horizon/2")
    verdict = _combine(outcomes)
    cert = f"window (0, {horizon:g}]: " + ", ".join(notes)
    if mode == "subpower":
        return Classification(verdict, YES if verdict == YES else UNKNOWN, cert)
    return Classification(NO if verdict == NO else UNKNOWN, verdict, cert)


# psi constructions -------------------------------------------------------------

def psi_forward(phi: ScaleFunction) -> ExpLogWrap:
    """``psi(t) = exp(phi(ln(1 + t))) - 1``; turns a sublinear phi into a subpower psi."""
    return ExpLogWrap(phi)


def threshold_grid(horizon: float, start: float = 1.0, ratio: float = THRESHOLD_RATIO):
    count = int(math.floor(math.log(horizon / start) / math.log(ratio))) + 1
    return start * ratio ** np.arange(count)


def psi_backward(phi: ScaleFunction, depth: int, horizon: float,
                 ratio: float = THRESHOLD_RATIO) -> PiecewiseSlope:
    """Piecewise slope psi with thresholds beyond which ``1 + phi(x) < x**(1/n)``.

    ``c_n`` is the smallest point of the geometric threshold grid (from 1,
    the given ratio, up to the horizon) past every failure found on a dense
    sample; thresholds are pushed to the next grid point when needed to
    strictly increase.
    """
    if depth < 1:
        raise DomainError(f"depth must be a positive integer, got {depth}")
    grid = threshold_grid(horizon, ratio=ratio)
    if grid.size < 2:
        raise DomainError(f"horizon {horizon:g} leaves no threshold grid")
    dense = scan_points(1.0, horizon, DENSE_RATIO)
    lhs = 1.0 + phi(dense)
    thresholds = []
    prev = -1
    for n in range(1, depth + 1):
        bad = ~(lhs < dense ** (1.0 / n))
        if bad[-1]:
            raise ConstructionError(
                f"1 + phi(x) < x^(1/{n}) does not hold at the horizon {horizon:g}; "
                f"phi is not subpower on this window or the horizon is too small", n=n)
        # the first passing sample after the last failure bounds the crossing
        clear = dense[int(np.flatnonzero(bad)[-1]) + 1] if bad.any() else dense[0]
        idx = int(np.searchsorted(grid, clear * (1 - 1e-12), side="left"))
        if idx <= prev:
            idx = prev + 1
        if idx >= grid.size:
            raise ConstructionError(f"no room on the grid for threshold c_{n}", n=n)
        thresholds.append(float(grid[idx]))
        prev = idx
    return PiecewiseSlope(thresholds)


# text form ---------------------------------------------------------------------

def _num(v) -> str:
    v = float(v)
    if v.is_integer() and abs(v) < 1e15:
        return str(int(v))
    return repr(v)


def to_text(f: ScaleFunction) -> str:
    if isinstance(f, Monomial):
        return f"mono({_num(f.c)},{_num(f.beta)},{int(f.k)})"
    if isinstance(f, Sum):
        return "sum(" + ",".join(to_text(t) for t in f.terms) + ")"
    if isinstance(f, ExpLogWrap):
        return f"explogwrap({to_text(f.inner)})"
    if isinstance(f, PiecewiseSlope):
        return "piecewise(" + ",".join(_num(t) for t in f.thresholds) + ")"
    if isinstance(f, Tabulated):
        flat = [_num(v) for pair in zip(f.xs, f.ys) for v in pair]
        return "tab(" + ",".join(flat) + ")"
    raise TypeError(f"cannot serialise {type(f).__name__}")


_TOKEN = re.compile(r"\s*(?:(?P<num>[-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?)"
                    r"|(?P<name>[A-Za-z_]+)|(?P<punct>[(),]))")


class _Parser:
    def __init__(self, text):
        self.text = text
        self.pos = 0

    def _peek(self):
        m = _TOKEN.match(self.text, self.pos)
        if not m or m.end() == m.start() or m.lastgroup is None:
            return None, None, self.pos
        return m.lastgroup, m.group(m.lastgroup), m.end()

    def _take(self, kind=None, value=None):
        k, v, end = self._peek()
        if k is None or (kind and k != kind) or (value and v != value):
            at = len(self.text) - len(self.text[self.pos:].lstrip())
            want = value or kind or "token"
            raise ParseError(f"expected {want!r}", at)
        self.pos = end
        return v

    def number(self):
        return float(self._take("num"))

    def expr(self):
        start = len(self.text) - len(self.text[self.pos:].lstrip())
        name = self._take("name").lower()
        self._take("punct", "(")
        if name == "mono":
            c = self.number()
            self._take("punct", ",")
            beta = self.number()
            self._take("punct", ",")
            k = self.number()
            self._take("punct", ")")
            try:
                return Monomial(c, beta, int(k)) if k == int(k) else Monomial(c, beta, k)
            except DomainError as exc:
                raise ParseError(str(exc), start) from None
        if name in ("sum", "explogwrap"):
            args = [self.expr()]
            while self._peek()[1] == ",":
                self._take("punct", ",")
                args.append(self.expr())
            self._take("punct", ")")
            if name == "explogwrap":
                if len(args) != 1:
                    raise ParseError("explogwrap takes exactly one argument", start)
                return ExpLogWrap(args[0])
            return Sum(args)
        if name in ("piecewise", "tab"):
            nums = [self.number()]
            while self._peek()[1] == ",":
                self._take("punct", ",")
                nums.append(self.number())
            self._take("punct", ")")
            try:
                if name == "piecewise":
                    return PiecewiseSlope(nums)
                if len(nums) % 2:
                    raise DomainError("tab needs an even number of values")
                return Tabulated(nums[0::2], nums[1::2])
            except DomainError as exc:
                raise ParseError(str(exc), start) from None
        raise ParseError(f"unknown scale function {name!r}", start)


def parse(text: str) -> ScaleFunction:
    """Parse the prefix text form; raises ParseError with a character position."""
    p = _Parser(text)
    f = p.expr()
    if p.text[p.pos:].strip():
        raise ParseError("trailing input", len(p.text) - len(p.text[p.pos:].lstrip()))
    return f
