import math

import numpy as np
import pytest

from coarsedim.errors import DomainError, PreconditionError, WindowTooSmall
from coarsedim.higson import (DECAYING, INCONCLUSIVE, NON_DECAYING, SUBLINEAR_BATTERY,
                              ObservedFunction, ball, ball_identity_violations, check_battery,
                              decay_verdict, higson_profile, local_oscillation,
                              membership_estimate, theorem_crosscheck, value_diameter)
from coarsedim.metric_core import MetricSpace, PointedSpace, build_grid, build_interval
from coarsedim.scale_functions import IDENTITY, LOG, mono
from oracles import brute_open_ball

HALF = mono(0.5, 1, 0)
SQRT = mono(1, 0.5, 0)


def sin_log(space):
    return ObservedFunction.of_norm(space, lambda n: np.sin(np.log1p(n)), "sin(log1p|x|)")


def test_ball_matches_brute_force():
    x = build_interval(-50, 50)
    pts = np.arange(-50, 51)
    for c, r in [(50, 7.0), (0, 3.5), (100, 0.2), (60, 200.0)]:
        assert ball(x, c, r).tolist() == brute_open_ball(pts, pts[c], r).tolist()


def test_value_diameter():
    assert value_diameter(np.array([[1.0], [4.0], [2.0]])) == 3.0
    assert value_diameter(np.array([[0.0, 0.0], [3.0, 4.0]])) == 5.0
    assert value_diameter(np.zeros((1, 2))) == 0.0


def test_value_diameter_hull_path():
    rng = np.random.default_rng(0)
    v = rng.normal(size=(3000, 2))
    from scipy.spatial.distance import pdist
    assert value_diameter(v) == pytest.approx(pdist(v).max())


def test_local_oscillation_pinned():
    x = build_interval(0, 20000, budget=30000)
    f = sin_log(x)
    osc = local_oscillation(x, f, 10000, HALF)
    # ball is 5001..14999 and sin is monotone on (ln 5002, ln 15000)
    assert osc == pytest.approx(math.sin(math.log(5002)) - math.sin(math.log(15000)), abs=1e-12)


def test_observed_function_algebra():
    x = build_interval(0, 5)
    f = ObservedFunction.of_norm(x, lambda n: n / 5.0)
    g = f + f
    assert g.sup_norm == 2.0
    assert (f * f).values[-1, 0] == 1.0
    with pytest.raises(DomainError):
        ObservedFunction(np.array([1.0, np.inf]))


def test_constant_function_decays_everywhere():
    x = build_interval(0, 2000)
    f = ObservedFunction.of_norm(x, lambda n: np.ones_like(n))
    rep = membership_estimate(x, f, "sublinear")
    assert rep.in_algebra and rep.summary() == "in CB_L (window)"


def test_profile_excludes_boundary_points():
    x = build_interval(0, 1000)
    prof = higson_profile(x, sin_log(x), HALF)
    assert prof.excluded > 0
    for a in prof.annuli:
        t = x.norm(a.witness_point)
        assert t + 0.5 * t <= 1000 + 1e-9


def test_profile_window_too_small():
    single = PointedSpace(MetricSpace.from_matrix([[0.0]]), 0)
    with pytest.raises(WindowTooSmall):
        higson_profile(single, ObservedFunction(np.zeros(1)), LOG)
    tiny = build_interval(0, 3)
    with pytest.raises(WindowTooSmall):
        higson_profile(tiny, sin_log(tiny), mono(100, 0, 0))


def test_decay_verdict_rules():
    assert decay_verdict([1, 1, 1, 0.2]) == DECAYING
    assert decay_verdict([1, 1, 1, 0.95]) == NON_DECAYING
    assert decay_verdict([1, 1, 1, 0.5]) == INCONCLUSIVE
    assert decay_verdict([0, 0, 0]) == DECAYING
    assert decay_verdict([1.0]) == INCONCLUSIVE
    # ceil(0.25 * 5) = 2 tail annuli
    assert decay_verdict([1, 0.1, 1, 0.2, 0.1]) == DECAYING
    with pytest.raises(DomainError):
        decay_verdict([])


def test_linear_scale_does_not_decay_for_sin_log():
    x = build_interval(0, 20000, budget=30000)
    prof = higson_profile(x, sin_log(x), HALF)
    assert decay_verdict(prof) == NON_DECAYING


def test_battery_precondition():
    with pytest.raises(PreconditionError):
        check_battery("sublinear", [HALF])
    with pytest.raises(PreconditionError):
        check_battery("subpower", [SQRT])
    check_battery("sublinear", SUBLINEAR_BATTERY)


def test_vector_valued_function_on_grid():
    g = PointedSpace(build_grid(2, 21, "L1", offset=-10), 220)
    assert g.norm(g.basepoint) == 0.0
    nrm = g.norms
    f = ObservedFunction(np.stack([np.cos(np.log1p(nrm)), np.sin(np.log1p(nrm))], axis=1))
    prof = higson_profile(g, f, LOG, annulus_count=4)
    assert len(prof.annuli) >= 1
    assert np.all(prof.oscillations <= 2.0 + 1e-12)


def test_ball_identity_on_interval():
    x = build_interval(0, 3000)
    centers = np.linspace(1, 3000, 15).astype(int)
    for phi in (HALF, SQRT, LOG, IDENTITY):
        assert ball_identity_violations(x, phi, centers) == []


def test_crosscheck_small_window_reports_notes():
    x = build_interval(0, 3000)
    rep = theorem_crosscheck(x, sin_log(x), samples=10)
    assert rep.ball_identity_checked > 0
    assert not rep.violations
    assert any("window empty" in n for n in rep.notes)
