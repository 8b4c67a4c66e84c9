import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from coarsedim.errors import BudgetExceeded, DomainError, MetricError, OutOfRangeError
from coarsedim.metric_core import (MetricSpace, PointMap, PointedSpace, build_cayley_ball,
                                   build_grid, build_interval, build_tree, identity_map,
                                   inverse_remetrize, is_isometry, is_M_connected,
                                   log_remetrize, metric_violation, regular_tree_parents,
                                   transport_map)
from oracles import random_metric_table


def test_from_matrix_rejects_asymmetry():
    with pytest.raises(MetricError, match="asymmetric"):
        MetricSpace.from_matrix([[0, 1], [2, 0]])


def test_from_matrix_rejects_triangle_failure():
    t = [[0, 1, 5], [1, 0, 1], [5, 1, 0]]
    with pytest.raises(MetricError, match="triangle"):
        MetricSpace.from_matrix(t)
    # opting out of the cubic check accepts it
    assert MetricSpace.from_matrix(t, check_triangle=False).size == 3


def test_from_matrix_rejects_zero_between_distinct_points():
    with pytest.raises(MetricError, match="distance zero"):
        MetricSpace.from_matrix([[0, 0], [0, 0]])


def test_lower_triangle_roundtrip():
    s = MetricSpace.from_lower_triangle([[1.0], [2.0, 1.0]])
    assert s.dist(0, 2) == 2.0 and s.dist(2, 1) == 1.0
    with pytest.raises(MetricError):
        MetricSpace.from_lower_triangle([[1.0], [2.0]])


def test_single_point_space():
    s = MetricSpace.from_matrix([[0.0]])
    assert s.diameter() == 0.0
    assert is_M_connected(s, 1.0)


def test_grid_counts_and_distances():
    g = build_grid(2, 4, "L1")
    assert g.size == 16
    assert g.dist(0, 15) == 6.0
    assert build_grid(2, 4, "Linf").dist(0, 15) == 3.0
    assert build_grid(2, 4, "L2").dist(0, 15) == pytest.approx(math.sqrt(18))
    assert g.label(5) == "(1,1)"


def test_grid_budget_refusal_names_budget():
    with pytest.raises(BudgetExceeded) as exc:
        build_grid(3, 20, budget=1000)
    assert exc.value.budget == 1000 and exc.value.requested == 8000


def test_lazy_grid_table_limit():
    line = build_grid(1, 5000, budget=10000)
    assert line.diameter() == 4999.0
    with pytest.raises(BudgetExceeded):
        line.table()


def test_interval_is_pointed_at_zero():
    x = build_interval(-5, 5)
    assert x.space.label(x.basepoint) == "0"
    assert x.norm(0) == 5.0 and x.truncation_radius == 5.0


def test_cayley_free_abelian_rank1_is_interval():
    z = build_cayley_ball("free-abelian", 1, 10)
    assert z.space.size == 21
    labels = sorted(int(z.space.label(i)) for i in range(21))
    assert labels == list(range(-10, 11))
    assert z.space.truncation_radius == 10.0


def test_cayley_free_abelian_rank2_word_metric():
    z2 = build_cayley_ball("free-abelian", 2, 2)
    assert z2.space.size == 13
    idx = {z2.space.label(i): i for i in range(z2.space.size)}
    assert z2.space.dist(idx["(1,0)"], idx["(0,1)"]) == 2.0
    assert z2.space.dist(idx["(2,0)"], idx["(-2,0)"]) == 4.0


def test_cayley_free_group_ball_sizes():
    # |S(k)| = 2m(2m-1)^(k-1) for F_m
    f2 = build_cayley_ball("free", 2, 3)
    assert f2.space.size == 1 + 4 + 12 + 36
    idx = {f2.space.label(i): i for i in range(f2.space.size)}
    assert f2.space.dist(idx["ab"], idx["aB"]) == 2.0
    assert f2.space.dist(idx["ab"], idx["ba"]) == 4.0


def test_cayley_budget():
    with pytest.raises(BudgetExceeded):
        build_cayley_ball("free", 3, 6, budget=500)


def test_tree_metric():
    parents = regular_tree_parents(2, 2)
    assert parents == [-1, 0, 0, 1, 1, 2, 2]
    t = build_tree(parents)
    assert t.dist(3, 4) == 2.0 and t.dist(3, 6) == 4.0
    w = build_tree([-1, 0, 1], weights=[0, 2.5, 0.5])
    assert w.dist(0, 2) == 3.0


def test_tree_rejects_two_roots():
    with pytest.raises(DomainError):
        build_tree([-1, -1])


def test_log_remetrize_values_and_pointed():
    x = build_interval(0, 10)
    xp = log_remetrize(x)
    assert isinstance(xp, PointedSpace) and xp.basepoint == x.basepoint
    assert xp.space.dist(0, 10) == pytest.approx(math.log(11), abs=1e-12)
    assert xp.space.truncation_radius == pytest.approx(math.log(11))


def test_inverse_remetrize_roundtrip():
    s = MetricSpace.from_matrix(random_metric_table(np.random.default_rng(3), 12, "euclid"))
    back = inverse_remetrize(log_remetrize(s))
    np.testing.assert_allclose(back.table(), s.table(), atol=1e-9)


def test_inverse_remetrize_overflow_names_pair():
    s = MetricSpace.from_matrix([[0, 800.0], [800.0, 0]])
    with pytest.raises(OutOfRangeError, match=r"\(0, 1\)"):
        inverse_remetrize(s)


def test_ball_treats_near_ties_as_on_the_sphere():
    x = build_interval(0, 10)
    assert x.space.ball_indices(5, 2.0).tolist() == [4, 5, 6]
    assert x.space.ball_indices(5, 2.0 + 1e-12).tolist() == [4, 5, 6]
    assert x.space.ball_indices(5, 0.5).tolist() == [5]
    # the sorted-line fast path and the general row scan agree
    xp = log_remetrize(x.space)
    r = math.log(3.0)
    assert xp.ball_indices(5, r).tolist() == [4, 5, 6]


def test_M_connected():
    s = MetricSpace.from_matrix([[0, 1, 3], [1, 0, 2], [3, 2, 0]])
    assert is_M_connected(s, 2)
    assert not is_M_connected(s, 1.5)
    assert is_M_connected(build_grid(2, 5), 1)


def test_isometry_reflection_and_failure():
    line = build_interval(0, 9).space
    refl = PointMap(line, line, tuple(range(9, -1, -1)))
    assert is_isometry(refl)
    assert is_isometry(identity_map(line))
    swap = list(range(10))
    swap[0], swap[1] = 1, 0
    assert not is_isometry(PointMap(line, line, tuple(swap)))
    assert not is_isometry(PointMap(line, line, (0,) * 10))


def test_transport_map_to_remetrized():
    g = build_grid(2, 3)
    rot = [3 * (2 - j) + i for i in range(3) for j in range(3)]  # quarter turn
    pm = PointMap(g, g, tuple(rot))
    gp = log_remetrize(g)
    assert is_isometry(pm) and is_isometry(transport_map(pm, gp, gp))


@settings(max_examples=60, deadline=None)
@given(n=st.integers(2, 14), seed=st.integers(0, 2**31 - 1),
       kind=st.sampled_from(["euclid", "l1", "path"]))
def test_remetrized_tables_are_metrics(n, seed, kind):
    t = random_metric_table(np.random.default_rng(seed), n, kind)
    s = MetricSpace.from_matrix(t)
    tp = log_remetrize(s).table()
    assert metric_violation(tp) is None
    assert np.all(tp <= t + 1e-12)


@settings(max_examples=40, deadline=None)
@given(side=st.integers(1, 6), n=st.integers(1, 3), norm=st.sampled_from(["L1", "L2", "Linf"]))
def test_grid_diameter_matches_table(side, n, norm):
    g = build_grid(n, side, norm)
    assert g.diameter() == pytest.approx(g.table().max())
