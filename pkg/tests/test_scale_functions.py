import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from coarsedim.errors import ConstructionError, DomainError, OutOfRangeError, ParseError
from coarsedim.scale_functions import (IDENTITY, LOG, NO, UNKNOWN, YES, ExpLogWrap, Monomial,
                                       PiecewiseSlope, Sum, Tabulated, classify, evaluate, mono,
                                       numeric_check, parse, psi_backward, psi_forward,
                                       threshold_grid, to_text)
from oracles import crossing_threshold


def test_monomial_values():
    assert evaluate(mono(2, 1, 0), 3.0) == 6.0
    assert evaluate(LOG, 1.0) == pytest.approx(math.log(math.e + 1))
    assert evaluate(mono(1, 1, -1), 10.0) == pytest.approx(10 / math.log(math.e + 10))
    assert evaluate(mono(0, 5, 3), 7.0) == 0.0


def test_evaluate_rejects_nonpositive():
    with pytest.raises(DomainError):
        evaluate(IDENTITY, 0.0)


def test_monomial_validation():
    with pytest.raises(DomainError):
        Monomial(-1, 0, 0)
    with pytest.raises(DomainError):
        Monomial(1, 0, 0.5)


def test_sum_and_wrap():
    f = Sum([mono(1, 0, 0), IDENTITY])
    assert evaluate(f, 4.0) == 5.0
    w = ExpLogWrap(IDENTITY)
    assert evaluate(w, 7.0) == pytest.approx(7.0)


def test_piecewise_slope():
    p = PiecewiseSlope([10, 100])
    assert p(np.array([5.0, 10.0, 11.0, 50.0, 100.0, 200.0])).tolist() == [1, 1, 11, 50, 100, 100]
    with pytest.raises(DomainError):
        PiecewiseSlope([10, 10])


def test_tabulated_range():
    t = Tabulated([1, 10], [1, 4])
    assert evaluate(t, 4.0) == 2.0
    with pytest.raises(OutOfRangeError):
        evaluate(t, 11.0)
    s = Tabulated.sample(np.sqrt, [1, 4, 9])
    assert s.ys == (1.0, 2.0, 3.0)


@pytest.mark.parametrize("f, sp, sl", [
    (mono(1, 0, 1), YES, YES),
    (mono(1, 0, 7), YES, YES),
    (mono(3, -1, 0), YES, YES),
    (mono(1, 0.5, 0), NO, YES),
    (mono(1, 1, -1), NO, YES),
    (mono(2, 1, 0), NO, NO),
    (mono(1, 1, 1), NO, NO),
    (mono(0, 4, 0), YES, YES),
])
def test_classify_monomials(f, sp, sl):
    c = classify(f)
    assert (c.subpower, c.sublinear) == (sp, sl)
    assert c.certificate


def test_classify_sum_and_unknowns():
    assert classify(Sum([LOG, mono(1, 0.5, 0)])).verdict("subpower") == NO
    assert classify(Sum([LOG, mono(1, 0.5, 0)])).verdict("sublinear") == YES
    assert classify(ExpLogWrap(IDENTITY)).subpower == UNKNOWN
    assert classify(PiecewiseSlope([2, 3])).subpower == NO


def test_numeric_check_examples():
    assert numeric_check(mono(1, 0, 2), "subpower", 1e6, grid=(1, 0.5)).subpower == YES
    # at alpha = 1/4 the threshold of ln^2 lies far beyond 1e6
    assert numeric_check(mono(1, 0, 2), "subpower", 1e6, grid=(1, 0.5, 0.25)).subpower == NO
    assert numeric_check(IDENTITY, "sublinear", 1e6).sublinear == NO
    assert numeric_check(mono(1, 0.5, 0), "sublinear", 1e6).sublinear == YES
    # exp(sqrt(ln(1+x))) - 1 is subpower, the wrapped identity is not
    assert numeric_check(ExpLogWrap(mono(1, 0.5, 0)), "subpower", 1e6,
                         grid=(1, 0.5)).subpower == YES
    assert numeric_check(ExpLogWrap(IDENTITY), "subpower", 1e6, grid=(1, 0.5)).subpower == NO


def test_numeric_check_unknown_band():
    # sqrt(x) < x/100 only beyond 1e4, which is past horizon/2 for horizon 1.5e4
    c = numeric_check(mono(1, 0.5, 0), "sublinear", 1.5e4, grid=(0.01,))
    assert c.sublinear == UNKNOWN


def test_numeric_check_window_errors():
    with pytest.raises(DomainError):
        numeric_check(LOG, "subpower", 1.5)
    with pytest.raises(DomainError):
        numeric_check(Tabulated([1, 100], [0, 1]), "subpower", 1e4)


def test_psi_forward_identity():
    xs = np.geomspace(1e-3, 1e6, 50)
    np.testing.assert_allclose(psi_forward(IDENTITY)(xs), xs, rtol=1e-12, atol=1e-9)


def test_psi_backward_log_thresholds_match_root_oracle():
    p = psi_backward(LOG, 3, 1e6)
    for n, c in enumerate(p.thresholds, start=1):
        root = crossing_threshold(lambda x: 1 + math.log(math.e + x) - x ** (1 / n))
        # c_n is the first geometric grid point past the crossing
        assert root < c <= root * 1.05
    # frozen from the oracle above
    assert p.thresholds == pytest.approx((1.05 ** 21, 1.05 ** 56, 1.05 ** 118), rel=1e-12)


def test_psi_backward_contract_beyond_thresholds():
    p = psi_backward(LOG, 3, 1e6)
    for n, c in enumerate(p.thresholds, start=1):
        x = np.geomspace(c, 1e6, 2000)[1:]
        assert np.all(1 + LOG(x) < x ** (1 / n))


def test_psi_backward_zero_function():
    # 1 < x^(1/n) iff x > 1, so every threshold sits just above 1
    p = psi_backward(mono(0, 0, 0), 3, 1e6)
    assert p.thresholds == pytest.approx((1.05, 1.05 ** 2, 1.05 ** 3))


def test_psi_backward_sqrt_fails_at_second_level():
    with pytest.raises(ConstructionError) as exc:
        psi_backward(mono(1, 0.5, 0), 3, 1e6)
    assert exc.value.n == 2


def test_psi_backward_bad_depth():
    with pytest.raises(DomainError):
        psi_backward(LOG, 0, 1e6)


def test_psi_backward_strictly_increasing_for_constants():
    # 1 + 1 < x^(1/n) crosses at 2^n; thresholds strictly increase regardless
    p = psi_backward(mono(1, 0, 0), 4, 1e6)
    assert all(b > a for a, b in zip(p.thresholds, p.thresholds[1:]))


def test_threshold_grid():
    g = threshold_grid(10.0)
    assert g[0] == 1.0 and g[-1] <= 10.0 < g[-1] * 1.05


@pytest.mark.parametrize("text", [
    "mono(1,0,1)", "mono(0.5,1,0)", "mono(2,-1,3)",
    "sum(mono(1,0,1),mono(1,0.5,0))", "explogwrap(mono(1,1,0))",
    "piecewise(2,3.5,100)", "tab(1,0,10,2.5)"])
def test_text_roundtrip(text):
    f = parse(text)
    assert to_text(f) == text
    assert parse(to_text(f)) == f


@pytest.mark.parametrize("text, pos", [
    ("mono(1,0.5", 10), ("foo(1)", 0), ("mono(1,0,1) x", 12), ("mono(-1,0,0)", 0)])
def test_parse_errors_carry_position(text, pos):
    with pytest.raises(ParseError) as exc:
        parse(text)
    assert exc.value.position == pos
    assert f"position {pos}" in str(exc.value)


finite = st.floats(0, 5, allow_nan=False).map(lambda v: round(v, 3))
monos = st.builds(Monomial, finite, st.floats(-2, 2).map(lambda v: round(v, 2)), st.integers(-2, 3))


@settings(max_examples=80, deadline=None)
@given(monos)
def test_roundtrip_property(m):
    assert parse(to_text(m)) == m


@settings(max_examples=80, deadline=None)
@given(monos)
def test_classification_hierarchy(m):
    c = classify(m)
    if c.subpower == YES:
        assert c.sublinear == YES
    if m.c > 0:
        assert (c.subpower == YES) == (m.beta <= 0)
