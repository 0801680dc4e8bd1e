import math
import warnings

import numpy as np
import pytest
from hypothesis import assume, given, settings, strategies as st

from tsblowflies.errors import NonRegressivePoint, NotInScale, WindowEdgeWarning
from tsblowflies.timescale import ClosedInterval, IsolatedPoint, TimeScale, UnionFamily, Integers, build_grid
from tsblowflies.tscalc import (circle_minus, circle_plus, cylinder, delta_derivative, delta_integral,
                                is_positively_regressive, is_regressive, ominus, ts_exp, ts_exp_series)

R = TimeScale.interval(0, 10)
RG = build_grid(R, None, 0.01)
Z = TimeScale.integers(0, 10)
ZG = build_grid(Z, None, 1.0)
GAP = TimeScale([ClosedInterval(0, 1), IsolatedPoint(2)])
GAPG = build_grid(GAP, None, 0.001)


def test_regressivity_examples():
    assert is_regressive(lambda t: 5 * math.sin(t), R, RG)
    assert not is_regressive(-1.0, Z, ZG)
    assert is_regressive(-0.21, Z, ZG) and is_positively_regressive(-0.21, Z, ZG)
    assert is_positively_regressive(-5.0, R, RG)
    assert is_positively_regressive(-0.5, Z, ZG)
    assert not is_positively_regressive(-1.5, Z, ZG)


def test_cylinder_examples():
    assert cylinder(0, -0.3) == -0.3
    assert cylinder(1, math.e - 1) == pytest.approx(1.0, abs=1e-15)
    assert cylinder(0.5, 2) == pytest.approx(1.3862943611198906, rel=1e-15)
    with pytest.raises(NonRegressivePoint):
        cylinder(1, -1)


def test_circle_ops():
    assert circle_plus(0.3, 0.4, 0) == pytest.approx(0.7)
    assert circle_minus(0.3, 0) == -0.3
    assert circle_plus(1, 1, 1) == 3
    assert circle_minus(0.1, 1) == pytest.approx(-0.1 / 1.1)
    with pytest.raises(NonRegressivePoint):
        circle_minus(-1.0, 1.0)


def test_ts_exp_examples():
    assert ts_exp(-0.2, 1, 0, R, RG) == pytest.approx(math.exp(-0.2), rel=1e-12)
    assert abs(ts_exp(-0.2, 3, 0, Z, ZG) - 0.512) <= 1e-15
    assert ts_exp(-0.2, 2, 0, GAP, GAPG) == pytest.approx(math.exp(-0.2) * 0.8, rel=1e-12)


def test_ts_exp_reverse_and_identity():
    assert ts_exp(-0.2, 0, 3, Z, ZG) == pytest.approx(1 / 0.512)
    assert ts_exp(0.7, 4, 4, Z, ZG) == 1.0


def test_ts_exp_sign_through_negative_factor():
    # 1 + mu p < 0 on Z gives alternating signs
    assert ts_exp(-3.0, 2, 0, Z, ZG) == pytest.approx(4.0)
    assert ts_exp(-3.0, 3, 0, Z, ZG) == pytest.approx(-8.0)


def test_ts_exp_not_in_scale():
    with pytest.raises(NotInScale):
        ts_exp(-0.2, 1.5, 0, Z, ZG)


def test_ts_exp_series_matches_pointwise():
    pts = ZG.points
    ser = ts_exp_series(-0.2, pts, Z)
    assert np.allclose(ser, 0.8 ** pts, rtol=1e-14)


def test_delta_integral_examples():
    assert delta_integral(1.0, 0, 5, Z, ZG) == pytest.approx(5)
    assert delta_integral(lambda t: t, 0, 1, R, RG) == pytest.approx(0.5, abs=1e-8)
    assert delta_integral(1.0, 0, 2, GAP, GAPG) == pytest.approx(2)


def test_delta_derivative_examples():
    assert delta_derivative(lambda t: t * t, 3, Z, ZG) == pytest.approx(7)
    assert delta_derivative(lambda t: t * t, 3, R, RG) == pytest.approx(6, abs=1e-6)
    zq = UnionFamily(Integers(), (0.25,)).on((-3, 3))
    assert delta_derivative(lambda t: t, 0.25, zq, build_grid(zq, None, 1)) == pytest.approx(1)


def test_delta_derivative_edge_warning():
    with pytest.warns(WindowEdgeWarning):
        v = delta_derivative(lambda t: t * t, 0.0, R, RG)
    assert v == pytest.approx(0.0, abs=0.02)


def test_derivative_of_integral():
    f = lambda t: math.cos(t)
    for t in (1.0, 2.5, 7.0):
        F = lambda s: delta_integral(f, 0, s, R, RG)
        assert delta_derivative(F, t, R, RG) == pytest.approx(f(t), abs=0.02)
    g = lambda t: t * t
    G = lambda s: delta_integral(g, 0, s, Z, ZG)
    assert delta_derivative(G, 4, Z, ZG) == pytest.approx(g(4), abs=1e-12)


# properties -------------------------------------------------------------------------
@st.composite
def hybrid(draw):
    pts = draw(st.lists(st.integers(0, 40).map(lambda k: k * 0.25), max_size=6))
    ivs = draw(st.lists(st.tuples(st.integers(0, 40), st.integers(1, 8)), max_size=3))
    segs = [IsolatedPoint(p) for p in pts] + [ClosedInterval(a * 0.25, a * 0.25 + w * 0.125) for a, w in ivs]
    segs.append(IsolatedPoint(0.0))
    return TimeScale(segs)


@settings(max_examples=50, deadline=None)
@given(hybrid(), st.floats(-0.6, 0.6), st.data())
def test_semigroup_and_reciprocal(ts, c, data):
    g = build_grid(ts, None, 0.01)
    pts = sorted(data.draw(st.lists(st.sampled_from(g.points.tolist()), min_size=3, max_size=3)))
    r, s, t = pts
    p = lambda u: c + 0.3 * math.sin(u)
    lhs = ts_exp(p, t, s, ts, g) * ts_exp(p, s, r, ts, g)
    assert lhs == pytest.approx(ts_exp(p, t, r, ts, g), rel=1e-8)
    prod = ts_exp(ominus(p, ts), t, r, ts, g) * ts_exp(p, t, r, ts, g)
    assert prod == pytest.approx(1.0, rel=1e-8)


@settings(max_examples=50, deadline=None)
@given(hybrid(), st.floats(-0.8, 0.8), st.floats(0.0, 0.5), st.data())
def test_positivity_and_comparison(ts, c, d, data):
    g = build_grid(ts, None, 0.01)
    s, t = sorted(data.draw(st.lists(st.sampled_from(g.points.tolist()), min_size=2, max_size=2)))
    p, q = c, c + d
    assume(all(1 + m * p > 0 for m in g.mu))
    ep, eq = ts_exp(p, t, s, ts, g), ts_exp(q, t, s, ts, g)
    assert ep > 0
    assert ep <= eq * (1 + 1e-12)


@settings(max_examples=30, deadline=None)
@given(st.floats(-1, 1), st.floats(0, 9), st.floats(0, 9))
def test_reals_exp_matches_integral(c, a, b):
    s, t = sorted((a, b))
    p = lambda u: c * math.cos(u)
    val = ts_exp(p, t, s, R, RG)
    assert val == pytest.approx(math.exp(delta_integral(p, s, t, R, RG)), rel=1e-8)
