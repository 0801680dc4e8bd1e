import json
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from tsblowflies.coefficients import (Abs, Const, Cos, Exp, Scale, Sin, Sum, coeff_bounds, eval_coeff,
                                      from_dict)
from tsblowflies.errors import ConfigError, HistoryGap, InconsistentBounds
from tsblowflies.model import NicholsonModel, equilibrium_constant, rhs, theta
from tsblowflies.simulator import Trajectory


# coefficients ------------------------------------------------------------------------
def test_eval_examples(ex51):
    assert eval_coeff(ex51.c[0], 0.0) == pytest.approx(0.21, abs=1e-15)
    assert eval_coeff(ex51.tau[0][0], 0.0) == 1.0
    t = np.linspace(0, 500, 200_001)
    assert float(np.max(eval_coeff(ex51.beta[2][2], t))) == pytest.approx(0.023, abs=1e-6)


def test_bounds_examples(ex51):
    assert coeff_bounds(ex51.c[0]) == pytest.approx((0.20, 0.22), abs=1e-12)
    assert coeff_bounds(ex51.b[0][1]) == pytest.approx((0.02, 0.04), abs=1e-12)
    assert coeff_bounds(ex51.alpha[0][0]) == pytest.approx((0.91, 1.0), abs=1e-12)


def test_bounds_reject_few_samples():
    with pytest.raises(ValueError):
        coeff_bounds(Const(1.0), samples=100)


class _Liar(Sin):
    def enclosure(self):
        return (-0.5, 0.5)


def test_bounds_inconsistent():
    with pytest.raises(InconsistentBounds):
        coeff_bounds(_Liar(1.0))


def test_from_dict_errors():
    with pytest.raises(ConfigError):
        from_dict({"tan": 1})
    with pytest.raises(ConfigError):
        from_dict({"sin": {}})
    with pytest.raises(ConfigError):
        from_dict("x")


def test_wire_format_example():
    d = {"sum": [{"const": 0.21}, {"scale": 0.01, "of": {"sin": {"omega": 1 / 3, "phase": 0}}}]}
    c = from_dict(d)
    assert c.evaluate(3.0) == pytest.approx(0.21 + 0.01 * math.sin(1.0))


leaf = st.one_of(
    st.floats(-3, 3).map(Const),
    st.builds(Sin, st.floats(0.1, 5), st.floats(-3, 3)),
    st.builds(Cos, st.floats(0.1, 5), st.floats(-3, 3)),
)
trees = st.recursive(
    leaf,
    lambda ch: st.one_of(
        ch.map(Abs),
        st.builds(Exp, st.floats(-0.5, 0.5), ch),
        st.lists(ch, min_size=1, max_size=3).map(lambda xs: Sum(tuple(xs))),
        st.builds(Scale, st.floats(-2, 2), ch),
    ),
    max_leaves=6,
)


@settings(max_examples=80, deadline=None)
@given(trees)
def test_tree_round_trip(tree):
    again = from_dict(json.loads(json.dumps(tree.to_dict())))
    assert again == tree


@settings(max_examples=80, deadline=None)
@given(trees, st.floats(-50, 50))
def test_compiled_matches_evaluate(tree, t):
    assert tree.compile()(t) == pytest.approx(float(tree.evaluate(t)), rel=1e-12, abs=1e-12)


@settings(max_examples=60, deadline=None)
@given(trees)
def test_enclosure_brackets_samples(tree):
    lo, hi = tree.enclosure()
    v = np.asarray(tree.evaluate(np.linspace(0, 60, 5001)))
    assert v.min() >= lo - 1e-9 and v.max() <= hi + 1e-9


# model -----------------------------------------------------------------------------------
def test_theta(ex51):
    assert theta(ex51) == pytest.approx(math.exp(0.6), abs=1e-9)
    zero = NicholsonModel.constant([0.2], 0, 0.1, 1.0, 0.0)
    assert theta(zero) == 0
    assert theta(NicholsonModel.constant([0.2], 0, 0.1, 1.0, 2.0)) == 2


def _const_hist(values, lo=-5.0, hi=0.0):
    return Trajectory.from_arrays([lo, hi], [values, values], t0=hi)


def test_rhs_equilibrium():
    d, p, a = 0.3, 0.9, 1.2
    m = NicholsonModel.constant([d], 0, p, a, 0.0)
    xs = equilibrium_constant(d, p, a)
    assert rhs(m, 0.0, [xs], _const_hist([xs])) == pytest.approx([0.0], abs=1e-15)


def test_rhs_pure_decay(ex51):
    m = NicholsonModel([ex51.c[0], ex51.c[1]], [[0, 0], [0, 0]], [[0, 0], [0, 0]], [[1, 1], [1, 1]],
                       [[1, 1], [1, 1]])
    t = 1.7
    out = rhs(m, t, [1, 1], _const_hist([1, 1], -5, t))
    assert out == pytest.approx([-ex51.c[0](t), -ex51.c[1](t)])


def test_rhs_example51_straight_line(ex51):
    x = [1.3, 1.3, 1.5]
    out = rhs(ex51, 0.0, x, _const_hist(x))
    # direct evaluation of the vector field at t = 0 with constant history
    c = [0.21, 0.30, 0.41]
    b = [[0, 0.04, 0.07], [0.06, 0, 0.05], [0.16, 0.14, 0]]
    beta = [[0.07, 0.16, 0.15], [0.07, 0.05, 0.10], [0.03, 0.042, 0.022]]
    alpha = [[0.91] * 3, [0.8, 1.0, 0.8], [0.8, 0.8, 0.8]]
    expect = []
    for i in range(3):
        v = -c[i] * x[i] + sum(b[i][k] * x[k] for k in range(3) if k != i)
        v += sum(beta[i][j] * x[i] * math.exp(-alpha[i][j] * x[i]) for j in range(3))
        expect.append(v)
    assert out == pytest.approx(expect, abs=1e-14)


def test_rhs_history_gap(ex51):
    with pytest.raises(HistoryGap):
        rhs(ex51, 0.0, [1, 1, 1], _const_hist([1, 1, 1], -0.5, 0.0))


def test_rhs_ignores_far_history(ex51):
    x = [1.3, 1.1, 1.5]
    short = Trajectory.from_arrays([-2.0, 0.0], [[1, 1, 1], [1.3, 1.1, 1.5]], t0=0.0)
    longer = Trajectory.from_arrays([-9.0, -2.0, 0.0], [[7, 7, 7], [1, 1, 1], [1.3, 1.1, 1.5]], t0=0.0)
    assert rhs(ex51, 0.0, x, short) == pytest.approx(rhs(ex51, 0.0, x, longer), abs=0)


@settings(max_examples=60, deadline=None)
@given(st.floats(0, 100), st.lists(st.floats(1.21, 2.72), min_size=3, max_size=3),
       st.lists(st.floats(1.21, 2.72), min_size=3, max_size=3))
def test_rhs_monotone_bound(ex51, ex51_extrema, t, x, h):
    e = ex51_extrema
    A1, A2 = 1.21, 2.72
    hist = Trajectory.from_arrays([t - 5, t], [h, x], t0=t)
    out = rhs(ex51, t, x, hist)
    for i in range(3):
        lo = -e.c_plus[i] * A2
        hi = -e.c_minus[i] * A1 + e.b_plus[i].sum() * A2 + np.sum(e.beta_plus[i] / (e.alpha_minus[i] * math.e))
        assert lo - 1e-12 <= out[i] <= hi + 1e-12


def test_model_round_trip(ex51):
    d = json.loads(json.dumps(ex51.to_dict()))
    again = NicholsonModel.from_dict(d)
    assert again == ex51


def test_model_from_dict_mismatch():
    with pytest.raises(ConfigError):
        NicholsonModel.from_dict({"n": 2, "c": [1], "b": [[0]], "beta": [[1]], "alpha": [[1]], "tau": [[1]]})


def test_scaled_family(ex51):
    m = ex51.scaled("beta", 10.0)
    assert m.beta[0][0](1.0) == pytest.approx(10 * ex51.beta[0][0](1.0))
    with pytest.raises(ConfigError):
        ex51.scaled("gamma", 2.0)
