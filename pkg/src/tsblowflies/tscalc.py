"""Delta calculus on time scales: regressivity, the circle group, the
generalised exponential, delta integrals and delta derivatives.

Every routine walks the nodes of a :class:`~tsblowflies.timescale.Grid`.  A
step leaving a right-scattered node is handled exactly from the scale's
graininess; a step inside a dense interval uses the trapezoid rule.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .errors import NonRegressivePoint, NotInScale, WindowEdgeWarning
from .timescale import TOL, Grid, TimeScale

REG_TOL = 1e-12


@dataclass(frozen=True)
class RdFunction:
    """A right-dense continuous function given by its evaluator."""

    evaluator: Callable[[float], float]
    bounds: Optional[tuple[float, float]] = None

    def __call__(self, t):
        return self.evaluator(t)


def as_function(p) -> Callable[[float], float]:
    if callable(p):
        return p
    v = float(p)
    return lambda t: v


def cylinder(h: float, z: float) -> float:
    """Cylinder transform xi_h(z): z when h == 0, log(1 + h z)/h otherwise."""
    if h == 0.0:
        return z
    if h < 0:
        raise ValueError("graininess must be nonnegative")
    w = 1.0 + h * z
    if w <= 0.0:
        raise NonRegressivePoint(f"1 + h*z = {w!r} <= 0 (h={h!r}, z={z!r})")
    return math.log1p(h * z) / h


def circle_plus(p: float, q: float, mu_t: float) -> float:
    return p + q + mu_t * p * q


def circle_minus(p: float, mu_t: float) -> float:
    w = 1.0 + mu_t * p
    if abs(w) <= REG_TOL:
        raise NonRegressivePoint(f"1 + mu*p = {w!r} at mu={mu_t!r}")
    return -p / w


class GraininessFunction:
    """A function of (t, mu(t)) on a scale.

    ``left_limit`` evaluates with mu = 0, which is the limit from the left at
    a left-dense point; quadrature over a dense step ending at a
    right-scattered point must use it.
    """

    def __init__(self, rule: Callable[[float, float], float], ts: TimeScale):
        self.rule = rule
        self.ts = ts

    def __call__(self, t):
        return self.rule(t, self.ts.mu(t))

    def left_limit(self, t):
        return self.rule(t, 0.0)


def ominus(p, ts: TimeScale) -> GraininessFunction:
    """The function t -> (⊖p)(t) on ``ts``."""
    f = as_function(p)
    return GraininessFunction(lambda t, m: circle_minus(f(t), m), ts)


def oplus(p, q, ts: TimeScale) -> GraininessFunction:
    f, g = as_function(p), as_function(q)
    return GraininessFunction(lambda t, m: circle_plus(f(t), g(t), m), ts)


def is_regressive(p, ts: TimeScale, grid: Grid) -> bool:
    f = as_function(p)
    return all(abs(1.0 + m * f(t)) > REG_TOL for t, m in zip(grid.points, grid.mu))


def is_positively_regressive(p, ts: TimeScale, grid: Grid) -> bool:
    f = as_function(p)
    return all(1.0 + m * f(t) > 0.0 for t, m in zip(grid.points, grid.mu))


def _nodes(a: float, b: float, ts: TimeScale, grid: Grid) -> list[float]:
    for x in (a, b):
        if x not in ts:
            raise NotInScale(f"{x!r} is not in {ts!r}")
    inner = grid.points[(grid.points > a + TOL) & (grid.points < b - TOL)]
    return [a, *inner.tolist(), b] if b - a > TOL else [a]


def _log_increments(f, nodes, ts):
    """Per-step log|factor| and sign of e_f between consecutive nodes."""
    n = max(len(nodes) - 1, 0)
    logs = np.zeros(n)
    signs = np.ones(n)
    left = getattr(f, "left_limit", f)
    for k in range(n):
        u, v = nodes[k], nodes[k + 1]
        m = ts.mu(u)
        if m > 0.0:
            w = 1.0 + m * f(u)
            if abs(w) <= REG_TOL:
                raise NonRegressivePoint(f"1 + mu*p = {w!r} at t={u!r}")
            logs[k] = math.log(abs(w))
            signs[k] = 1.0 if w > 0 else -1.0
        else:
            logs[k] = 0.5 * (f(u) + left(v)) * (v - u)
    return logs, signs


def ts_exp(p, t: float, s: float, ts: TimeScale, grid: Grid) -> float:
    """Generalised exponential e_p(t, s), accumulated in log space."""
    if s > t:
        return 1.0 / ts_exp(p, s, t, ts, grid)
    f = as_function(p)
    logs, signs = _log_increments(f, _nodes(s, t, ts, grid), ts)
    return float(np.prod(signs)) * math.exp(math.fsum(logs))


def ts_exp_series(p, times, ts: TimeScale) -> np.ndarray:
    """e_p(times[k], times[0]) for consecutive scale nodes ``times``."""
    f = as_function(p)
    logs, signs = _log_increments(f, [float(x) for x in times], ts)
    acc = np.concatenate(([0.0], np.cumsum(logs)))
    sgn = np.concatenate(([1.0], np.cumprod(signs)))
    return sgn * np.exp(acc)


def delta_integral(f, a: float, b: float, ts: TimeScale, grid: Grid) -> float:
    """Delta integral of ``f`` over [a, b) on the scale."""
    if a > b:
        raise ValueError("need a <= b")
    g = as_function(f)
    nodes = _nodes(a, b, ts, grid)
    left = getattr(g, "left_limit", g)
    terms = []
    for k in range(len(nodes) - 1):
        u, v = nodes[k], nodes[k + 1]
        m = ts.mu(u)
        terms.append(g(u) * m if m > 0.0 else 0.5 * (g(u) + left(v)) * (v - u))
    return math.fsum(terms)


def delta_derivative(f, t: float, ts: TimeScale, grid: Grid) -> float:
    """Delta derivative at ``t``: exact forward quotient at right-scattered
    points, a finite difference with the local grid spacing otherwise."""
    g = as_function(f)
    m = ts.mu(t)
    if m > 0.0:
        return (g(ts.sigma(t)) - g(t)) / m

    k = int(np.searchsorted(grid.points, t))
    gaps = np.diff(grid.points[max(k - 1, 0):k + 2])
    gaps = gaps[gaps > TOL]
    h = float(gaps.min()) if len(gaps) else grid.max_step
    h = min(h, grid.max_step)

    seg = ts._find(t)
    fwd = ts._find(t + h) == seg
    bwd = ts._find(t - h) == seg
    if fwd and bwd:
        return (g(t + h) - g(t - h)) / (2.0 * h)
    if fwd:
        warnings.warn(f"one-sided forward difference at t={t!r}", WindowEdgeWarning, stacklevel=2)
        return (g(t + h) - g(t)) / h
    if bwd:
        warnings.warn(f"one-sided backward difference at t={t!r}", WindowEdgeWarning, stacklevel=2)
        return (g(t) - g(t - h)) / h
    raise NotInScale(f"no neighbourhood of {t!r} inside the scale")
