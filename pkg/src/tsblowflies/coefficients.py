"""Expression trees for quasi-periodic scalar coefficients.

Nodes evaluate on scalars or numpy arrays, know an interval enclosure of
their range, and serialise to nested tagged dicts such as::

    {"sum": [{"const": 0.21},
             {"scale": 0.01, "of": {"sin": {"omega": 0.333, "phase": 0}}}]}
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Any, Callable

import numpy as np

from .errors import ConfigError, InconsistentBounds

DEFAULT_HORIZON = 500.0
DEFAULT_SAMPLES = 200_000
SNAP_TOL = 1e-3


class Coefficient:
    """Base node.  Subclasses are frozen dataclasses."""

    def __call__(self, t):
        return self.evaluate(t)

    def evaluate(self, t):  # pragma: no cover - abstract
        raise NotImplementedError

    def compile(self) -> Callable[[float], float]:
        """A fast scalar evaluator built from ``math`` functions."""
        raise NotImplementedError  # pragma: no cover

    def enclosure(self) -> tuple[float, float]:
        """Interval-arithmetic bounds valid for every real t."""
        raise NotImplementedError  # pragma: no cover

    def frequencies(self) -> list[float]:
        return []

    def to_dict(self) -> dict:
        raise NotImplementedError  # pragma: no cover

    # arithmetic sugar for building trees by hand
    def __add__(self, other):
        return Sum((self, _wrap(other)))

    def __radd__(self, other):
        return Sum((_wrap(other), self))

    def __mul__(self, k):
        return Scale(float(k), self)

    __rmul__ = __mul__


def _wrap(x) -> Coefficient:
    return x if isinstance(x, Coefficient) else Const(float(x))


@dataclass(frozen=True)
class Const(Coefficient):
    value: float

    def evaluate(self, t):
        return self.value + 0.0 * np.asarray(t, dtype=float) if np.ndim(t) else self.value

    def compile(self):
        v = self.value
        return lambda t: v

    def enclosure(self):
        return (self.value, self.value)

    def to_dict(self):
        return {"const": self.value}


@dataclass(frozen=True)
class Sin(Coefficient):
    omega: float
    phase: float = 0.0

    def evaluate(self, t):
        return np.sin(self.omega * np.asarray(t, dtype=float) + self.phase) if np.ndim(t) else math.sin(
            self.omega * t + self.phase)

    def compile(self):
        w, ph, sin = self.omega, self.phase, math.sin
        return lambda t: sin(w * t + ph)

    def enclosure(self):
        return (-1.0, 1.0) if self.omega != 0 else (math.sin(self.phase),) * 2

    def frequencies(self):
        return [abs(self.omega)]

    def to_dict(self):
        return {"sin": {"omega": self.omega, "phase": self.phase}}


@dataclass(frozen=True)
class Cos(Coefficient):
    omega: float
    phase: float = 0.0

    def evaluate(self, t):
        return np.cos(self.omega * np.asarray(t, dtype=float) + self.phase) if np.ndim(t) else math.cos(
            self.omega * t + self.phase)

    def compile(self):
        w, ph, cos = self.omega, self.phase, math.cos
        return lambda t: cos(w * t + ph)

    def enclosure(self):
        return (-1.0, 1.0) if self.omega != 0 else (math.cos(self.phase),) * 2

    def frequencies(self):
        return [abs(self.omega)]

    def to_dict(self):
        return {"cos": {"omega": self.omega, "phase": self.phase}}


@dataclass(frozen=True)
class Abs(Coefficient):
    child: Coefficient

    def evaluate(self, t):
        v = self.child.evaluate(t)
        return np.abs(v) if np.ndim(v) else abs(v)

    def compile(self):
        f = self.child.compile()
        return lambda t: abs(f(t))

    def enclosure(self):
        lo, hi = self.child.enclosure()
        if lo >= 0:
            return (lo, hi)
        if hi <= 0:
            return (-hi, -lo)
        return (0.0, max(-lo, hi))

    def frequencies(self):
        return self.child.frequencies()

    def to_dict(self):
        return {"abs": self.child.to_dict()}


@dataclass(frozen=True)
class Exp(Coefficient):
    """exp(scale * child)."""

    scale: float
    child: Coefficient

    def evaluate(self, t):
        v = self.child.evaluate(t)
        return np.exp(self.scale * v) if np.ndim(v) else math.exp(self.scale * v)

    def compile(self):
        k, f, exp = self.scale, self.child.compile(), math.exp
        return lambda t: exp(k * f(t))

    def enclosure(self):
        lo, hi = self.child.enclosure()
        a, b = sorted((self.scale * lo, self.scale * hi))
        return (math.exp(a), math.exp(b))

    def frequencies(self):
        return self.child.frequencies()

    def to_dict(self):
        return {"exp": {"scale": self.scale, "of": self.child.to_dict()}}


@dataclass(frozen=True)
class Sum(Coefficient):
    children: tuple

    def __post_init__(self):
        object.__setattr__(self, "children", tuple(self.children))

    def evaluate(self, t):
        total = 0.0
        for c in self.children:
            total = total + c.evaluate(t)
        return total

    def compile(self):
        fs = tuple(c.compile() for c in self.children)
        if len(fs) == 2:
            f0, f1 = fs
            return lambda t: f0(t) + f1(t)
        return lambda t: sum(f(t) for f in fs)

    def enclosure(self):
        los, his = zip(*(c.enclosure() for c in self.children)) if self.children else ((0.0,), (0.0,))
        return (math.fsum(los), math.fsum(his))

    def frequencies(self):
        return [w for c in self.children for w in c.frequencies()]

    def to_dict(self):
        return {"sum": [c.to_dict() for c in self.children]}


@dataclass(frozen=True)
class Scale(Coefficient):
    k: float
    child: Coefficient

    def evaluate(self, t):
        return self.k * self.child.evaluate(t)

    def compile(self):
        k, f = self.k, self.child.compile()
        return lambda t: k * f(t)

    def enclosure(self):
        lo, hi = self.child.enclosure()
        a, b = self.k * lo, self.k * hi
        return (min(a, b), max(a, b))

    def frequencies(self):
        return self.child.frequencies()

    def to_dict(self):
        return {"scale": self.k, "of": self.child.to_dict()}


def from_dict(d: Any) -> Coefficient:
    """Parse the tagged-record form produced by ``to_dict``.

    A bare number is accepted as a constant.
    """
    if isinstance(d, (int, float)) and not isinstance(d, bool):
        return Const(float(d))
    if not isinstance(d, dict):
        raise ConfigError(f"coefficient must be a number or a tagged record, got {d!r}")
    try:
        if "const" in d:
            return Const(float(d["const"]))
        if "sin" in d:
            return Sin(float(d["sin"]["omega"]), float(d["sin"].get("phase", 0.0)))
        if "cos" in d:
            return Cos(float(d["cos"]["omega"]), float(d["cos"].get("phase", 0.0)))
        if "abs" in d:
            return Abs(from_dict(d["abs"]))
        if "exp" in d:
            return Exp(float(d["exp"].get("scale", 1.0)), from_dict(d["exp"]["of"]))
        if "sum" in d:
            return Sum(tuple(from_dict(c) for c in d["sum"]))
        if "scale" in d:
            return Scale(float(d["scale"]), from_dict(d["of"]))
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"malformed coefficient record {d!r}: {exc}") from exc
    raise ConfigError(f"unknown coefficient tag in {d!r}")


def eval_coeff(coef: Coefficient, t):
    return coef.evaluate(t)


def sampled_range(coef: Coefficient, horizon: float = DEFAULT_HORIZON,
                  samples: int = DEFAULT_SAMPLES, start: float = 0.0) -> tuple[float, float]:
    t = np.linspace(start, start + horizon, int(samples))
    v = np.broadcast_to(np.asarray(coef.evaluate(t), dtype=float), t.shape)
    return float(v.min()), float(v.max())


def coeff_bounds(coef: Coefficient, horizon: float = DEFAULT_HORIZON,
                 samples: int = DEFAULT_SAMPLES, start: float = 0.0) -> tuple[float, float]:
    """Estimate (inf, sup) of ``coef`` over the real line.

    Dense sampling is compared with the analytic enclosure; a sampled extreme
    within SNAP_TOL of the enclosure is reported as the enclosure value.
    """
    if samples < 10_000:
        raise ValueError("coeff_bounds needs at least 1e4 samples")
    s_lo, s_hi = sampled_range(coef, horizon, samples, start)
    a_lo, a_hi = coef.enclosure()
    if s_lo < a_lo - 1e-6 or s_hi > a_hi + 1e-6:
        raise InconsistentBounds(
            f"sampled range [{s_lo}, {s_hi}] escapes the analytic enclosure [{a_lo}, {a_hi}]")
    lo = a_lo if s_lo - a_lo <= SNAP_TOL else s_lo
    hi = a_hi if a_hi - s_hi <= SNAP_TOL else s_hi
    return lo, hi
