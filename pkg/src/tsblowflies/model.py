"""The delayed Nicholson patch system

    x_i^Δ(t) = -c_i(t) x_i(t) + sum_{k != i} b_ik(t) x_k(t)
               + sum_j beta_ij(t) x_i(t - tau_ij(t)) exp(-alpha_ij(t) x_i(t - tau_ij(t)))
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from functools import cached_property
from typing import Callable, Optional, Sequence

import numpy as np

from .coefficients import DEFAULT_HORIZON, DEFAULT_SAMPLES, Coefficient, Const, Scale, coeff_bounds, from_dict
from .errors import ConfigError, HistoryGap

FAMILIES = ("c", "b", "beta", "alpha", "tau")


def _coef(x) -> Coefficient:
    if isinstance(x, Coefficient):
        return x
    if isinstance(x, dict):
        return from_dict(x)
    return Const(float(x))


def _matrix(rows, n, name, diagonal=True):
    rows = list(rows)
    if len(rows) != n or any(len(r) != n for r in rows):
        raise ConfigError(f"{name} must be an {n}x{n} matrix")
    out = []
    for i, r in enumerate(rows):
        row = []
        for k, x in enumerate(r):
            if not diagonal and i == k:
                row.append(None)
            else:
                row.append(_coef(x))
        out.append(tuple(row))
    return tuple(out)


@dataclass(frozen=True)
class Extrema:
    """Infima and suprema of every coefficient; off-diagonal only for b."""

    c_minus: np.ndarray
    c_plus: np.ndarray
    b_minus: np.ndarray
    b_plus: np.ndarray
    beta_minus: np.ndarray
    beta_plus: np.ndarray
    alpha_minus: np.ndarray
    alpha_plus: np.ndarray
    tau_minus: np.ndarray
    tau_plus: np.ndarray
    source: str = "recomputed"

    def __post_init__(self):
        for name in self.fields():
            arr = np.array(getattr(self, name), dtype=float)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        n = self.n
        np.fill_diagonal(off := self.b_minus.copy(), 0.0)
        object.__setattr__(self, "b_minus", off)
        np.fill_diagonal(off := self.b_plus.copy(), 0.0)
        object.__setattr__(self, "b_plus", off)
        for name in self.fields():
            getattr(self, name).setflags(write=False)
            expected = (n,) if name.startswith("c_") else (n, n)
            if getattr(self, name).shape != expected:
                raise ConfigError(f"{name} has shape {getattr(self, name).shape}, expected {expected}")

    @staticmethod
    def fields():
        return ("c_minus", "c_plus", "b_minus", "b_plus", "beta_minus", "beta_plus",
                "alpha_minus", "alpha_plus", "tau_minus", "tau_plus")

    @property
    def n(self) -> int:
        return len(self.c_minus)

    def with_values(self, source: Optional[str] = None, **updates) -> "Extrema":
        """Copy with some entries replaced: ``beta_plus={(2, 0): 0.06}``."""
        kw = {name: np.array(getattr(self, name)) for name in self.fields()}
        for name, entries in updates.items():
            for idx, val in entries.items():
                kw[name][idx] = val
        return Extrema(**kw, source=source or self.source)

    def to_dict(self) -> dict:
        d = {name: getattr(self, name).tolist() for name in self.fields()}
        d["source"] = self.source
        return d


@dataclass(frozen=True)
class NicholsonModel:
    c: tuple
    b: tuple
    beta: tuple
    alpha: tuple
    tau: tuple
    name: str = "nicholson"
    horizon: float = field(default=DEFAULT_HORIZON, compare=False)
    samples: int = field(default=DEFAULT_SAMPLES, compare=False)

    def __post_init__(self):
        n = len(self.c)
        if n < 1:
            raise ConfigError("model needs at least one patch")
        object.__setattr__(self, "c", tuple(_coef(x) for x in self.c))
        object.__setattr__(self, "b", _matrix(self.b, n, "b", diagonal=False))
        for name in ("beta", "alpha", "tau"):
            object.__setattr__(self, name, _matrix(getattr(self, name), n, name))

    @property
    def n(self) -> int:
        return len(self.c)

    @classmethod
    def constant(cls, c, b, beta, alpha, tau, name="constant") -> "NicholsonModel":
        """Build from numeric arrays (scalars broadcast for n = 1)."""
        c = np.atleast_1d(np.asarray(c, dtype=float))
        n = len(c)

        def sq(x):
            return np.broadcast_to(np.asarray(x, dtype=float), (n, n)).tolist()

        return cls(c.tolist(), sq(b), sq(beta), sq(alpha), sq(tau), name=name)

    @cached_property
    def extrema(self) -> Extrema:
        return self.compute_extrema(self.horizon, self.samples)

    def compute_extrema(self, horizon=DEFAULT_HORIZON, samples=DEFAULT_SAMPLES) -> Extrema:
        n = self.n

        def bounds(coef):
            return coeff_bounds(coef, horizon, samples)

        c = np.array([bounds(x) for x in self.c])
        mats = {}
        for name in ("b", "beta", "alpha", "tau"):
            lo = np.zeros((n, n))
            hi = np.zeros((n, n))
            for i, row in enumerate(getattr(self, name)):
                for j, coef in enumerate(row):
                    if coef is None:
                        continue
                    lo[i, j], hi[i, j] = bounds(coef)
            mats[name] = (lo, hi)
        return Extrema(
            c[:, 0], c[:, 1], *mats["b"], *mats["beta"], *mats["alpha"], *mats["tau"],
            source=f"recomputed(horizon={horizon:g}, samples={samples})",
        )

    def scaled(self, family: str, factor: float, index=None) -> "NicholsonModel":
        """Multiply one coefficient family (or one entry of it) by ``factor``."""
        if family not in FAMILIES:
            raise ConfigError(f"unknown coefficient family {family!r}")
        k = float(factor)
        if family == "c":
            c = tuple(Scale(k, x) if index is None or i == index else x for i, x in enumerate(self.c))
            return replace(self, c=c, name=f"{self.name}*c")
        rows = []
        for i, row in enumerate(getattr(self, family)):
            new = []
            for j, x in enumerate(row):
                hit = index is None or (i, j) == tuple(index)
                new.append(Scale(k, x) if (x is not None and hit) else x)
            rows.append(new)
        if family == "b":
            rows = [[0.0 if x is None else x for x in r] for r in rows]
        return replace(self, **{family: rows}, name=f"{self.name}*{family}")

    def to_dict(self) -> dict:
        def mat(m):
            return [[None if x is None else x.to_dict() for x in r] for r in m]

        return {
            "name": self.name,
            "n": self.n,
            "c": [x.to_dict() for x in self.c],
            "b": mat(self.b),
            "beta": mat(self.beta),
            "alpha": mat(self.alpha),
            "tau": mat(self.tau),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "NicholsonModel":
        try:
            n = int(d.get("n", len(d["c"])))
            if len(d["c"]) != n:
                raise ConfigError(f"n={n} but {len(d['c'])} entries in c")
            b = [[0.0 if x is None else x for x in r] for r in d["b"]]
            return cls(d["c"], b, d["beta"], d["alpha"], d["tau"], name=d.get("name", "nicholson"))
        except KeyError as exc:
            raise ConfigError(f"model is missing field {exc}") from exc

    @cached_property
    def compiled(self) -> "CompiledRHS":
        return CompiledRHS(self)


def theta(model: NicholsonModel) -> float:
    """Maximal delay: the largest supremum over all tau_ij."""
    return float(model.extrema.tau_plus.max())


class CompiledRHS:
    """Scalar closures for the vector field; ``delayed(s, i)`` supplies x_i(s)."""

    def __init__(self, model: NicholsonModel):
        n = model.n
        self.n = n
        self.c = [f.compile() for f in model.c]
        self.b = [[(k, model.b[i][k].compile()) for k in range(n) if k != i] for i in range(n)]
        self.growth = [
            [(model.beta[i][j].compile(), model.alpha[i][j].compile(), model.tau[i][j].compile()) for j in range(n)]
            for i in range(n)
        ]

    def __call__(self, t: float, x, delayed: Callable[[float, int], float]) -> np.ndarray:
        out = np.empty(self.n)
        exp = math.exp
        for i in range(self.n):
            acc = -self.c[i](t) * x[i]
            for k, bik in self.b[i]:
                acc += bik(t) * x[k]
            for beta, alpha, tau in self.growth[i]:
                d = delayed(t - tau(t), i)
                acc += beta(t) * d * exp(-alpha(t) * d)
            out[i] = acc
        return out


def rhs(model: NicholsonModel, t: float, x: Sequence[float], hist) -> np.ndarray:
    """Vector field at ``t`` with delayed values read from ``hist``.

    ``hist`` needs a ``lookup_component(s, i)`` method (a Trajectory does).
    """
    x = np.asarray(x, dtype=float)
    return model.compiled(t, x, hist.lookup_component)


def equilibrium_constant(delta: float, p: float, a: float) -> float:
    """Positive equilibrium ln(p/delta)/a of the scalar constant-coefficient model."""
    if p <= delta:
        raise ValueError("positive equilibrium needs p > delta")
    return math.log(p / delta) / a
