"""Method-of-steps integration of the patch model on an arbitrary time scale.

Right-scattered nodes advance by the exact delta-Euler jump
``x(σ(t)) = x(t) + μ(t) f(t)``; dense stretches use classical RK4 with the
grid spacing as step and delayed values read from the stored history.
"""
from __future__ import annotations

import csv
import io
import math
from bisect import bisect_right
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .coefficients import Coefficient, Const, from_dict
from .errors import BlowUp, ConfigError, GridMismatch, HistoryGap, NotInScale
from .model import NicholsonModel, theta
from .timescale import TOL, Grid, TimeScale, build_grid

BLOWUP = 1e12


def default_max_step(model: NicholsonModel) -> float:
    th = theta(model)
    return min(0.05, th / 20.0) if th > 0 else 0.05


@dataclass(frozen=True)
class InitialCondition:
    """History phi_i on [t0 - theta, t0]; entries are constants or coefficient trees."""

    phi: tuple
    t0: float = 0.0

    def __post_init__(self):
        parts = []
        for p in self.phi:
            if isinstance(p, Coefficient):
                parts.append(p)
            elif isinstance(p, dict):
                parts.append(from_dict(p))
            elif callable(p):
                parts.append(p)
            else:
                parts.append(Const(float(p)))
        object.__setattr__(self, "phi", tuple(parts))

    @classmethod
    def constant(cls, values: Sequence[float], t0: float = 0.0) -> "InitialCondition":
        return cls(tuple(float(v) for v in values), float(t0))

    @property
    def n(self) -> int:
        return len(self.phi)

    def __call__(self, s: float) -> np.ndarray:
        return np.array([float(p(s)) for p in self.phi])

    def to_dict(self) -> dict:
        phi = []
        for p in self.phi:
            if isinstance(p, Const):
                phi.append(p.value)
            elif isinstance(p, Coefficient):
                phi.append(p.to_dict())
            else:
                raise ConfigError("only constant or expression-tree histories serialise")
        return {"t0": self.t0, "phi": phi}

    @classmethod
    def from_dict(cls, d) -> "InitialCondition":
        if isinstance(d, (list, tuple)):
            return cls(tuple(d), 0.0)
        try:
            return cls(tuple(d["phi"]), float(d.get("t0", 0.0)))
        except (KeyError, TypeError) as exc:
            raise ConfigError(f"malformed initial condition {d!r}") from exc


def _lookup(tlist, states, dense, count, s):
    """Row of ``states`` at time ``s``: exact at nodes, linear across dense
    steps, held from the left across scattered gaps."""
    if s < tlist[0] - TOL:
        raise HistoryGap(f"delayed time {s!r} precedes stored history starting at {tlist[0]!r}")
    k = bisect_right(tlist, s + TOL, 0, count) - 1
    tk = tlist[k]
    if s - tk <= TOL:
        return states[k]
    if k == count - 1:
        raise HistoryGap(f"time {s!r} lies beyond stored history ending at {tk!r}")
    if dense[k]:
        w = (s - tk) / (tlist[k + 1] - tk)
        return (1.0 - w) * states[k] + w * states[k + 1]
    return states[k]


@dataclass(frozen=True, eq=False)
class Trajectory:
    times: np.ndarray
    states: np.ndarray
    dense_right: np.ndarray
    t0: float
    provenance: dict = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "_tlist", [float(t) for t in self.times])
        if np.any(np.diff(self.times) <= 0):
            raise ValueError("trajectory times must be strictly increasing")

    @classmethod
    def from_arrays(cls, times, states, t0=None, dense=True, provenance=None) -> "Trajectory":
        times = np.asarray(times, dtype=float)
        states = np.asarray(states, dtype=float)
        if states.ndim == 1:
            states = states[:, None]
        flags = np.full(len(times), bool(dense))
        if len(flags):
            flags[-1] = False
        return cls(times, states, flags, float(times[0] if t0 is None else t0), provenance or {})

    @property
    def n(self) -> int:
        return self.states.shape[1]

    def __len__(self):
        return len(self.times)

    def lookup(self, s: float) -> np.ndarray:
        return _lookup(self._tlist, self.states, self.dense_right, len(self._tlist), s)

    def lookup_component(self, s: float, i: int) -> float:
        return float(self.lookup(s)[i])

    def index_of(self, t: float) -> int:
        k = int(np.searchsorted(self.times, t - TOL))
        if k < len(self.times) and abs(self.times[k] - t) <= TOL:
            return k
        raise NotInScale(f"{t!r} is not a trajectory sample time")

    def between(self, lo: float, hi: float) -> "Trajectory":
        m = (self.times >= lo - TOL) & (self.times <= hi + TOL)
        dense = self.dense_right[m].copy()
        if len(dense):
            dense[-1] = False
        return Trajectory(self.times[m], self.states[m], dense, self.t0, dict(self.provenance))

    def history(self) -> "Trajectory":
        return self.between(self.times[0], self.t0)

    def future(self) -> "Trajectory":
        return self.between(self.t0, self.times[-1])

    def to_csv(self, path=None) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["t"] + [f"x{i + 1}" for i in range(self.n)])
        for t, row in zip(self.times, self.states):
            w.writerow([f"{t:.17g}"] + [f"{v:.17g}" for v in row])
        text = buf.getvalue()
        if path is not None:
            with open(path, "w", newline="") as fh:
                fh.write(text)
        return text

    @classmethod
    def read_csv(cls, path, t0: float = 0.0) -> "Trajectory":
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
        data = np.array([[float(v) for v in r] for r in rows[1:]])
        return cls.from_arrays(data[:, 0], data[:, 1:], t0=t0)


def history_start(ts: TimeScale, t0: float, th: float) -> float:
    """Earliest node needed to answer delayed lookups at t0: the largest scale
    point not after t0 - theta."""
    s = ts.floor(t0 - th)
    if s is None:
        raise HistoryGap(f"scale window {ts.window} does not reach back to t0 - theta = {t0 - th!r}")
    return s


def simulate(model: NicholsonModel, ts: TimeScale, ic: InitialCondition, t_end: float,
             max_step: Optional[float] = None, grid: Optional[Grid] = None) -> Trajectory:
    if ic.n != model.n:
        raise ConfigError(f"initial condition has {ic.n} components, model has {model.n}")
    t0 = ic.t0
    th = theta(model)
    start = history_start(ts, t0, th)
    if grid is None:
        grid = build_grid(ts, (start, t_end), max_step or default_max_step(model), anchors=(t0,))
    else:
        grid = grid.slice(start, t_end)
    times = grid.points
    k0 = grid.index_of(t0)
    N, n = len(times), model.n

    tlist = times.tolist()
    dense = grid.right_dense.copy()
    dense[-1] = False
    X = np.empty((N, n))
    for k in range(k0 + 1):
        X[k] = ic(tlist[k])
    if np.any(X[: k0 + 1] <= 0):
        raise ConfigError("initial history must be positive")

    F = model.compiled

    for k in range(k0, N - 1):
        t, x = tlist[k], X[k]
        count = k + 1

        def stored(s, i, _c=count):
            return _lookup(tlist, X, dense, _c, s)[i]

        if grid.right_scattered[k]:
            X[k + 1] = x + grid.mu[k] * F(t, x, stored)
        else:
            h = tlist[k + 1] - t
            k1 = F(t, x, stored)

            def stage(ts_, y):
                def delayed(s, i):
                    if s <= t + TOL:
                        return stored(s, i)
                    if abs(s - ts_) <= TOL:
                        return y[i]
                    # inside the current step: Euler predictor
                    return x[i] + (s - t) * k1[i]
                return F(ts_, y, delayed)

            y2 = x + 0.5 * h * k1
            k2 = stage(t + 0.5 * h, y2)
            y3 = x + 0.5 * h * k2
            k3 = stage(t + 0.5 * h, y3)
            y4 = x + h * k3
            k4 = stage(t + h, y4)
            X[k + 1] = x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)

        if not np.all(np.isfinite(X[k + 1])) or np.max(np.abs(X[k + 1])) > BLOWUP:
            raise BlowUp(f"state left the finite range at t={tlist[k + 1]!r}")

    prov = {
        "model": model.name,
        "scale": repr(ts),
        "max_step": grid.max_step,
        "t0": t0,
        "t_end": float(times[-1]),
        "theta": th,
    }
    return Trajectory(times, X, dense, t0, prov)


def pair_deviation(traj_a: Trajectory, traj_b: Trajectory) -> tuple[np.ndarray, np.ndarray]:
    """Sup-norm difference max_i |a_i(t) - b_i(t)| at each shared sample."""
    if traj_a.times.shape != traj_b.times.shape or np.any(np.abs(traj_a.times - traj_b.times) > TOL):
        raise GridMismatch("trajectories are not sampled on the same grid")
    if traj_a.n != traj_b.n:
        raise GridMismatch("trajectories have different dimensions")
    return traj_a.times.copy(), np.max(np.abs(traj_a.states - traj_b.states), axis=1)
