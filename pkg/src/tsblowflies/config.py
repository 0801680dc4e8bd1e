"""Run configuration: a single JSON document describing scale, grid, model,
initial data and run parameters."""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Optional

from . import presets
from .errors import ConfigError
from .model import FAMILIES, NicholsonModel, theta
from .simulator import InitialCondition
from .timescale import (ClosedInterval, ExplicitWindow, Integers, IsolatedPoint, Reals, ScaleFamily,
                        StepScale, TimeScale, UnionFamily)

PRESETS = {"example51": presets.example51}


def scale_from_config(desc: dict) -> ScaleFamily:
    try:
        kind = desc["kind"]
        if kind == "reals":
            return Reals()
        if kind == "integers":
            return Integers()
        if kind == "step":
            return StepScale(float(desc["h"]), float(desc.get("offset", 0.0)))
        if kind == "union":
            return UnionFamily(scale_from_config(desc["base"]), tuple(float(p) for p in desc.get("points", ())))
        if kind == "explicit":
            segs = [ClosedInterval(float(a), float(b)) for a, b in desc.get("intervals", ())]
            segs += [IsolatedPoint(float(p)) for p in desc.get("points", ())]
            return ExplicitWindow(TimeScale(segs))
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"malformed scale description {desc!r}: {exc}") from exc
    raise ConfigError(f"unknown scale kind {desc.get('kind')!r}")


def _model_from_config(desc: dict) -> NicholsonModel:
    if "preset" not in desc:
        return NicholsonModel.from_dict(desc)
    name = desc["preset"]
    if name not in PRESETS:
        raise ConfigError(f"unknown preset {name!r}")
    model = PRESETS[name]()
    for fam, value in sorted(desc.get("override", {}).items()):
        if fam not in FAMILIES:
            raise ConfigError(f"unknown coefficient family {fam!r}")
        d = model.to_dict()
        if fam == "c":
            d["c"] = [{"const": float(value)}] * model.n
        else:
            d[fam] = [[None if x is None else {"const": float(value)} for x in row] for row in d[fam]]
        model = NicholsonModel.from_dict(d)
    for fam, factor in sorted(desc.get("scale", {}).items()):
        model = model.scaled(fam, float(factor))
    return model


@dataclass
class RunConfig:
    scale: dict
    model: dict
    initial_conditions: list
    grid: dict = field(default_factory=dict)
    run: dict = field(default_factory=dict)
    output: str = "out"

    # derived objects -------------------------------------------------------
    def scale_family(self) -> ScaleFamily:
        return scale_from_config(self.scale)

    def build_model(self) -> NicholsonModel:
        return _model_from_config(self.model)

    def ics(self) -> list[InitialCondition]:
        t0 = self.t0
        out = []
        for d in self.initial_conditions:
            ic = InitialCondition.from_dict(d)
            if isinstance(d, (list, tuple)):
                ic = InitialCondition(ic.phi, t0)
            out.append(ic)
        if not out:
            raise ConfigError("at least one initial condition is required")
        return out

    @property
    def t0(self) -> float:
        return float(self.run.get("t0", 0.0))

    @property
    def t_end(self) -> float:
        return float(self.run.get("t_end", 200.0))

    @property
    def max_step(self) -> Optional[float]:
        v = self.grid.get("max_step")
        return None if v is None else float(v)

    def window(self, model: NicholsonModel) -> tuple[float, float]:
        w = self.grid.get("window")
        need = (self.t0 - theta(model), self.t_end)
        if w is None:
            return need[0] - 2.0, need[1]
        lo, hi = float(w[0]), float(w[1])
        if lo > need[0] + 1e-9 or hi < need[1] - 1e-9:
            raise ConfigError(f"grid window {w!r} does not cover [t0 - theta, t_end] = {list(need)!r}")
        return lo, hi

    def param(self, key: str, default=None):
        return self.run.get(key, default)

    # serialisation ---------------------------------------------------------
    def to_dict(self) -> dict:
        return {
            "scale": self.scale,
            "grid": self.grid,
            "model": self.model,
            "initial_conditions": self.initial_conditions,
            "run": self.run,
            "output": self.output,
        }

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    @classmethod
    def from_dict(cls, d: dict) -> "RunConfig":
        if not isinstance(d, dict):
            raise ConfigError("config must be a JSON object")
        missing = [k for k in ("scale", "model", "initial_conditions") if k not in d]
        if missing:
            raise ConfigError(f"config is missing {', '.join(missing)}")
        unknown = set(d) - {"scale", "grid", "model", "initial_conditions", "run", "output"}
        if unknown:
            raise ConfigError(f"unknown config keys {sorted(unknown)}")
        cfg = cls(d["scale"], d["model"], list(d["initial_conditions"]), dict(d.get("grid", {})),
                  dict(d.get("run", {})), str(d.get("output", "out")))
        cfg.validate()
        return cfg

    @classmethod
    def loads(cls, text: str) -> "RunConfig":
        try:
            return cls.from_dict(json.loads(text))
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config is not valid JSON: {exc}") from exc

    @classmethod
    def load(cls, path) -> "RunConfig":
        try:
            with open(path) as fh:
                return cls.loads(fh.read())
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc

    def validate(self) -> None:
        self.scale_family()
        model = self.build_model()
        for ic in self.ics():
            if ic.n != model.n:
                raise ConfigError(f"initial condition has {ic.n} components, model has {model.n}")
        self.window(model)


def example51_config(scale: str = "reals") -> RunConfig:
    """Bundled configuration for the three-patch worked example."""
    ic = presets.IC_REALS if scale == "reals" else presets.IC_INTEGERS
    other = (1.6, 1.0, 1.9) if scale == "reals" else (1.5, 1.4, 2.0)
    return RunConfig(
        scale={"kind": scale},
        model={"preset": "example51"},
        initial_conditions=[list(ic), list(other)],
        grid={"max_step": 0.05},
        run={
            "t0": 0.0, "t_end": 200.0, "A1": presets.A1, "A2": presets.A2,
            "eps": 0.05, "candidates": [1.0, 2.0, 5.0, 10.0, 20.0, 30.0, 40.0], "transient": 50.0,
            "ic_integers": list(presets.IC_INTEGERS),
        },
        output="out",
    )
