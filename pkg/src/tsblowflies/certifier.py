"""Mechanical evaluation of the sufficient conditions H1-H5, the invariant box
[A1, A2], and the constants of the exponential-stability estimate.

All routines accept either a :class:`NicholsonModel` (whose extrema are then
recomputed from the coefficient formulas) or an :class:`Extrema` table.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Optional, Union

import numpy as np

from .errors import H2Violated, H5Violated, Infeasible
from .model import Extrema, NicholsonModel
from .roots import bisect
from .timescale import Grid, TimeScale

INV_E = math.exp(-1.0)
INV_E2 = math.exp(-2.0)
ALPHA_FRACTION = 0.9
DIVERGENCE_TOL = 1e-3

Source = Union[NicholsonModel, Extrema]


def _ext(obj: Source) -> Extrema:
    if isinstance(obj, Extrema):
        return obj
    if isinstance(obj, NicholsonModel):
        return obj.extrema
    raise TypeError(f"expected NicholsonModel or Extrema, got {type(obj).__name__}")


# the constant varsigma --------------------------------------------------------
def _varsigma_residual(x: float) -> float:
    return (1.0 - x) * math.exp(-x) - INV_E2


@lru_cache(maxsize=None)
def varsigma() -> float:
    """Unique root in (0, 1) of (1 - x) e^{-x} = e^{-2}."""
    return bisect(_varsigma_residual, 0.0, 1.0, xtol=1e-16)


# per-patch conditions -----------------------------------------------------------
@dataclass(frozen=True)
class PatchValues:
    values: np.ndarray
    margins: np.ndarray

    @property
    def holds(self) -> bool:
        return bool(np.all(self.margins > 0))

    @property
    def margin(self) -> float:
        return float(self.margins.min())


def check_H2(obj: Source) -> PatchValues:
    """Per-patch ratios sum_{k != i} b_ik^+ / c_i^-, with margins 1 - ratio."""
    e = _ext(obj)
    ratios = e.b_plus.sum(axis=1) / e.c_minus
    return PatchValues(ratios, 1.0 - ratios)


def check_H5(obj: Source) -> PatchValues:
    """Per-patch sums sum b_ik^+ + sum beta_ij^+ / e^2, with margins c_i^- - sum."""
    e = _ext(obj)
    sums = e.b_plus.sum(axis=1) + e.beta_plus.sum(axis=1) * INV_E2
    return PatchValues(sums, e.c_minus - sums)


def a2_components(obj: Source) -> np.ndarray:
    e = _ext(obj)
    bracket = 1.0 - e.b_plus.sum(axis=1) / e.c_minus
    if np.any(bracket <= 0):
        raise H2Violated(f"1 - sum b^+/c^- is not positive for patches {np.flatnonzero(bracket <= 0).tolist()}")
    growth = (e.beta_plus / (e.c_minus[:, None] * e.alpha_minus * math.e)).sum(axis=1)
    return growth / bracket


def a2_threshold(obj: Source) -> float:
    """Lower bound that the invariant-box ceiling A2 must exceed."""
    return float(a2_components(obj).max())


@dataclass(frozen=True)
class A1Bounds:
    lo: float
    hi: float
    components: np.ndarray
    brackets: np.ndarray
    variant: str

    @property
    def feasible(self) -> bool:
        return self.lo < self.hi


def a1_bounds(obj: Source, A2: float, variant: str = "conservative") -> A1Bounds:
    """Admissible range for the floor A1 of the invariant box.

    ``variant`` selects the upper-bound formula: ``"stated"`` is the general
    condition, ``"display"`` additionally divides each growth term by
    alpha_ij^+ (the form used in the worked example), ``"conservative"`` takes
    the smaller of the two per patch.
    """
    e = _ext(obj)
    if variant == "conservative":
        s = a1_bounds(e, A2, "stated")
        d = a1_bounds(e, A2, "display")
        comps = np.minimum(s.components, d.components)
        return A1Bounds(s.lo, float(comps.min()), comps, s.brackets, variant)
    if variant not in ("stated", "display"):
        raise ValueError(f"unknown variant {variant!r}")

    brackets = 1.0 - e.b_minus.sum(axis=1) / e.c_plus
    terms = A2 * e.beta_minus / e.c_plus[:, None] * np.exp(-e.alpha_plus * A2)
    if variant == "display":
        terms = terms / e.alpha_plus
    sums = terms.sum(axis=1)
    with np.errstate(divide="ignore", invalid="ignore"):
        comps = np.where(brackets > 0, sums / np.where(brackets > 0, brackets, 1.0), -np.inf)
    lo = varsigma() / float(e.alpha_minus.min())
    return A1Bounds(lo, float(comps.min()), comps, brackets, variant)


def a1_interval(obj: Source, A2: float, variant: str = "conservative") -> tuple[float, float]:
    b = a1_bounds(obj, A2, variant)
    if not b.feasible:
        raise Infeasible(b.lo, b.hi)
    return b.lo, b.hi


def contraction_ratio(obj: Source) -> float:
    e = _ext(obj)
    return float(((e.b_plus.sum(axis=1) + e.beta_plus.sum(axis=1) * INV_E2) / e.c_minus).max())


# exponential decay ------------------------------------------------------------
def gamma(obj: Source, i: int, omega: float, sup_mu: float = 0.0) -> float:
    e = _ext(obj)
    coupling = e.b_plus[i].sum() + INV_E2 * float(np.sum(e.beta_plus[i] * np.exp(omega * e.tau_plus[i])))
    return float(e.c_minus[i] - omega - math.exp(omega * sup_mu) * coupling)


@dataclass(frozen=True)
class DecayRate:
    alpha: float
    M: float
    omegas: np.ndarray
    a: float
    sup_mu: float
    gamma_at_alpha: np.ndarray


def decay_rate(obj: Source, grid: Optional[Grid] = None, sup_mu: Optional[float] = None) -> DecayRate:
    """Certified rate alpha and constant M of the exponential envelope."""
    e = _ext(obj)
    if sup_mu is None:
        sup_mu = grid.sup_mu if grid is not None else 0.0
    h5 = check_H5(e)
    if not h5.holds:
        raise H5Violated(f"H5 margins {h5.margins.tolist()}")
    omegas = np.empty(e.n)
    for i in range(e.n):
        g = lambda w, i=i: gamma(e, i, w, sup_mu)
        top = float(e.c_minus[i])
        omegas[i] = top if g(top) >= 0 else bisect(g, 0.0, top, xtol=1e-14)
    a = float(omegas.min())
    alpha = ALPHA_FRACTION * min(a, float(e.c_minus.min()))
    denom = e.b_plus.sum(axis=1) + e.beta_plus.sum(axis=1) * INV_E2
    with np.errstate(divide="ignore"):
        M = float(np.max(np.where(denom > 0, e.c_minus / np.where(denom > 0, denom, 1.0), np.inf)))
    if not M > 1:
        raise H5Violated(f"M = {M!r} is not above 1")
    gam = np.array([gamma(e, i, alpha, sup_mu) for i in range(e.n)])
    return DecayRate(alpha, M, omegas, a, float(sup_mu), gam)


# scale-dependent checks --------------------------------------------------------
@dataclass(frozen=True)
class RegressivityCheck:
    holds: bool
    margin: float
    worst_time: float
    worst_patch: int


def check_regressivity(model: NicholsonModel, ts: TimeScale, grid: Grid) -> RegressivityCheck:
    """-c_i positively regressive at every grid node: 1 - mu(t) c_i(t) > 0."""
    worst = (math.inf, float(grid.points[0]), 0)
    for i, c in enumerate(model.c):
        vals = 1.0 - grid.mu * np.asarray(c.evaluate(grid.points), dtype=float)
        k = int(np.argmin(vals))
        if vals[k] < worst[0]:
            worst = (float(vals[k]), float(grid.points[k]), i)
    return RegressivityCheck(worst[0] > 0, *worst)


def delay_snap_distance(model: NicholsonModel, ts: TimeScale, grid: Grid) -> float:
    """Largest distance between a delayed time t - tau_ij(t) and the scale."""
    pts = grid.points
    worst = 0.0
    start = ts.min
    dense_only = all(hasattr(s, "hi") for s in ts.segments) and len(ts.segments) == 1
    if dense_only:
        return 0.0
    for i in range(model.n):
        for j in range(model.n):
            delayed = pts - np.asarray(model.tau[i][j].evaluate(pts), dtype=float)
            for s in delayed[delayed >= start]:
                worst = max(worst, ts.distance(float(s)))
    return worst


# certificate -------------------------------------------------------------------
@dataclass
class ConditionRecord:
    name: str
    holds: bool
    margin: float
    details: dict = field(default_factory=dict)


@dataclass
class Certificate:
    conditions: list
    derived: dict
    divergences: list
    notes: list
    A1: float
    A2: float

    @property
    def verdict(self) -> bool:
        return all(c.holds for c in self.conditions)

    def condition(self, name: str) -> ConditionRecord:
        for c in self.conditions:
            if c.name == name:
                return c
        raise KeyError(name)

    @property
    def failed(self) -> list:
        return [c.name for c in self.conditions if not c.holds]

    def to_dict(self) -> dict:
        return jsonable({
            "verdict": self.verdict,
            "A1": self.A1,
            "A2": self.A2,
            "conditions": [
                {"name": c.name, "holds": c.holds, "margin": c.margin, "details": c.details}
                for c in self.conditions
            ],
            "derived": self.derived,
            "divergences": self.divergences,
            "notes": self.notes,
        })


def jsonable(obj):
    """Convert numpy values and non-finite floats into strict-JSON values."""
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return jsonable(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return v
    return obj


def compare_extrema(recomputed: Extrema, reference: Extrema, tol: float = DIVERGENCE_TOL) -> list[dict]:
    """Entries where the two tables differ by more than ``tol``."""
    out = []
    for name in Extrema.fields():
        a, b = getattr(recomputed, name), getattr(reference, name)
        for idx in zip(*np.nonzero(np.abs(a - b) > tol)):
            if name.startswith("b_") and idx[0] == idx[1]:
                continue
            out.append({
                "reference": reference.source,
                "symbol": name,
                "index": [int(k) + 1 for k in idx],
                "reference_value": float(b[idx]),
                "recomputed_value": float(a[idx]),
            })
    return out


def certify(model: NicholsonModel, ts: TimeScale, grid: Grid, A1: float, A2: float,
            extrema: Optional[Extrema] = None, references: Optional[dict] = None) -> Certificate:
    """Evaluate every condition; failures are recorded, never raised."""
    e = extrema if extrema is not None else model.extrema
    conds: list[ConditionRecord] = []
    derived: dict = {"varsigma": varsigma(), "sup_mu": grid.sup_mu, "extrema_source": e.source}
    notes = [
        "existence is certified only when H5 (hence H2) holds as well as H1 and H3",
        "H4 is required for both the existence and the stability verdict",
        "sup mu is taken over the simulation grid, not the unbounded scale",
    ]

    # H1
    off = ~np.eye(e.n, dtype=bool)
    infima = {
        "c": float(e.c_minus.min()),
        "b": float(e.b_minus[off].min()) if e.n > 1 else math.inf,
        "beta": float(e.beta_minus.min()),
        "alpha": float(e.alpha_minus.min()),
    }
    h1_margin = min(infima.values())
    tau_min = float(e.tau_minus.min())
    if tau_min < 0:
        h1_margin = min(h1_margin, tau_min)
    snap = delay_snap_distance(model, ts, grid)
    conds.append(ConditionRecord("H1", h1_margin > 0, h1_margin, {
        "infima": infima, "tau_min": tau_min, "delay_snap_distance": snap,
    }))
    if snap > 1e-9:
        notes.append(f"delayed times miss the scale by up to {snap:.6g}; history is interpolated there")

    # H2
    h2 = check_H2(e)
    conds.append(ConditionRecord("H2", h2.holds, h2.margin, {"ratios": h2.values}))

    # H3
    h3_details: dict = {}
    h3_margin = -math.inf
    if h2.holds:
        comps = a2_components(e)
        thr = float(comps.max())
        derived["A2_threshold"] = thr
        h3_details.update(a2_components=comps, a2_threshold=thr)
        stated = a1_bounds(e, A2, "stated")
        display = a1_bounds(e, A2, "display")
        used = a1_bounds(e, A2, "conservative")
        h3_details.update(
            a1_lower=used.lo,
            a1_upper_stated=stated.hi,
            a1_upper_display=display.hi,
            a1_upper=used.hi,
            a1_upper_components=used.components,
            a1_brackets=used.brackets,
        )
        derived["A1_feasible_interval"] = [used.lo, used.hi]
        derived["A1_interval_feasible"] = used.feasible
        parts = [A2 - thr, used.hi - A1]
        if A1 < used.lo:
            parts.append(A1 - used.lo)
        if not A2 > A1 > 0:
            parts.append(-abs(A1 - A2))
        h3_margin = float(min(parts))
    else:
        h3_details["reason"] = "H2 fails, the A2 bracket is not positive"
    conds.append(ConditionRecord("H3", h3_margin > 0, h3_margin, h3_details))

    # H4 and pointwise regressivity
    sup_mu = grid.sup_mu
    h4_margin = float((1.0 - e.c_plus * sup_mu).min())
    conds.append(ConditionRecord("H4", h4_margin > 0, h4_margin, {"c_plus": e.c_plus, "sup_mu": sup_mu}))
    reg = check_regressivity(model, ts, grid)
    conds.append(ConditionRecord("RegressivityOnScale", reg.holds, reg.margin, {
        "worst_time": reg.worst_time, "worst_patch": reg.worst_patch + 1,
    }))

    # H5
    h5 = check_H5(e)
    conds.append(ConditionRecord("H5", h5.holds, h5.margin, {"sums": h5.values, "implies_H2": h5.holds and h2.holds}))
    if h5.holds and not h2.holds:  # pragma: no cover - impossible for nonnegative b, beta
        notes.append("H5 holds but H2 fails: coefficients are not nonnegative")

    derived["contraction_ratio"] = contraction_ratio(e) if np.all(e.c_minus > 0) else None
    if h5.holds:
        dr = decay_rate(e, sup_mu=sup_mu)
        derived.update(alpha=dr.alpha, M=dr.M, omegas=dr.omegas, a=dr.a, gamma_at_alpha=dr.gamma_at_alpha)

    divergences = []
    for ref in (references or {}).values():
        divergences.extend(compare_extrema(e, ref))
    return Certificate(conds, derived, divergences, notes, float(A1), float(A2))
