"""Post-hoc diagnostics on simulated trajectories: the exponential-stability
envelope, empirical decay rates, epsilon-translation numbers, and the
continuous versus discrete comparison."""
from __future__ import annotations

import io
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import certifier
from .errors import BlowUp, DegenerateSeries, GridMismatch, H5Violated, InsufficientOverlap
from .model import NicholsonModel, theta
from .simulator import InitialCondition, Trajectory, default_max_step, history_start, pair_deviation, simulate
from .timescale import TOL, Integers, Reals, TimeScale, as_family, build_grid
from .tscalc import ominus, ts_exp_series

ENVELOPE_SLACK = 1.0 + 1e-6
UNDERFLOW = 1e-14
BOX_TOL = 1e-6
BURN_IN_FACTOR = 10.0


def sample(traj: Trajectory, s) -> np.ndarray:
    """Vectorised history lookup: rows of ``traj`` at the times ``s``."""
    s = np.asarray(s, dtype=float)
    t = traj.times
    if np.any(s < t[0] - TOL) or np.any(s > t[-1] + TOL):
        raise InsufficientOverlap("requested times fall outside the trajectory")
    k = np.clip(np.searchsorted(t, s + TOL, side="right") - 1, 0, len(t) - 1)
    exact = np.abs(s - t[k]) <= TOL
    nxt = np.minimum(k + 1, len(t) - 1)
    span = np.where(nxt > k, t[nxt] - t[k], 1.0)
    w = np.where(exact | ~traj.dense_right[k], 0.0, (s - t[k]) / span)[:, None]
    return (1.0 - w) * traj.states[k] + w * traj.states[nxt]


# box compliance ---------------------------------------------------------------
@dataclass(frozen=True)
class BoxCompliance:
    compliant: bool
    minima: np.ndarray
    maxima: np.ndarray
    A1: float
    A2: float

    def to_dict(self) -> dict:
        return certifier.jsonable({
            "compliant": self.compliant, "A1": self.A1, "A2": self.A2,
            "min": self.minima, "max": self.maxima,
        })


def box_compliance(traj: Trajectory, A1: float, A2: float, tol: float = BOX_TOL) -> BoxCompliance:
    """Whether every component stays in [A1 - tol, A2 + tol] for t >= t0."""
    fut = traj.future().states
    lo, hi = fut.min(axis=0), fut.max(axis=0)
    ok = bool(np.all(lo >= A1 - tol) and np.all(hi <= A2 + tol))
    return BoxCompliance(ok, lo, hi, float(A1), float(A2))


# envelope -----------------------------------------------------------------------
@dataclass
class StabilityReport:
    violations: int
    worst_ratio: float
    fitted_rate: Optional[float]
    alpha: float
    M: float
    ic_distance: float
    times: np.ndarray = field(repr=False)
    deviation: np.ndarray = field(repr=False)
    envelope: np.ndarray = field(repr=False)

    @property
    def passed(self) -> bool:
        return self.violations == 0

    def to_dict(self) -> dict:
        return certifier.jsonable({
            "violations": self.violations,
            "worst_ratio": self.worst_ratio,
            "fitted_rate": self.fitted_rate,
            "alpha": self.alpha,
            "M": self.M,
            "ic_distance": self.ic_distance,
        })

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("t,deviation,envelope\n")
        for row in zip(self.times, self.deviation, self.envelope):
            buf.write(",".join(f"{v:.17g}" for v in row) + "\n")
        return buf.getvalue()


def verify_envelope(traj: Trajectory, ref_traj: Trajectory, alpha: float, M: float,
                    ts: TimeScale, grid=None) -> StabilityReport:
    """Check max_i |x_i - x_i*| <= M ||phi - phi*||_0 e_{⊖alpha}(t, t0) for t >= t0."""
    if abs(traj.t0 - ref_traj.t0) > TOL:
        raise GridMismatch("trajectories start at different t0")
    times, dev = pair_deviation(traj, ref_traj)
    t0 = traj.t0
    hist = times <= t0 + TOL
    phi = float(dev[hist].max()) if np.any(hist) else 0.0
    fut = ~hist | (np.abs(times - t0) <= TOL)
    ft, fd = times[fut], dev[fut]
    env = ts_exp_series(ominus(alpha, ts), ft, ts)
    bound = M * phi * env
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(bound > 0, fd / np.where(bound > 0, bound, 1.0), np.where(fd > 0, np.inf, 0.0))
    worst = float(ratio.max()) if len(ratio) else 0.0
    violations = int(np.count_nonzero(ratio > ENVELOPE_SLACK))
    try:
        rate = fit_decay(ft, fd, t0)
    except DegenerateSeries:
        rate = None
    return StabilityReport(violations, worst, rate, float(alpha), float(M), phi, ft, fd, env)


def fit_decay(times, deviation, t0: Optional[float] = None, window: Optional[tuple] = None) -> float:
    """Least-squares decay rate of log(deviation) against t; positive means decay.

    The fit window is cut at the first deviation below the underflow floor.
    """
    t = np.asarray(times, dtype=float)
    d = np.asarray(deviation, dtype=float)
    m = np.ones(len(t), dtype=bool)
    if t0 is not None:
        m &= t >= t0 - TOL
    if window is not None:
        m &= (t >= window[0] - TOL) & (t <= window[1] + TOL)
    t, d = t[m], d[m]
    small = np.flatnonzero(~(d >= UNDERFLOW))
    if len(small):
        t, d = t[: small[0]], d[: small[0]]
    if len(t) < 2 or t[-1] - t[0] <= TOL:
        raise DegenerateSeries("fewer than two usable deviations in the fit window")
    slope = np.polyfit(t, np.log(d), 1)[0]
    return float(-slope)


@dataclass
class EnvelopeRun:
    report: StabilityReport
    traj: Trajectory
    ref: Trajectory
    alpha: float
    M: float


def run_envelope(model: NicholsonModel, fam, ic: InitialCondition, t_end: float,
                 ic_ref: Optional[InitialCondition] = None,
                 max_step: Optional[float] = None) -> EnvelopeRun:
    """Simulate a pair of solutions on one grid and check the certified envelope.

    Without ``ic_ref`` the reference solution is the continuation of ``ic``
    after a burn-in of 10/alpha, which stands in for the almost periodic
    solution.  ``fam`` is a scale family (or a fixed scale) that is
    materialised on a window long enough for the history and any burn-in.
    """
    fam = as_family(fam)
    h = max_step or default_max_step(model)
    t0 = ic.t0
    th = theta(model)
    ts = fam.on((t0 - th - 2.0, t_end))
    start = history_start(ts, t0, th)
    probe = build_grid(ts, (start, t_end), h, anchors=(t0,))
    dr = certifier.decay_rate(model, sup_mu=probe.sup_mu)
    if ic_ref is None:
        burn = BURN_IN_FACTOR / dr.alpha
        ts = fam.on((t0 - burn - th - 2.0, t_end))
        ref_t0 = ts.floor(t0 - burn)
        if ref_t0 is None:
            raise GridMismatch("scale window too short for the burn-in reference")
        ref_start = history_start(ts, ref_t0, th)
        grid = build_grid(ts, (ref_start, t_end), h, anchors=(ref_t0, start, t0))
        ref_full = simulate(model, ts, InitialCondition(ic.phi, ref_t0), t_end, grid=grid)
        seg = ref_full.between(start, t_end)
        ref = Trajectory(seg.times, seg.states, seg.dense_right, t0, dict(ref_full.provenance, burn_in=burn))
        traj = simulate(model, ts, ic, t_end, grid=grid)
    else:
        grid = probe
        traj = simulate(model, ts, ic, t_end, grid=grid)
        ref = simulate(model, ts, ic_ref, t_end, grid=grid)
    report = verify_envelope(traj, ref, dr.alpha, dr.M, ts)
    return EnvelopeRun(report, traj, ref, dr.alpha, dr.M)


# translation numbers ------------------------------------------------------------
@dataclass
class TranslationReport:
    eps: float
    candidates: tuple
    deviations: dict
    accepted: tuple
    inclusion_length: float

    def to_dict(self) -> dict:
        return certifier.jsonable({
            "eps": self.eps,
            "candidates": list(self.candidates),
            "deviations": [[tau, self.deviations[tau]] for tau in self.candidates],
            "accepted": list(self.accepted),
            "inclusion_length": self.inclusion_length,
        })


def translation_numbers(traj: Trajectory, eps: float, candidates: Sequence[float],
                        t_from: Optional[float] = None) -> TranslationReport:
    """Candidates tau with sup_t max_i |x_i(t + tau) - x_i(t)| < eps over the
    overlap of the trajectory with its shift."""
    lo = traj.times[0] if t_from is None else t_from
    hi = traj.times[-1]
    cands = tuple(sorted({float(c) for c in candidates}))
    if not cands:
        raise InsufficientOverlap("no candidate translations given")
    devs = {}
    for tau in cands:
        m = (traj.times >= lo - TOL) & (traj.times >= lo - tau - TOL) & (traj.times + tau <= hi + TOL)
        t = traj.times[m]
        if len(t) == 0:
            raise InsufficientOverlap(f"trajectory does not cover both t and t + {tau!r}")
        shifted = sample(traj, t + tau)
        devs[tau] = float(np.max(np.abs(shifted - traj.states[m])))
    accepted = tuple(tau for tau in cands if devs[tau] < eps)
    if accepted:
        edges = np.array([cands[0], *accepted, cands[-1]])
        gaps = np.diff(edges)
        length = float(gaps.max()) if len(gaps) else 0.0
    else:
        length = math.inf
    return TranslationReport(float(eps), cands, devs, accepted, length)


# continuous versus discrete -----------------------------------------------------
SAME = "same qualitative behavior"
DIVERGENT_ASSUMPTIONS = "divergent assumptions"
UNCERTIFIED = "uncertified on both"
DIVERGENT_BEHAVIOR = "divergent behavior"


def _scale_run(model, fam, ic, horizon, A1, A2, max_step, perturb):
    t0 = ic.t0
    th = theta(model)
    t_end = t0 + horizon
    ts = as_family(fam).on((t0 - th - 2.0, t_end))
    start = history_start(ts, t0, th)
    grid = build_grid(ts, (start, t_end), max_step or default_max_step(model), anchors=(t0,))
    cert = certifier.certify(model, ts, grid, A1, A2)
    out = {"certified": cert.verdict, "failed": cert.failed, "compliant": False, "fitted_rate": None}
    try:
        traj = simulate(model, ts, ic, t_end, grid=grid)
        other = simulate(model, ts, InitialCondition.constant(ic(t0) + perturb, t0), t_end, grid=grid)
    except BlowUp as exc:
        out["error"] = str(exc)
        return out
    box = box_compliance(traj, A1, A2)
    out.update(compliant=box.compliant, min=box.minima, max=box.maxima)
    _, dev = pair_deviation(traj, other)
    try:
        out["fitted_rate"] = fit_decay(traj.times, dev, t0)
    except DegenerateSeries:
        pass
    try:
        out["alpha"] = certifier.decay_rate(model, sup_mu=grid.sup_mu).alpha
    except H5Violated:
        out["alpha"] = None
    return out


def compare_scales(model: NicholsonModel, ic_r: InitialCondition, ic_z: InitialCondition,
                   horizon: float, A1: float, A2: float, max_step: Optional[float] = None,
                   perturb: float = 0.1) -> dict:
    """Run the model on the reals and on the integers and compare verdicts."""
    runs = {
        "reals": _scale_run(model, Reals(), ic_r, horizon, A1, A2, max_step, perturb),
        "integers": _scale_run(model, Integers(), ic_z, horizon, A1, A2, max_step, perturb),
    }
    r, z = runs["reals"], runs["integers"]
    if r["certified"] and z["certified"] and r["compliant"] and z["compliant"]:
        verdict = SAME
    elif set(r["failed"]) != set(z["failed"]):
        verdict = DIVERGENT_ASSUMPTIONS
    elif r["failed"]:
        verdict = UNCERTIFIED
    else:
        verdict = DIVERGENT_BEHAVIOR
    return certifier.jsonable({"verdict": verdict, **runs})
