"""Time scales on a bounded window: jump operators, graininess, translation
sets and simulation grids.

A time scale is stored as a sorted tuple of disjoint closed pieces, each either
a :class:`ClosedInterval` or an :class:`IsolatedPoint`.  Unbounded scales such
as the reals or the integers are described by a :class:`ScaleFamily` and
materialised on demand over a finite window.
"""
from __future__ import annotations

import math
from bisect import bisect_right
from dataclasses import dataclass, field
from typing import Iterable, Sequence, Union

import numpy as np

from .errors import EmptyWindow, NotInScale

TOL = 1e-9


@dataclass(frozen=True)
class ClosedInterval:
    lo: float
    hi: float

    def __post_init__(self):
        if not self.lo <= self.hi:
            raise ValueError(f"interval needs lo <= hi, got [{self.lo}, {self.hi}]")


@dataclass(frozen=True)
class IsolatedPoint:
    t: float


Segment = Union[ClosedInterval, IsolatedPoint]


def _lo(seg: Segment) -> float:
    return seg.lo if isinstance(seg, ClosedInterval) else seg.t


def _hi(seg: Segment) -> float:
    return seg.hi if isinstance(seg, ClosedInterval) else seg.t


def _normalise(pieces: Iterable[Segment]) -> tuple[Segment, ...]:
    intervals = []
    points = []
    for p in pieces:
        if isinstance(p, ClosedInterval):
            if p.hi - p.lo <= TOL:
                points.append(p.lo)
            else:
                intervals.append((p.lo, p.hi))
        elif isinstance(p, IsolatedPoint):
            points.append(p.t)
        else:
            raise TypeError(f"not a scale segment: {p!r}")

    intervals.sort()
    merged: list[list[float]] = []
    for lo, hi in intervals:
        if merged and lo <= merged[-1][1] + TOL:
            merged[-1][1] = max(merged[-1][1], hi)
        else:
            merged.append([lo, hi])

    starts = [m[0] for m in merged]
    kept = []
    for t in sorted(points):
        k = bisect_right(starts, t + TOL) - 1
        if k >= 0 and t <= merged[k][1] + TOL:
            continue
        if kept and t - kept[-1] <= TOL:
            continue
        kept.append(t)

    out: list[Segment] = [ClosedInterval(lo, hi) for lo, hi in merged]
    out.extend(IsolatedPoint(t) for t in kept)
    out.sort(key=_lo)
    return tuple(out)


class TimeScale:
    """Finite union of closed intervals and isolated points.

    ``window`` records the bounded region the scale was materialised on; the
    scale itself is the union of ``segments`` and always lies inside it.
    """

    __slots__ = ("segments", "window", "_starts")

    def __init__(self, segments: Iterable[Segment], window: tuple[float, float] | None = None):
        segs = _normalise(segments)
        if window is not None:
            lo, hi = float(window[0]), float(window[1])
            if lo > hi:
                raise ValueError(f"bad window {window!r}")
            segs = _clip(segs, lo, hi)
        elif segs:
            lo, hi = _lo(segs[0]), _hi(segs[-1])
        else:
            lo = hi = 0.0
        object.__setattr__(self, "segments", segs)
        object.__setattr__(self, "window", (lo, hi))
        object.__setattr__(self, "_starts", [_lo(s) for s in segs])

    def __setattr__(self, key, value):
        raise AttributeError("TimeScale is immutable")

    # constructors -----------------------------------------------------------
    @classmethod
    def interval(cls, lo: float, hi: float) -> "TimeScale":
        return cls([ClosedInterval(lo, hi)])

    @classmethod
    def from_points(cls, points: Iterable[float], window=None) -> "TimeScale":
        return cls([IsolatedPoint(float(t)) for t in points], window)

    @classmethod
    def integers(cls, lo: float, hi: float) -> "TimeScale":
        return Integers().on((lo, hi))

    @classmethod
    def union(cls, *scales: "TimeScale") -> "TimeScale":
        segs = [s for ts in scales for s in ts.segments]
        lo = min(ts.window[0] for ts in scales)
        hi = max(ts.window[1] for ts in scales)
        return cls(segs, (lo, hi))

    # basic queries ----------------------------------------------------------
    @property
    def is_empty(self) -> bool:
        return not self.segments

    @property
    def min(self) -> float:
        self._require_nonempty()
        return _lo(self.segments[0])

    @property
    def max(self) -> float:
        self._require_nonempty()
        return _hi(self.segments[-1])

    def _require_nonempty(self):
        if not self.segments:
            raise EmptyWindow("time scale is empty")

    def _find(self, t: float) -> int:
        k = bisect_right(self._starts, t + TOL) - 1
        if k >= 0 and t <= _hi(self.segments[k]) + TOL:
            return k
        return -1

    def __contains__(self, t: float) -> bool:
        return self._find(float(t)) >= 0

    def _locate(self, t: float) -> int:
        k = self._find(t)
        if k < 0:
            raise NotInScale(f"{t!r} is not a point of {self!r}")
        return k

    def sigma(self, t: float) -> float:
        """Forward jump: the infimum of scale points strictly after ``t``."""
        k = self._locate(t)
        seg = self.segments[k]
        if isinstance(seg, ClosedInterval) and t < seg.hi - TOL:
            return t
        if k + 1 < len(self.segments):
            return _lo(self.segments[k + 1])
        return t

    def rho(self, t: float) -> float:
        """Backward jump: the supremum of scale points strictly before ``t``."""
        k = self._locate(t)
        seg = self.segments[k]
        if isinstance(seg, ClosedInterval) and t > seg.lo + TOL:
            return t
        if k > 0:
            return _hi(self.segments[k - 1])
        return t

    def mu(self, t: float) -> float:
        return self.sigma(t) - t

    def is_right_scattered(self, t: float) -> bool:
        return self.mu(t) > 0.0

    def floor(self, s: float) -> float | None:
        """Largest scale point <= s (within TOL), or None."""
        k = bisect_right(self._starts, s + TOL) - 1
        if k < 0:
            return None
        seg = self.segments[k]
        if isinstance(seg, ClosedInterval):
            return max(seg.lo, min(s, seg.hi))
        return seg.t

    def ceil(self, s: float) -> float | None:
        """Smallest scale point >= s (within TOL), or None."""
        k = self._find(s)
        if k >= 0:
            seg = self.segments[k]
            if isinstance(seg, ClosedInterval):
                return max(seg.lo, min(s, seg.hi))
            return seg.t
        k = bisect_right(self._starts, s + TOL)
        if k < len(self.segments):
            return _lo(self.segments[k])
        return None

    def distance(self, s: float) -> float:
        """Distance from ``s`` to the nearest scale point."""
        cands = [p for p in (self.floor(s), self.ceil(s)) if p is not None]
        if not cands:
            return math.inf
        return min(abs(s - p) for p in cands)

    # set algebra ------------------------------------------------------------
    def shift(self, tau: float) -> "TimeScale":
        """The translate {t + tau : t in self}."""
        segs = [
            ClosedInterval(s.lo + tau, s.hi + tau) if isinstance(s, ClosedInterval) else IsolatedPoint(s.t + tau)
            for s in self.segments
        ]
        return TimeScale(segs, (self.window[0] + tau, self.window[1] + tau))

    def restrict(self, lo: float, hi: float) -> "TimeScale":
        return TimeScale(self.segments, (lo, hi))

    def intersect(self, other: "TimeScale") -> "TimeScale":
        out: list[Segment] = []
        for seg in self.segments:
            a, b = _lo(seg), _hi(seg)
            k = max(bisect_right(other._starts, a - TOL) - 1, 0)
            while k < len(other.segments) and _lo(other.segments[k]) <= b + TOL:
                o = other.segments[k]
                lo, hi = max(a, _lo(o)), min(b, _hi(o))
                if lo <= hi + TOL:
                    if isinstance(seg, IsolatedPoint):
                        out.append(seg)
                    elif isinstance(o, IsolatedPoint):
                        out.append(o)
                    elif hi - lo <= TOL:
                        out.append(IsolatedPoint(lo))
                    else:
                        out.append(ClosedInterval(lo, hi))
                k += 1
        lo = max(self.window[0], other.window[0])
        hi = max(lo, min(self.window[1], other.window[1]))
        return TimeScale(out, (lo, hi))

    def approx_equal(self, other: "TimeScale", tol: float = TOL) -> bool:
        if len(self.segments) != len(other.segments):
            return False
        for a, b in zip(self.segments, other.segments):
            if type(a) is not type(b):
                return False
            if abs(_lo(a) - _lo(b)) > tol or abs(_hi(a) - _hi(b)) > tol:
                return False
        return True

    def is_singleton(self, t: float) -> bool:
        return (
            len(self.segments) == 1
            and isinstance(self.segments[0], IsolatedPoint)
            and abs(self.segments[0].t - t) <= TOL
        )

    def __eq__(self, other):
        if not isinstance(other, TimeScale):
            return NotImplemented
        return self.segments == other.segments and self.window == other.window

    def __hash__(self):
        return hash((self.segments, self.window))

    def __repr__(self):
        parts = []
        for s in self.segments[:6]:
            parts.append(f"[{s.lo:g},{s.hi:g}]" if isinstance(s, ClosedInterval) else f"{{{s.t:g}}}")
        if len(self.segments) > 6:
            parts.append(f"... ({len(self.segments)} pieces)")
        return f"TimeScale({' U '.join(parts) or 'empty'}; window={self.window})"


def _clip(segs: Sequence[Segment], lo: float, hi: float) -> tuple[Segment, ...]:
    out: list[Segment] = []
    for s in segs:
        if isinstance(s, IsolatedPoint):
            if lo - TOL <= s.t <= hi + TOL:
                out.append(s)
            continue
        a, b = max(s.lo, lo), min(s.hi, hi)
        if a > b + TOL:
            continue
        out.append(IsolatedPoint(a) if b - a <= TOL else ClosedInterval(a, b))
    return tuple(out)


# scale families ---------------------------------------------------------------
class ScaleFamily:
    """An unbounded time scale known structurally; ``on`` materialises a window."""

    def on(self, window: tuple[float, float]) -> TimeScale:  # pragma: no cover - abstract
        raise NotImplementedError


@dataclass(frozen=True)
class Reals(ScaleFamily):
    def on(self, window):
        return TimeScale([ClosedInterval(float(window[0]), float(window[1]))], window)


@dataclass(frozen=True)
class StepScale(ScaleFamily):
    """The scale h*Z (optionally shifted by ``offset``)."""

    h: float
    offset: float = 0.0

    def __post_init__(self):
        if not self.h > 0:
            raise ValueError("StepScale needs h > 0")

    def on(self, window):
        lo, hi = window
        k0 = math.ceil((lo - self.offset) / self.h - TOL)
        k1 = math.floor((hi - self.offset) / self.h + TOL)
        return TimeScale([IsolatedPoint(self.offset + k * self.h) for k in range(k0, k1 + 1)], window)


@dataclass(frozen=True)
class Integers(StepScale):
    h: float = 1.0
    offset: float = 0.0


@dataclass(frozen=True)
class UnionFamily(ScaleFamily):
    base: ScaleFamily
    extra: tuple[float, ...] = ()

    def on(self, window):
        b = self.base.on(window)
        return TimeScale(list(b.segments) + [IsolatedPoint(float(t)) for t in self.extra], window)


@dataclass(frozen=True)
class ExplicitWindow(ScaleFamily):
    """A scale that is empty outside its stored pieces."""

    scale: TimeScale

    def on(self, window):
        return self.scale.restrict(*window)


def as_family(fam) -> ScaleFamily:
    if isinstance(fam, ScaleFamily):
        return fam
    if isinstance(fam, TimeScale):
        return ExplicitWindow(fam)
    raise TypeError(f"expected ScaleFamily or TimeScale, got {type(fam).__name__}")


def sigma(ts: TimeScale, t: float) -> float:
    return ts.sigma(t)


def rho(ts: TimeScale, t: float) -> float:
    return ts.rho(t)


def mu(ts: TimeScale, t: float) -> float:
    return ts.mu(t)


def shift_intersection(fam, tau: float, window: tuple[float, float]) -> TimeScale:
    """T ∩ (T - tau) restricted to ``window``."""
    fam = as_family(fam)
    lo, hi = window
    pad = abs(tau)
    big = fam.on((lo - pad, hi + pad))
    return big.intersect(big.shift(-tau)).restrict(lo, hi)


@dataclass(frozen=True)
class TranslationGroup:
    accepted: tuple[float, ...]
    rejected: tuple[float, ...]
    sections: dict = field(compare=False)
    core: TimeScale
    closure_violations: tuple[tuple[float, float, str, float], ...]

    @property
    def closed(self) -> bool:
        return not self.closure_violations


def _admissible_section(sec: TimeScale) -> bool:
    return not sec.is_empty and not sec.is_singleton(0.0)


def translation_group(fam, candidates: Iterable[float], window: tuple[float, float]) -> TranslationGroup:
    """Screen candidate translations against the almost-periodic-scale axioms.

    A candidate survives when both its own section and that of its negative
    are nonempty and differ from {0}.  This is a necessary condition only:
    on a finite window nothing stronger can be decided.
    """
    fam = as_family(fam)
    cands = sorted({float(c) for c in candidates})
    sections = {}
    for tau in cands:
        for s in (tau, -tau):
            if s not in sections:
                sections[s] = shift_intersection(fam, s, window)

    accepted, rejected = [], []
    for tau in cands:
        if _admissible_section(sections[tau]) and _admissible_section(sections[-tau]):
            accepted.append(tau)
        else:
            rejected.append(tau)

    core = fam.on(window)
    for tau in accepted:
        core = core.intersect(sections[tau])
    core = core.restrict(*window)

    def _member(x, pool):
        return any(abs(x - c) <= TOL for c in pool)

    violations = []
    for i, t1 in enumerate(accepted):
        for t2 in accepted[i:]:
            for op, val in (("+", t1 + t2), ("-", t1 - t2)):
                if _member(val, cands) and not _member(val, accepted):
                    violations.append((t1, t2, op, val))

    return TranslationGroup(tuple(accepted), tuple(rejected), sections, core, tuple(violations))


# grids ------------------------------------------------------------------------
@dataclass(frozen=True, eq=False)
class Grid:
    """Simulation grid over a scale window.

    ``mu`` is the graininess of the scale (never the grid spacing), so dense
    interior nodes carry mu = 0 whatever the refinement.
    """

    points: np.ndarray
    mu: np.ndarray
    right_scattered: np.ndarray
    right_dense: np.ndarray
    max_step: float
    scale: TimeScale = field(repr=False)

    def __len__(self):
        return len(self.points)

    @property
    def sup_mu(self) -> float:
        return float(self.mu.max()) if len(self.mu) else 0.0

    def index_of(self, t: float) -> int:
        k = int(np.searchsorted(self.points, t - TOL))
        if k < len(self.points) and abs(self.points[k] - t) <= TOL:
            return k
        raise NotInScale(f"{t!r} is not a grid point")

    def slice(self, lo: float, hi: float) -> "Grid":
        m = (self.points >= lo - TOL) & (self.points <= hi + TOL)
        return Grid(self.points[m], self.mu[m], self.right_scattered[m], self.right_dense[m], self.max_step, self.scale)


def build_grid(ts: TimeScale, window: tuple[float, float] | None, max_step: float,
               anchors: Iterable[float] = ()) -> Grid:
    """Nodes covering ``ts`` on ``window``: every isolated point exactly, each
    interval split at any ``anchors`` inside it and refined uniformly."""
    if not max_step > 0:
        raise ValueError("max_step must be positive")
    if window is None:
        window = ts.window
    lo, hi = window
    part = ts.restrict(lo, hi)
    if part.is_empty:
        raise EmptyWindow(f"no scale points in window {window!r}")

    cuts = sorted(float(a) for a in anchors)
    chunks = []
    for seg in part.segments:
        if isinstance(seg, ClosedInterval):
            edges = [seg.lo] + [a for a in cuts if seg.lo + TOL < a < seg.hi - TOL] + [seg.hi]
            pieces = []
            for a, b in zip(edges[:-1], edges[1:]):
                m = max(1, math.ceil((b - a) / max_step - 1e-12))
                pts = a + (b - a) * np.arange(m + 1) / m
                pts[-1] = b
                pieces.append(pts if not pieces else pts[1:])
            chunks.append(np.concatenate(pieces))
        else:
            chunks.append(np.array([seg.t]))
    points = np.concatenate(chunks)

    top = ts.max
    mu_arr = np.zeros_like(points)
    dense = np.zeros(len(points), dtype=bool)
    k = 0
    for seg_pts, seg in zip(chunks, part.segments):
        n = len(seg_pts)
        if isinstance(seg, ClosedInterval):
            # interior nodes of an interval are right-dense
            dense[k:k + n - 1] = True
        end = seg_pts[-1]
        m_end = ts.mu(end)
        mu_arr[k + n - 1] = m_end
        if m_end == 0.0 and end < top - TOL:
            dense[k + n - 1] = True
        k += n
    scattered = mu_arr > 0.0
    return Grid(points, mu_arr, scattered, dense, float(max_step), ts)
