"""Bisection with an explicit sign-change check on the bracket."""
from __future__ import annotations

import math
from typing import Callable

from .errors import RootBracketFailure


def bisect(f: Callable[[float], float], lo: float, hi: float, xtol: float = 1e-15,
           max_iter: int = 400) -> float:
    """Root of ``f`` in [lo, hi]; f(lo) and f(hi) must differ in sign.

    Iterates until the bracket is narrower than ``xtol`` (relative to the
    magnitude of the endpoints) or stops shrinking in floating point.
    """
    if not lo < hi:
        raise RootBracketFailure(f"empty bracket [{lo!r}, {hi!r}]")
    f_lo, f_hi = f(lo), f(hi)
    if math.isnan(f_lo) or math.isnan(f_hi):
        raise RootBracketFailure("function is NaN at a bracket end")
    if f_lo == 0.0:
        return lo
    if f_hi == 0.0:
        return hi
    if (f_lo > 0) == (f_hi > 0):
        raise RootBracketFailure(f"no sign change on [{lo!r}, {hi!r}]: f={f_lo!r}, {f_hi!r}")
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi or hi - lo <= xtol * max(1.0, abs(lo), abs(hi)):
            break
        f_mid = f(mid)
        if f_mid == 0.0:
            return mid
        if (f_mid > 0) == (f_lo > 0):
            lo, f_lo = mid, f_mid
        else:
            hi = mid
    return 0.5 * (lo + hi)
