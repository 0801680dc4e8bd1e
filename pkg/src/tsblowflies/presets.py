"""The three-patch worked example with almost periodic coefficients.

Besides the coefficient formulas this module keeps the extrema tables exactly
as printed alongside the example, so that derived numbers can be compared
against the printed ones and discrepancies reported.
"""
from __future__ import annotations

import math

import numpy as np

from .coefficients import Abs, Const, Cos, Exp, Sin
from .model import Extrema, NicholsonModel

PI = math.pi
S2 = math.sqrt(2.0)
S3 = math.sqrt(3.0)


def _osc(center, amp, wave):
    return Const(center) + amp * wave


def example51() -> NicholsonModel:
    c = [
        _osc(0.21, 0.01, Sin(1 / 3)),
        _osc(0.30, 0.02, Sin(4 / 3)),
        _osc(0.41, 0.01, Sin(1 / 3)),
    ]
    b = [
        [0.0, _osc(0.03, 0.01, Cos(PI)), _osc(0.06, 0.01, Cos(S3))],
        [_osc(0.05, 0.01, Cos(S3)), 0.0, _osc(0.05, 0.01, Sin(S2))],
        [_osc(0.16, 0.01, Sin(S3)), _osc(0.13, 0.01, Cos(S2)), 0.0],
    ]
    beta = [
        [_osc(0.07, 0.02, Sin(PI)), _osc(0.15, 0.01, Cos(S3)), _osc(0.15, 0.01, Sin(5 / 6))],
        [_osc(0.06, 0.01, Cos(PI)), _osc(0.04, 0.01, Cos(S3)), _osc(0.09, 0.01, Cos(1 / 3))],
        [_osc(0.02, 0.01, Cos(1 / 6)), _osc(0.032, 0.01, Cos(S2)), _osc(0.022, 0.001, Sin(1 / 3))],
    ]
    a1 = _osc(0.91, 0.09, Abs(Sin(S3)))
    alpha = [
        [a1, a1, a1],
        [_osc(0.8, 0.2, Sin(S2)), _osc(0.8, 0.2, Cos(S2)), _osc(0.8, 0.2, Sin(PI))],
        [_osc(0.8, 0.2, Abs(Sin(S3))), _osc(0.8, 0.2, Sin(S3)), _osc(0.8, 0.2, Sin(4 / 3))],
    ]
    tau = [
        [Exp(0.2, Abs(Sin(PI))), Exp(0.4, Abs(Cos(PI, PI / 2))), Exp(0.5, Abs(Sin(PI)))],
        [Exp(0.2, Abs(Cos(PI, PI / 2))), Exp(0.3, Abs(Sin(3 * PI))), Exp(0.1, Abs(Cos(2 * PI, PI / 2)))],
        [Exp(0.5, Abs(Cos(PI, 1.5 * PI))), Exp(0.6, Abs(Cos(PI, 1.5 * PI))), Exp(0.3, Abs(Sin(2 * PI)))],
    ]
    return NicholsonModel(c, b, beta, alpha, tau, name="example51")


_TAU_PLUS = np.exp([[0.2, 0.4, 0.5], [0.2, 0.3, 0.1], [0.5, 0.6, 0.3]])

# Extrema table as printed (including b32^- = 12, beta33 = 0.21/0.23, c3^+ = 0.43).
LISTED_EXTREMA = Extrema(
    c_minus=[0.2, 0.28, 0.4],
    c_plus=[0.22, 0.32, 0.43],
    b_minus=[[0, 0.02, 0.05], [0.04, 0, 0.04], [0.15, 12, 0]],
    b_plus=[[0, 0.04, 0.07], [0.06, 0, 0.06], [0.17, 0.14, 0]],
    beta_minus=[[0.05, 0.14, 0.14], [0.05, 0.03, 0.08], [0.01, 0.022, 0.21]],
    beta_plus=[[0.09, 0.16, 0.16], [0.07, 0.05, 0.1], [0.03, 0.042, 0.23]],
    alpha_minus=[[0.91] * 3, [0.6] * 3, [0.8, 0.6, 0.6]],
    alpha_plus=[[1.0] * 3] * 3,
    tau_minus=np.ones((3, 3)),
    tau_plus=_TAU_PLUS,
    source="listed",
)

# The inputs that the printed H5 sums actually use; they differ from the table
# in beta23^+, b31^+, b32^+, beta31^+ and beta32^+.
H5_DISPLAY_EXTREMA = LISTED_EXTREMA.with_values(
    source="listed-h5-display",
    beta_plus={(1, 2): 0.07, (2, 0): 0.06, (2, 1): 0.33},
    b_plus={(2, 0): 0.03, (2, 1): 0.04},
)

# Numbers printed with the example.
REPORTED = {
    "h2_ratios": (0.55, 0.4286, 0.775),
    "h5_sums": (0.1655, 0.1457, 0.1539),
    "c_minus": (0.2, 0.28, 0.4),
    "a2_components": (2.7102, 0.8431, 0.6449),
    "a2_threshold": 2.7102,
    "a1_upper_components": (1.2118, 8.0234, 1.3407),
    "a1_upper": 1.2118,
    "a1_lower": 1.2025,
    "varsigma": 0.7215354,
    "varsigma_rounded": 0.7215,
}

A1 = 1.21
A2 = 2.72
IC_REALS = (1.3, 1.3, 1.5)
IC_INTEGERS = (1.2, 1.2, 2.3)
