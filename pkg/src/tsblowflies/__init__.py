"""Patch-structured Nicholson blowfly models on time scales: simulation,
condition certificates and post-hoc stability diagnostics."""
from .errors import TSBlowfliesError
from .model import NicholsonModel
from .simulator import InitialCondition, Trajectory, simulate
from .timescale import Integers, Reals, StepScale, TimeScale, UnionFamily

__all__ = [
    "Integers",
    "InitialCondition",
    "NicholsonModel",
    "Reals",
    "StepScale",
    "TSBlowfliesError",
    "TimeScale",
    "Trajectory",
    "UnionFamily",
    "simulate",
]
__version__ = "0.1.0"
