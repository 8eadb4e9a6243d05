"""Thermodynamically compatible finite volume schemes for a unified
hyperbolic model of viscous heat-conducting flow.

The package discretizes the entropy balance directly and recovers exact
conservation of total energy as an algebraic consequence, both in a
semi-discrete form with classical Runge-Kutta time stepping and in a
fully discrete form solved by Picard iteration.
"""

from .errors import (
    ConfigError,
    InvalidStateError,
    PathInversionError,
    PicardConvergenceError,
    TCFVError,
)
from .model import ModelParams

__all__ = [
    "ConfigError",
    "InvalidStateError",
    "ModelParams",
    "PathInversionError",
    "PicardConvergenceError",
    "TCFVError",
]

__version__ = "0.1.0"
