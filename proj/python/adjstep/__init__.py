"""Adjoint-based timestep control for finite-volume conservation laws.

The functions mirror the command-line driver: ``forward`` writes a run directory,
``adjoint`` adds the dual solution and indicators, ``plan`` derives a timestep plan
for a finer level, and ``report`` compares functional traces.
"""

from ._core import (
    AdjstepError,
    ArtifactError,
    ConfigError,
    NonconvergenceError,
    StateError,
    adjoint,
    burgers_estimate,
    format_double,
    forward,
    mesh,
    plan,
    read_plan,
    read_trajectory,
    report,
)

__all__ = [
    "AdjstepError",
    "ArtifactError",
    "ConfigError",
    "NonconvergenceError",
    "StateError",
    "adjoint",
    "burgers_estimate",
    "format_double",
    "forward",
    "mesh",
    "plan",
    "read_plan",
    "read_trajectory",
    "report",
]
