"""Majda–Biello system on the half-line: transform-method solvers and analysis tools."""
from .core import (BoundaryKind, GridSpec, LinearSolution, MBParams, ProblemData,
                   SobolevIndices, SolutionField, load_config, save_config, time_localizer)

__version__ = "0.1.0"

__all__ = [
    "BoundaryKind", "GridSpec", "LinearSolution", "MBParams", "ProblemData",
    "SobolevIndices", "SolutionField", "load_config", "save_config", "time_localizer",
]
