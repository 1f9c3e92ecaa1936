"""Finite-volume simulation and diagnostics for chemotaxis with logistic source."""

from .coefficients import CoefficientSpec, ModelParams, parse_spec, validate_spec
from .elliptic import EllipticConfig, solve_helmholtz
from .grid import Grid
from .simulator import SolverConfig, State, Trajectory, initial_condition, run, step

__all__ = [
    "CoefficientSpec", "EllipticConfig", "Grid", "ModelParams", "SolverConfig", "State",
    "Trajectory", "initial_condition", "parse_spec", "run", "solve_helmholtz", "step",
    "validate_spec",
]
