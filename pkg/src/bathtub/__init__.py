"""Generalized bathtub model: forward solvers and inverse recovery of inflow and trip-length distribution."""

from bathtub.config import ParsedConfig, RunOptions, parse_config
from bathtub.core import Scenario, validate
from bathtub.errors import (
    AssumptionViolation,
    BathtubError,
    ConfigurationError,
    DomainError,
    InstabilityError,
    MeshMismatchError,
    NonConvergenceError,
)
from bathtub.forward import BoundaryTrace, MassCurve, SpaceTimeGrid, solve_characteristics, solve_upwind
from bathtub.inverse_distribution import DistributionRecovery, recover_distribution
from bathtub.inverse_inflow import Reconstruction, reconstruct

__version__ = "0.1.0"

__all__ = [
    "AssumptionViolation",
    "BathtubError",
    "BoundaryTrace",
    "ConfigurationError",
    "DistributionRecovery",
    "DomainError",
    "InstabilityError",
    "MassCurve",
    "MeshMismatchError",
    "NonConvergenceError",
    "ParsedConfig",
    "Reconstruction",
    "RunOptions",
    "Scenario",
    "SpaceTimeGrid",
    "parse_config",
    "reconstruct",
    "recover_distribution",
    "solve_characteristics",
    "solve_upwind",
    "validate",
]
