"""Schwarz-Christoffel side lengths for the staircase polygon."""

from staircase.sc.engine import (
    AccessoryConfig,
    IntegralBundle,
    InfeasibleTarget,
    InvalidConfig,
    NoConvergence,
    PhaseError,
    QuadratureSettings,
    SCError,
    SideLengths,
    SolveResult,
    constants_PQ,
    forward,
    side_integrals,
    solve_accessory,
)
from staircase.sc.kernels import BACKEND_NAME, ExtendedPrecisionUnavailable, has_extended

__all__ = [
    "AccessoryConfig",
    "BACKEND_NAME",
    "ExtendedPrecisionUnavailable",
    "InfeasibleTarget",
    "IntegralBundle",
    "InvalidConfig",
    "NoConvergence",
    "PhaseError",
    "QuadratureSettings",
    "SCError",
    "SideLengths",
    "SolveResult",
    "constants_PQ",
    "forward",
    "has_extended",
    "side_integrals",
    "solve_accessory",
]
