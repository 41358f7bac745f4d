"""Layered-stack dispersion: guided P-SV modes, Sezawa coupling and design sweeps."""

from ._backend import BACKEND
from .solver import (
    SEZAWA,
    BranchMissingError,
    DesignPoint,
    DispersionBranch,
    Layer,
    LayerStack,
    NoGuidedModesError,
    SlowOnFastWarning,
    StackTemplate,
    SweepResult,
    boundary_determinant,
    design_frequency,
    find_branches,
    find_roots,
    kt2_delta_v,
    rayleigh_velocity,
    sweep_design,
)

__all__ = [
    "BACKEND",
    "SEZAWA",
    "BranchMissingError",
    "DesignPoint",
    "DispersionBranch",
    "Layer",
    "LayerStack",
    "NoGuidedModesError",
    "SlowOnFastWarning",
    "StackTemplate",
    "SweepResult",
    "boundary_determinant",
    "design_frequency",
    "find_branches",
    "find_roots",
    "kt2_delta_v",
    "rayleigh_velocity",
    "sweep_design",
]
