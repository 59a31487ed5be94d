"""Simulation and verification lab for a stochastic reaction-diffusion
equation on the real line with logarithmically superlinear drift and bounded
multiplicative space-time white noise."""

from .backend import BACKEND_NAME
from .grid import Field, GridSpec, Trajectory, TrajectoryStatus, make_grid, sample_function
from .heat_kernel import KernelEstimateId, kernel_bound_sides, kernel_value, semigroup_apply
from .noise import NoiseSlab, sample_noise, split_stream
from .weights import WeightParams, WeightSchedule, beta, ctem_distance, static_weighted_norm, t_star, weighted_sup_norm

__version__ = "0.1.0"

__all__ = [
    "BACKEND_NAME",
    "Field",
    "GridSpec",
    "KernelEstimateId",
    "NoiseSlab",
    "Trajectory",
    "TrajectoryStatus",
    "WeightParams",
    "WeightSchedule",
    "beta",
    "ctem_distance",
    "kernel_bound_sides",
    "kernel_value",
    "make_grid",
    "sample_function",
    "sample_noise",
    "semigroup_apply",
    "split_stream",
    "static_weighted_norm",
    "t_star",
    "weighted_sup_norm",
    "__version__",
]
