"""Mild-form exponential Euler stepping with blow-up and level monitors.

One step of the scheme is

    u_{k+1} = P_dt u_k + dt * P_dt b(u_k) + sum_j p_dt(x_i, y_j) sigma(u_k(y_j)) dW[k, j],

with ``P_dt`` applied by trapezoidal kernel quadrature.  Iterated quadrature
of a Gaussian is only trustworthy when the one-step kernel is resolved by
the mesh: the node sum of ``p_dt`` overshoots its unit mass by about
``2 exp(-2 pi^2 dt / dx^2)`` per application, so configurations must keep
the accumulated overshoot ``nt * 2 exp(-2 pi^2 dt / dx^2)`` below 1%.
``SolveConfig`` enforces that budget and refuses under-resolved grids.

``solve_tracked`` additionally accumulates the stochastic convolution of the
path by the same one-step recursion (``V_{k+1} = P_dt V_k + noise term``),
which keeps the discrete mild decomposition ``u = heat flow + drift part +
V`` exact to rounding.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .backend import kernels
from .coefficients import CoefficientSpec, MollifiedFamily
from .errors import (
    BlowUpError,
    GridMismatchError,
    HorizonError,
    InvalidArgumentError,
)
from .grid import Field, GridSpec, Trajectory, TrajectoryStatus
from .heat_kernel import semigroup_matrix
from .noise import NoiseSlab
from .weights import WeightParams, WeightSchedule

_MASS_BUDGET = 0.01  # max tolerated cumulative quadrature mass overshoot


@dataclass(frozen=True)
class StoppingMonitor:
    """Levels for the blow-up time tau_M and the closeness time tau^delta."""

    blow_up_level: float = math.inf
    closeness_level: float | None = None
    enabled: bool = True

    def __post_init__(self) -> None:
        if not self.blow_up_level > 0:
            raise InvalidArgumentError(f"M must be > 0, got {self.blow_up_level}")
        if self.closeness_level is not None and not (
            0.0 < self.closeness_level <= math.exp(-1.0)
        ):
            raise InvalidArgumentError(
                f"delta must lie in (0, 1/e], got {self.closeness_level}"
            )


def resolution_overshoot(grid: GridSpec) -> float:
    """Accumulated trapezoid mass overshoot of ``nt`` one-step kernel sweeps."""
    return grid.nt * 2.0 * math.exp(-2.0 * math.pi**2 * grid.dt / grid.dx**2)


@dataclass
class SolveConfig:
    """Everything one replica solve needs; validated at construction."""

    grid: GridSpec
    coeffs: CoefficientSpec | MollifiedFamily
    weights: WeightParams
    initial: Field
    noise: NoiseSlab
    monitor: StoppingMonitor | None = None
    enforce_horizon: bool = False

    def __post_init__(self) -> None:
        if self.initial.grid != self.grid:
            raise GridMismatchError("initial condition grid does not match solve grid")
        if self.noise.grid != self.grid:
            raise GridMismatchError("noise slab grid does not match solve grid")
        overshoot = resolution_overshoot(self.grid)
        if overshoot > _MASS_BUDGET:
            raise InvalidArgumentError(
                f"grid under-resolves the one-step kernel: cumulative quadrature "
                f"mass overshoot {overshoot:.3g} exceeds {_MASS_BUDGET}; "
                f"increase dt or refine dx until nt*2*exp(-2*pi^2*dt/dx^2) is small "
                f"(dt >= dx^2 is usually enough)"
            )
        if self.enforce_horizon and self.grid.horizon > self.weights.t_star * (1 + 1e-12):
            raise HorizonError(
                f"horizon {self.grid.horizon} exceeds admissible t_star="
                f"{self.weights.t_star} for (lambda={self.weights.lam}, "
                f"kappa={self.weights.kappa})"
            )

    def schedule(self) -> WeightSchedule:
        return self.weights.schedule()


class _SolverOps:
    """Per-config precomputed matrices."""

    def __init__(self, cfg: SolveConfig):
        grid = cfg.grid
        self.quad = np.ascontiguousarray(semigroup_matrix(grid, grid.dt))
        self.point = np.ascontiguousarray(kernels.lag_matrix(grid.nodes(), grid.dt))
        self.dt = grid.dt


def _step_values(ops: _SolverOps, cfg: SolveConfig, u: np.ndarray, k: int) -> np.ndarray:
    b_u = np.asarray(cfg.coeffs.b(u), dtype=np.float64)
    s_u = np.asarray(cfg.coeffs.sigma(u), dtype=np.float64)
    noise_in = np.ascontiguousarray(s_u * cfg.noise.increments[k])
    drift_in = np.ascontiguousarray(u + ops.dt * b_u)
    return kernels.step_combined(ops.quad, ops.point, drift_in, noise_in)


def step(u_k: Field, k: int, cfg: SolveConfig) -> Field:
    """Advance one frame; raises :class:`BlowUpError` on non-finite output."""
    if u_k.grid != cfg.grid:
        raise GridMismatchError("state grid does not match solve grid")
    if not 0 <= k < cfg.grid.nt:
        raise InvalidArgumentError(f"step index {k} outside 0..{cfg.grid.nt - 1}")
    out = _step_values(_SolverOps(cfg), cfg, u_k.values, k)
    if not np.all(np.isfinite(out)):
        raise BlowUpError(f"non-finite value produced at step {k}")
    return Field(cfg.grid, out)


@dataclass(frozen=True)
class SolveOutput:
    trajectory: Trajectory
    stoch_convolution: np.ndarray | None = None  # (n_frames, nx)
    drift_convolution: np.ndarray | None = None  # (n_frames, nx)


def _frame_norm(values: np.ndarray, abs_xs: np.ndarray, h_t: float) -> float:
    return float(np.max(np.abs(values) * np.exp(-h_t * abs_xs)))


def solve(cfg: SolveConfig) -> Trajectory:
    """Run the full time loop; early stop becomes a status, never an error."""
    return solve_tracked(cfg, track_stoch=False).trajectory


def solve_tracked(
    cfg: SolveConfig, track_stoch: bool = True, track_drift: bool = False
) -> SolveOutput:
    """Run the time loop, optionally accumulating the mild-form parts.

    The tracked stochastic (and drift) convolutions use the same one-step
    kernels as the state update, so ``u_k = P_{t_k} u_0 + X_k + V_k`` holds
    to rounding for every frame.
    """
    ops = _SolverOps(cfg)
    grid = cfg.grid
    sched = cfg.schedule()
    abs_xs = np.abs(grid.nodes())
    monitor = cfg.monitor

    u = cfg.initial.values.copy()
    frames = [u.copy()]
    v = np.zeros(grid.nx) if track_stoch else None
    x_drift = np.zeros(grid.nx) if track_drift else None
    vs = [v.copy()] if track_stoch else None
    xs_acc = [x_drift.copy()] if track_drift else None
    status: TrajectoryStatus | None = None

    def monitor_fires(values: np.ndarray, k: int) -> bool:
        if monitor is None or not monitor.enabled:
            return False
        return _frame_norm(values, abs_xs, sched.h(k * grid.dt)) >= monitor.blow_up_level

    if monitor_fires(u, 0):
        status = TrajectoryStatus.stopped(0, "tau_M")
    else:
        for k in range(grid.nt):
            b_u = np.asarray(cfg.coeffs.b(u), dtype=np.float64)
            s_u = np.asarray(cfg.coeffs.sigma(u), dtype=np.float64)
            noise_in = np.ascontiguousarray(s_u * cfg.noise.increments[k])
            drift_in = np.ascontiguousarray(u + grid.dt * b_u)
            u_next = kernels.step_combined(ops.quad, ops.point, drift_in, noise_in)
            if not np.all(np.isfinite(u_next)):
                status = TrajectoryStatus.stopped(k, "blow_up")
                break
            u = u_next
            frames.append(u.copy())
            if track_stoch:
                v = ops.quad @ v + ops.point @ noise_in
                vs.append(v.copy())
            if track_drift:
                x_drift = ops.quad @ (x_drift + grid.dt * b_u)
                xs_acc.append(x_drift.copy())
            if monitor_fires(u, k + 1):
                status = TrajectoryStatus.stopped(k + 1, "tau_M")
                break

    traj = Trajectory.from_array(
        grid, np.stack(frames), status or TrajectoryStatus.completed()
    )
    return SolveOutput(
        trajectory=traj,
        stoch_convolution=np.stack(vs) if track_stoch else None,
        drift_convolution=np.stack(xs_acc) if track_drift else None,
    )


@dataclass(frozen=True)
class StoppingTimes:
    tau_M: float
    tau_delta: float
    tau: float


def stopping_times(
    traj: Trajectory,
    other: Trajectory | None,
    monitor: StoppingMonitor,
    weights: WeightParams,
) -> StoppingTimes:
    """First frame times at which the monitor levels are reached.

    ``tau_M`` scans the time-warped weighted norm of both trajectories;
    ``tau_delta`` needs ``other`` and scans the norm of the difference.
    Frames where nothing fires contribute the ``inf`` sentinel (inf of an
    empty set); ``tau`` is ``min(tau_M, tau_delta, horizon)``.
    """
    sched = weights.schedule()
    grid = traj.grid
    abs_xs = np.abs(grid.nodes())
    if other is not None and other.grid != grid:
        raise GridMismatchError("trajectories live on different grids")

    tau_m = math.inf
    scans = [traj] if other is None else [traj, other]
    for tr in scans:
        for k, frame in enumerate(tr.frames):
            if _frame_norm(frame.values, abs_xs, sched.h(k * grid.dt)) >= monitor.blow_up_level:
                tau_m = min(tau_m, k * grid.dt)
                break

    tau_delta = math.inf
    if other is not None and monitor.closeness_level is not None:
        n_common = min(len(traj.frames), len(other.frames))
        for k in range(n_common):
            diff = traj.frames[k].values - other.frames[k].values
            if _frame_norm(diff, abs_xs, sched.h(k * grid.dt)) >= monitor.closeness_level:
                tau_delta = k * grid.dt
                break

    return StoppingTimes(
        tau_M=tau_m,
        tau_delta=tau_delta,
        tau=min(tau_m, tau_delta, grid.horizon),
    )
