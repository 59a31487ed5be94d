"""Drift and stochastic convolutions against the heat kernel.

The stochastic convolution of a per-step field ``g`` (typically
``sigma(u)``) against a noise slab is the Ito-style double sum

    V(t_k, x_i) = sum_{m < k} sum_j p_{t_k - t_m}(x_i, y_j) g(t_m, y_j) dW[m, j],

evaluated with exact-lag kernels; the final (singular) slice ``m = k`` is
dropped, matching the adaptedness of the integrand (its omitted L2 mass is
O(sqrt(dt))).  The factorized route represents the same object as a
deterministic fractional smoothing of an auxiliary singular stochastic
field; it is quadratically expensive and exists as a correctness
cross-check, not the production path.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .backend import kernels
from .errors import GridMismatchError, InvalidArgumentError
from .grid import Field, Trajectory
from .heat_kernel import semigroup_matrix
from .noise import NoiseSlab


@dataclass(frozen=True)
class FactorizationParams:
    """Fractional exponent for the factorized stochastic convolution.

    The representation needs ``3/(2p) < alpha < 1/4 - 1/p``, a nonempty
    interval exactly when the moment order ``p`` exceeds 10.
    """

    p: float
    alpha: float

    def __post_init__(self) -> None:
        if not self.p > 10:
            raise InvalidArgumentError(f"factorization needs p > 10, got {self.p}")
        lo, hi = self.interval(self.p)
        if not (lo < self.alpha < hi):
            raise InvalidArgumentError(
                f"alpha must lie in ({lo}, {hi}) for p={self.p}, got {self.alpha}"
            )

    @staticmethod
    def interval(p: float) -> tuple[float, float]:
        return 1.5 / p, 0.25 - 1.0 / p

    @classmethod
    def midpoint(cls, p: float) -> "FactorizationParams":
        lo, hi = cls.interval(p)
        return cls(p=p, alpha=0.5 * (lo + hi))


def _sig_frames(traj: Trajectory, n_steps: int) -> np.ndarray:
    if len(traj.frames) < n_steps:
        raise InvalidArgumentError(
            f"trajectory provides {len(traj.frames)} frames, need {n_steps}"
        )
    return np.ascontiguousarray(traj.stacked()[:n_steps])


def drift_convolution(b_of_u: Trajectory, t_index: int) -> Field:
    """Time-space quadrature of the drift convolution up to frame ``t_index``.

    Left endpoint in time (lags ``dt..t_k``, so the singular slice never
    appears), trapezoid in space.
    """
    grid = b_of_u.grid
    if not 0 <= t_index <= len(b_of_u.frames) - 1:
        raise InvalidArgumentError(f"t_index {t_index} outside available frames")
    out = np.zeros(grid.nx)
    frames = b_of_u.stacked()
    for m in range(t_index):
        lag = (t_index - m) * grid.dt
        out += grid.dt * (semigroup_matrix(grid, lag) @ frames[m])
    return Field(grid, out)


def _check_slab(traj: Trajectory, noise: NoiseSlab) -> None:
    if traj.grid != noise.grid:
        raise GridMismatchError("trajectory and noise slab live on different grids")


def stoch_conv_direct(sigma_of_u: Trajectory, noise: NoiseSlab, t_index: int) -> Field:
    """Direct double-sum stochastic convolution at frame ``t_index``."""
    _check_slab(sigma_of_u, noise)
    grid = noise.grid
    if not 0 <= t_index <= grid.nt:
        raise InvalidArgumentError(f"t_index {t_index} outside 0..{grid.nt}")
    sig = _sig_frames(sigma_of_u, t_index) if t_index > 0 else np.zeros((0, grid.nx))
    dW = np.ascontiguousarray(noise.increments[:t_index])
    values = kernels.conv_direct_at(grid.nodes(), grid.dt, t_index, sig, dW)
    return Field(grid, values)


def stoch_conv_direct_full(sigma_of_u: Trajectory | np.ndarray, noise: NoiseSlab) -> np.ndarray:
    """Direct stochastic convolution at every frame, as (nt+1, nx)."""
    grid = noise.grid
    if isinstance(sigma_of_u, Trajectory):
        _check_slab(sigma_of_u, noise)
        sig = _sig_frames(sigma_of_u, grid.nt)
    else:
        sig = np.ascontiguousarray(sigma_of_u[: grid.nt])
    return kernels.conv_direct_full(grid.nodes(), grid.dt, sig, np.ascontiguousarray(noise.increments))


def stoch_conv_direct_series(
    sigma_of_u: Trajectory | np.ndarray, noise: NoiseSlab, node_indices: np.ndarray
) -> np.ndarray:
    """Time series of the direct convolution at selected nodes, (nt+1, nsel)."""
    grid = noise.grid
    if isinstance(sigma_of_u, Trajectory):
        _check_slab(sigma_of_u, noise)
        sig = _sig_frames(sigma_of_u, grid.nt)
    else:
        sig = np.ascontiguousarray(sigma_of_u[: grid.nt])
    sel = np.ascontiguousarray(np.asarray(node_indices, dtype=np.int64))
    return kernels.conv_direct_series_at(
        grid.nodes(), grid.dt, sel, sig, np.ascontiguousarray(noise.increments)
    )


def stoch_conv_direct_at_nodes(
    sigma_of_u: Trajectory | np.ndarray,
    noise: NoiseSlab,
    t_index: int,
    node_indices: np.ndarray,
) -> np.ndarray:
    """Direct convolution at frame ``t_index``, restricted to selected nodes."""
    grid = noise.grid
    if isinstance(sigma_of_u, Trajectory):
        _check_slab(sigma_of_u, noise)
        sig = _sig_frames(sigma_of_u, t_index) if t_index > 0 else np.zeros((0, grid.nx))
    else:
        sig = np.ascontiguousarray(sigma_of_u[:t_index])
    sel = np.ascontiguousarray(np.asarray(node_indices, dtype=np.int64))
    dW = np.ascontiguousarray(noise.increments[:t_index])
    return kernels.conv_direct_at_nodes(grid.nodes(), grid.dt, t_index, sel, sig, dW)


def stoch_conv_factorized(
    sigma_of_u: Trajectory,
    noise: NoiseSlab,
    fp: FactorizationParams,
    t_index: int,
) -> Field:
    """Factorized stochastic convolution at frame ``t_index`` (cross-check path)."""
    _check_slab(sigma_of_u, noise)
    grid = noise.grid
    if t_index < 1 or t_index > grid.nt:
        raise InvalidArgumentError(f"t_index must lie in 1..{grid.nt}, got {t_index}")
    sig = _sig_frames(sigma_of_u, t_index)
    dW = np.ascontiguousarray(noise.increments[:t_index])
    values = kernels.factorized_field(grid.nodes(), grid.dt, t_index, fp.alpha, sig, dW)
    return Field(grid, values)


def variance_closed_form(t: float) -> float:
    """Pointwise variance ``sqrt(t/pi)`` of the unit-diffusion convolution."""
    if t < 0:
        raise InvalidArgumentError(f"t must be >= 0, got {t}")
    return math.sqrt(t / math.pi)
