"""Time-warped weighted sup-norms and the admissible-horizon formulas.

The weight is ``exp(-h(t)|x|)`` with the increasing exponent schedule
``h(t) = lambda * exp(beta*t)``, where ``beta = max(lambda^2/2, 4*kappa)``.
The horizon ``t_star`` is the largest time up to which the drift-absorption
step of the a-priori argument retains its factor-1/2 headroom:

    t_star = (1 / (2 beta)) * (1 + log((4 beta / lambda^2) * log(beta / (2 kappa))))

For ``kappa = 0`` the restriction is vacuous and ``t_star`` is ``+inf``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import GridMismatchError, InvalidArgumentError
from .grid import Field, Trajectory


def beta(lam: float, kappa: float) -> float:
    """Rate ``max(lam^2/2, 4*kappa)``; requires ``lam > 0`` and ``kappa >= 0``."""
    if not lam > 0:
        raise InvalidArgumentError(f"lambda must be > 0, got {lam}")
    if kappa < 0:
        raise InvalidArgumentError(f"kappa must be >= 0, got {kappa}")
    return max(lam * lam / 2.0, 4.0 * kappa)


def t_star(lam: float, kappa: float) -> float:
    """Admissible horizon for the weight pair ``(lam, kappa)``; ``kappa > 0``."""
    if not lam > 0:
        raise InvalidArgumentError(f"lambda must be > 0, got {lam}")
    if not kappa > 0:
        raise InvalidArgumentError(f"kappa must be > 0, got {kappa}")
    b = beta(lam, kappa)
    # b >= 4*kappa makes b/(2*kappa) >= 2, so the nested logarithm is positive
    ratio = b / (2.0 * kappa)
    assert ratio >= 2.0 - 1e-12, "beta >= 4*kappa guarantees ratio >= 2"
    inner = (4.0 * b / (lam * lam)) * math.log(ratio)
    assert inner > 0.0
    return (1.0 + math.log(inner)) / (2.0 * b)


@dataclass(frozen=True)
class WeightParams:
    """Weight decay rate, drift-growth rate, and the derived pair (beta, t_star)."""

    lam: float
    kappa: float
    beta: float = field(init=False)
    t_star: float = field(init=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "beta", beta(self.lam, self.kappa))
        ts = math.inf if self.kappa == 0 else t_star(self.lam, self.kappa)
        object.__setattr__(self, "t_star", ts)

    def schedule(self) -> "WeightSchedule":
        return WeightSchedule(lam=self.lam, beta_rate=self.beta, params=self)


@dataclass(frozen=True)
class WeightSchedule:
    """The exponent schedule ``h(t) = lam * exp(beta_rate * t)``."""

    lam: float
    beta_rate: float
    params: WeightParams | None = None

    def __post_init__(self) -> None:
        if not self.lam > 0:
            raise InvalidArgumentError(f"lambda must be > 0, got {self.lam}")
        if self.beta_rate < 0:
            raise InvalidArgumentError(f"beta must be >= 0, got {self.beta_rate}")

    def h(self, t: float) -> float:
        return self.lam * math.exp(self.beta_rate * t)


def static_weighted_norm(f: Field, lam: float) -> float:
    """``max_i |f(x_i)| exp(-lam |x_i|)``."""
    if not lam > 0:
        raise InvalidArgumentError(f"lambda must be > 0, got {lam}")
    xs = f.grid.nodes()
    return float(np.max(np.abs(f.values) * np.exp(-lam * np.abs(xs))))


def weighted_sup_norm(traj: Trajectory, sched: WeightSchedule, up_to: float) -> float:
    """``max over frames t <= up_to, nodes x of |u(t,x)| exp(-h(t)|x|)``."""
    if up_to > traj.grid.horizon * (1 + 1e-12):
        raise InvalidArgumentError(
            f"up_to={up_to} exceeds trajectory horizon {traj.grid.horizon}"
        )
    xs = np.abs(traj.grid.nodes())
    best = 0.0
    for k, frame in enumerate(traj.frames):
        t = k * traj.grid.dt
        if t > up_to * (1 + 1e-12):
            break
        val = float(np.max(np.abs(frame.values) * np.exp(-sched.h(t) * xs)))
        best = max(best, val)
    return best


def weighted_sup_values(values: np.ndarray, xs: np.ndarray, h_of_t: np.ndarray) -> float:
    """Array version: ``values`` is (n_frames, nx), ``h_of_t`` is (n_frames,)."""
    weights = np.exp(-h_of_t[:, None] * np.abs(xs)[None, :])
    return float(np.max(np.abs(values) * weights))


def ctem_distance(f: Field, g: Field, terms: int = 20) -> float:
    """Truncated metric ``sum_n 2^-n min(1, |f-g| weighted at rate 1/n)``.

    Truncation error is below ``2^-terms``.
    """
    if terms < 1:
        raise InvalidArgumentError(f"terms must be >= 1, got {terms}")
    if f.grid != g.grid:
        raise GridMismatchError("fields live on different grids")
    diff = f - g
    total = 0.0
    for n in range(1, terms + 1):
        total += 2.0 ** (-n) * min(1.0, static_weighted_norm(diff, 1.0 / n))
    return total
