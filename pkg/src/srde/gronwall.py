"""Executable forms of the two Gronwall-type inequalities, with ODE harnesses.

Log-Gronwall: if ``X(t) <= M(t) + int c1 X + int c2 X log+ X`` with ``M``
increasing and ``M(0) >= 1``, then

    X(t) <= M(t)^exp(C2(t)) * exp(exp(C2(t)) * int_0^t c1(s) exp(-C2(s)) ds),

with ``C2`` the antiderivative of ``c2``.  The extremal ODE
``Y' = c1 Y + c2 Y log Y, Y(0) = M(0)`` saturates the bound exactly, which
makes the verification harness sharp: any ratio above 1 beyond integrator
tolerance is an implementation bug.

Zero-forcing: if ``Y <= c1 int Y + c2 int Y log+(1/Y) + c3(t,theta) int Y^theta``
for every ``theta`` near 1 and ``(1-theta) c3(t,theta)`` stays bounded, then
``Y = 0``.  The executable content is the explicit theta-indexed ceiling

    e^{c1(T) T*} * (c2(T) T*/e + (1-theta) c3(T,theta) T*)^{1/(1-theta)},
    T* = min(T, 1/(3 delta_T), e/(3 c2(T))),

which tends to 0 along theta -> 1.  The base never exceeds 1/3, so the
ceiling underflows float64 beyond theta ~ 1 - 2^-10; log-space values are
exposed alongside for monotonicity checks.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy import integrate

from .errors import InvalidArgumentError, SrdeError

_QUAD_OPTS = dict(epsabs=1e-13, epsrel=1e-9, limit=400)


class GronwallViolationError(SrdeError, AssertionError):
    """The ODE harness exceeded the closed-form bound beyond tolerance."""


@dataclass(frozen=True)
class GronwallData:
    """Inputs of the log-Gronwall bound.

    ``M`` must be increasing with ``M(0) >= 1``; ``c1``, ``c2`` nonnegative
    rate functions.  ``c2_antiderivative`` and ``inner_integral`` (the maps
    ``t -> int_0^t c2`` and ``t -> int_0^t c1 exp(-C2)``) may be supplied
    when closed forms exist; otherwise adaptive quadrature is used, with
    ``breakpoints`` as subdivision hints.
    """

    M: Callable[[float], float]
    c1: Callable[[float], float]
    c2: Callable[[float], float]
    c2_antiderivative: Callable[[float], float] | None = None
    inner_integral: Callable[[float], float] | None = None
    breakpoints: tuple[float, ...] = ()

    def C2(self, t: float) -> float:
        if self.c2_antiderivative is not None:
            return self.c2_antiderivative(t)
        pts = [b for b in self.breakpoints if 0.0 < b < t]
        val, _ = integrate.quad(self.c2, 0.0, t, points=pts or None, **_QUAD_OPTS)
        return val

    def inner(self, t: float) -> float:
        if self.inner_integral is not None:
            return self.inner_integral(t)
        pts = [b for b in self.breakpoints if 0.0 < b < t]
        fn = lambda s: self.c1(s) * math.exp(-self.C2(s))
        val, _ = integrate.quad(fn, 0.0, t, points=pts or None, **_QUAD_OPTS)
        return val

    def validate(self, t_max: float, samples: int = 65) -> None:
        ts = np.linspace(0.0, t_max, samples)
        ms = np.array([self.M(t) for t in ts])
        if ms[0] < 1.0:
            raise InvalidArgumentError(f"M(0) must be >= 1, got {ms[0]}")
        if np.any(np.diff(ms) < -1e-12 * np.abs(ms[:-1])):
            raise InvalidArgumentError("M must be increasing on [0, t_max]")
        for fn, name in ((self.c1, "c1"), (self.c2, "c2")):
            vals = np.array([fn(t) for t in ts])
            if np.any(vals < 0):
                raise InvalidArgumentError(f"{name} must be nonnegative")


def log_gronwall_bound(data: GronwallData, t: float) -> float:
    """Closed-form ceiling at time ``t``; ``inf`` on double-exponential overflow."""
    if t < 0:
        raise InvalidArgumentError(f"t must be >= 0, got {t}")
    E = math.exp(data.C2(t))
    m = data.M(t)
    if m < 1.0:
        raise InvalidArgumentError(f"M(t) must be >= 1, got {m} at t={t}")
    log_bound = E * math.log(m) + E * data.inner(t)
    return math.exp(log_bound) if log_bound < 709.0 else math.inf


@dataclass(frozen=True)
class GronwallVerification:
    times: np.ndarray
    ode_values: np.ndarray
    bounds: np.ndarray
    max_ratio: float
    ode_resolution: int


def _rk4_extremal(data: GronwallData, t_max: float, steps: int) -> np.ndarray:
    # rates are held at their step-midpoint values: exact for the
    # piecewise-constant families (whose breakpoints align with the step
    # grid), and removes the wrong-sided stage lookups a discontinuity
    # would otherwise cause at shared step/segment edges
    h = t_max / steps
    mids = (np.arange(steps) + 0.5) * h
    a = np.array([data.c1(t) for t in mids])
    b = np.array([data.c2(t) for t in mids])
    ys = np.empty(steps + 1)
    y = data.M(0.0)
    ys[0] = y
    for k in range(steps):
        ak = a[k]
        bk = b[k]
        k1 = ak * y + bk * y * math.log(max(y, 1.0))
        y2 = y + h / 2.0 * k1
        k2 = ak * y2 + bk * y2 * math.log(max(y2, 1.0))
        y3 = y + h / 2.0 * k2
        k3 = ak * y3 + bk * y3 * math.log(max(y3, 1.0))
        y4 = y + h * k3
        k4 = ak * y4 + bk * y4 * math.log(max(y4, 1.0))
        y = y + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        ys[k + 1] = y
    return ys


def verify_log_gronwall(
    data: GronwallData,
    t_max: float,
    steps: int = 256,
    tolerance: float = 1e-6,
) -> GronwallVerification:
    """Integrate the extremal ODE and compare against the closed-form bound.

    Rates are sampled at step midpoints; the fixed-step integration is
    halved until two resolutions agree to 1e-8
    relative; the comparison then runs on the requested ``steps`` grid.
    Raises :class:`GronwallViolationError` if the ODE exceeds the bound by
    more than ``tolerance`` (relative).
    """
    if steps < 100:
        raise InvalidArgumentError(f"steps must be >= 100, got {steps}")
    data.validate(t_max)

    n = steps
    coarse = _rk4_extremal(data, t_max, n)
    while True:
        fine = _rk4_extremal(data, t_max, 2 * n)
        agreement = np.max(np.abs(fine[::2] - coarse) / np.maximum(np.abs(coarse), 1.0))
        if agreement <= 1e-8 or n >= 65536:
            break
        coarse, n = fine, 2 * n

    sample = fine[:: (2 * n) // steps]
    times = np.linspace(0.0, t_max, steps + 1)
    bounds = np.array([log_gronwall_bound(data, t) for t in times])
    with np.errstate(invalid="ignore"):
        ratios = np.where(bounds == math.inf, 0.0, sample / bounds)
    max_ratio = float(np.max(ratios))
    if max_ratio > 1.0 + tolerance:
        raise GronwallViolationError(
            f"extremal ODE exceeds the log-Gronwall bound: max ratio {max_ratio}"
        )
    return GronwallVerification(
        times=times, ode_values=sample, bounds=bounds, max_ratio=max_ratio,
        ode_resolution=2 * n,
    )


class PiecewiseConstantRates:
    """Nonnegative piecewise-constant rate pair with exact integrals.

    Segments split ``[0, t_max]`` uniformly; values are right-continuous.
    Supplies exact ``C2`` and ``int c1 exp(-C2)`` so bound evaluations do not
    pay nested quadrature.
    """

    def __init__(self, c1_values: Sequence[float], c2_values: Sequence[float], t_max: float):
        if len(c1_values) != len(c2_values) or len(c1_values) == 0:
            raise InvalidArgumentError("c1_values and c2_values must have equal positive length")
        self.a = np.asarray(c1_values, dtype=np.float64)
        self.b = np.asarray(c2_values, dtype=np.float64)
        if np.any(self.a < 0) or np.any(self.b < 0):
            raise InvalidArgumentError("rates must be nonnegative")
        self.t_max = float(t_max)
        self.edges = np.linspace(0.0, t_max, len(c1_values) + 1)
        self._C2_edges = np.concatenate([[0.0], np.cumsum(self.b * np.diff(self.edges))])
        inner_segments = []
        acc = 0.0
        for j in range(len(self.a)):
            dt_j = self.edges[j + 1] - self.edges[j]
            c2e = math.exp(-self._C2_edges[j])
            if self.b[j] > 0:
                seg = self.a[j] * c2e * (1.0 - math.exp(-self.b[j] * dt_j)) / self.b[j]
            else:
                seg = self.a[j] * c2e * dt_j
            inner_segments.append(acc)
            acc += seg
        inner_segments.append(acc)
        self._inner_edges = np.asarray(inner_segments)

    def _segment(self, t: float) -> int:
        j = int(np.searchsorted(self.edges, t, side="right")) - 1
        return min(max(j, 0), len(self.a) - 1)

    def c1(self, t: float) -> float:
        return float(self.a[self._segment(t)])

    def c2(self, t: float) -> float:
        return float(self.b[self._segment(t)])

    def C2(self, t: float) -> float:
        j = self._segment(t)
        return float(self._C2_edges[j] + self.b[j] * (t - self.edges[j]))

    def inner(self, t: float) -> float:
        j = self._segment(t)
        dt_j = t - self.edges[j]
        c2e = math.exp(-self._C2_edges[j])
        if self.b[j] > 0:
            seg = self.a[j] * c2e * (1.0 - math.exp(-self.b[j] * dt_j)) / self.b[j]
        else:
            seg = self.a[j] * c2e * dt_j
        return float(self._inner_edges[j] + seg)

    def data(self, M: Callable[[float], float] | float = 1.0) -> GronwallData:
        m_fn = M if callable(M) else (lambda t, m0=float(M): m0)
        return GronwallData(
            M=m_fn, c1=self.c1, c2=self.c2,
            c2_antiderivative=self.C2, inner_integral=self.inner,
            breakpoints=tuple(self.edges[1:-1]),
        )


# --- zero-forcing ------------------------------------------------------------

@dataclass(frozen=True)
class ZeroForcingData:
    """Inputs of the zero-forcing inequality.

    ``c1``, ``c2`` nonnegative increasing in time, ``c3(t, theta)`` increasing
    in ``t``; ``epsilon`` is the lower theta-cutoff and ``delta_T`` the limsup
    of ``(1-theta) c3(T, theta)`` as ``theta -> 1`` (estimated by sampling if
    omitted).
    """

    c1: Callable[[float], float]
    c2: Callable[[float], float]
    c3: Callable[[float, float], float]
    T: float
    epsilon: float = 0.0
    delta_T: float | None = None

    def __post_init__(self) -> None:
        if not (0.0 <= self.epsilon < 1.0):
            raise InvalidArgumentError(f"epsilon must lie in [0, 1), got {self.epsilon}")
        if not self.T > 0:
            raise InvalidArgumentError(f"T must be > 0, got {self.T}")

    def resolved_delta(self) -> float:
        if self.delta_T is not None:
            return self.delta_T
        thetas = 1.0 - 2.0 ** (-np.arange(4, 24, dtype=np.float64))
        thetas = thetas[thetas > self.epsilon]
        vals = [(1.0 - th) * self.c3(self.T, th) for th in thetas]
        return float(max(vals))

    def check_hypothesis(self, samples: int = 20) -> None:
        """Verify ``(1-theta) c3(T, theta)`` stays below delta_T near theta=1."""
        delta = self.resolved_delta()
        ks = np.arange(2, 2 + samples, dtype=np.float64)
        for th in 1.0 - 2.0 ** (-ks):
            if th <= self.epsilon:
                continue
            if (1.0 - th) * self.c3(self.T, th) > delta * (1.0 + 1e-6):
                raise InvalidArgumentError(
                    f"(1-theta)*c3(T,theta) exceeds delta_T={delta} at theta={th}; "
                    f"the zero-forcing hypothesis fails"
                )


def zero_forcing_t_star(data: ZeroForcingData) -> float:
    """``min(T, 1/(3 delta_T), e/(3 c2(T)))`` with vanishing denominators dropped."""
    delta = data.resolved_delta()
    candidates = [data.T]
    if delta > 0:
        candidates.append(1.0 / (3.0 * delta))
    c2T = data.c2(data.T)
    if c2T > 0:
        candidates.append(math.e / (3.0 * c2T))
    return min(candidates)


def zero_forcing_bound_log(data: ZeroForcingData, theta: float) -> float:
    """Natural log of the theta-indexed ceiling (``-inf`` when the base is 0)."""
    if not (data.epsilon < theta < 1.0):
        raise InvalidArgumentError(
            f"theta must lie in ({data.epsilon}, 1), got {theta}"
        )
    t_star = zero_forcing_t_star(data)
    base = data.c2(data.T) * t_star / math.e + (1.0 - theta) * data.c3(data.T, theta) * t_star
    if base == 0.0:
        return -math.inf
    return data.c1(data.T) * t_star + math.log(base) / (1.0 - theta)


def zero_forcing_bound(data: ZeroForcingData, theta: float) -> float:
    """The theta-indexed ceiling itself (underflows to 0 for theta very near 1)."""
    lg = zero_forcing_bound_log(data, theta)
    return math.exp(lg) if lg < 709.0 else math.inf


def zero_forcing_limit(data: ZeroForcingData, thetas: Sequence[float]) -> float:
    """Min of the ceiling over a theta sweep increasing toward 1.

    Validates the boundedness hypothesis first, then takes the best bound;
    any single theta already certifies its value, so the min is a certified
    ceiling for the quantity the inequality controls on ``[0, T*]``.
    """
    ths = list(thetas)
    if not ths or any(not (data.epsilon < th < 1.0) for th in ths):
        raise InvalidArgumentError("thetas must be a nonempty sweep inside (epsilon, 1)")
    if any(b >= a for a, b in zip(ths[1:], ths[:-1])):
        raise InvalidArgumentError("thetas must increase toward 1")
    data.check_hypothesis()
    return min(zero_forcing_bound(data, th) for th in ths)


def zero_forcing_iterations(data: ZeroForcingData) -> int:
    """Number of ``[0, T*]`` windows needed to cover ``[0, T]`` by repetition."""
    return int(math.ceil(data.T / zero_forcing_t_star(data)))
