"""Drift/diffusion pairs, their growth constants, and mollified families.

The drift of interest grows like ``c1*|u|*log+|u| + c2`` and is only locally
log-Lipschitz; the canonical example is ``u -> u*log|u|``.  ``log+`` is read
as ``log(max(u, 1))`` throughout, and the reciprocal variant appearing in
log-Lipschitz bounds as ``log(max(1/r, 1))`` (zero once ``r >= 1``).

Mollified families smooth a base pair by convolution with the standard bump
``phi(v) = C * exp(-1/(1-v^2))`` at scale ``1/n`` and cut it off with a
smooth plateau ``eta_n`` equal to 1 on ``[-n, n]`` and 0 outside
``(-n-2, n+2)``, making every level Lipschitz with compact support while
keeping the original growth envelope.
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable

import numpy as np
from scipy import integrate

from .errors import InvalidArgumentError, QuadratureError

ArrayLike = np.ndarray | float


def log_plus(u: ArrayLike) -> ArrayLike:
    """``log(max(u, 1))`` for ``u >= 0``."""
    arr = np.asarray(u, dtype=np.float64)
    if np.any(arr < 0):
        raise InvalidArgumentError("log_plus requires u >= 0")
    out = np.log(np.maximum(arr, 1.0))
    return float(out) if np.isscalar(u) or arr.ndim == 0 else out


def log_plus_reciprocal(r: ArrayLike) -> ArrayLike:
    """``log(max(1/r, 1))`` for ``r >= 0``, with the value 0 at ``r = 0`` ... inf.

    Used in log-Lipschitz moduli; equals ``-log(r)`` for ``0 < r < 1`` and 0
    for ``r >= 1``.  At ``r = 0`` the convention ``r*log+(1/r) = 0`` applies,
    so callers multiplying by ``r`` never see the infinity.
    """
    arr = np.asarray(r, dtype=np.float64)
    if np.any(arr < 0):
        raise InvalidArgumentError("log_plus_reciprocal requires r >= 0")
    with np.errstate(divide="ignore"):
        out = np.where(arr < 1.0, -np.log(arr), 0.0)
    return float(out) if np.isscalar(r) or arr.ndim == 0 else out


def drift_xlogx(x: ArrayLike) -> ArrayLike:
    """``x * log|x|`` continued by 0 at the origin."""
    arr = np.asarray(x, dtype=np.float64)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.where(arr == 0.0, 0.0, arr * np.log(np.abs(arr)))
    return float(out) if np.isscalar(x) or arr.ndim == 0 else out


def xlogx_loglip_sides(x: float, y: float) -> tuple[float, float]:
    """Both sides of the log-Lipschitz inequality for ``x*log|x|``.

    lhs = |x log|x| - y log|y||,
    rhs = |x-y| log(1/|x-y|) + (log+(|x| v |y|) + 1 + log 2) |x-y|.

    Returns (0, 0) when x == y.  Note the first rhs term uses the plain
    logarithm, so it is negative once |x-y| > 1; the inequality still holds.
    """
    if x == y:
        return 0.0, 0.0
    d = abs(x - y)
    lhs = abs(drift_xlogx(x) - drift_xlogx(y))
    rhs = d * math.log(1.0 / d) + (log_plus(max(abs(x), abs(y))) + 1.0 + math.log(2.0)) * d
    return lhs, rhs


@dataclass(frozen=True)
class CoefficientSpec:
    """A drift/diffusion pair together with its structural constants.

    ``c1, c2`` bound the drift growth ``|b(u)| <= c1 |u| log+|u| + c2``;
    ``c3, c4, c5`` (optional) are the local log-Lipschitz constants of the
    drift; ``K_sigma`` bounds the diffusion and ``L_sigma`` (optional) is its
    Lipschitz constant.  Constants are supplied, not inferred; sampling
    oracles spot-check them.
    """

    b: Callable[[ArrayLike], ArrayLike]
    sigma: Callable[[ArrayLike], ArrayLike]
    c1: float
    c2: float
    K_sigma: float
    c3: float | None = None
    c4: float | None = None
    c5: float | None = None
    L_sigma: float | None = None
    name: str = "custom"

    def spot_check(self, samples: int = 256, seed: int = 0, radius: float = 50.0) -> None:
        """Sample u and verify the declared growth/boundedness envelopes."""
        rng = np.random.Generator(np.random.Philox(key=np.array([seed, 0], dtype=np.uint64)))
        u = rng.uniform(-radius, radius, size=samples)
        bu = np.asarray(self.b(u), dtype=np.float64)
        envelope = self.c1 * np.abs(u) * log_plus(np.abs(u)) + self.c2
        slack = 1e-12 * (1.0 + envelope)
        if np.any(np.abs(bu) > envelope + slack):
            bad = u[np.abs(bu) > envelope + slack][0]
            raise InvalidArgumentError(
                f"drift growth bound violated at u={bad!r} for preset {self.name!r}"
            )
        su = np.asarray(self.sigma(u), dtype=np.float64)
        if np.any(np.abs(su) > self.K_sigma + 1e-12 * (1.0 + self.K_sigma)):
            bad = u[np.abs(su) > self.K_sigma + 1e-12][0]
            raise InvalidArgumentError(
                f"diffusion bound K_sigma violated at u={bad!r} for preset {self.name!r}"
            )


# --- the standard bump mollifier -------------------------------------------

@lru_cache(maxsize=1)
def _bump_normalizer() -> float:
    # unit integral of exp(-1/(1-v^2)) on (-1, 1), computed once to ~1e-12
    val, _ = integrate.quad(
        lambda v: math.exp(-1.0 / (1.0 - v * v)), -1.0, 1.0, epsabs=1e-14, epsrel=1e-13
    )
    return 1.0 / val


def bump(v: ArrayLike) -> ArrayLike:
    """Normalized smooth bump supported in (-1, 1) with unit integral."""
    arr = np.asarray(v, dtype=np.float64)
    out = np.zeros_like(arr)
    inside = np.abs(arr) < 1.0
    with np.errstate(divide="ignore", over="ignore"):
        out[inside] = np.exp(-1.0 / (1.0 - arr[inside] ** 2))
    out *= _bump_normalizer()
    return float(out) if np.isscalar(v) or arr.ndim == 0 else out


@lru_cache(maxsize=4)
def _smoothstep_table(quad_points: int = 256) -> tuple[np.ndarray, np.ndarray]:
    nodes, weights = np.polynomial.legendre.leggauss(quad_points)
    return nodes, weights


def smoothstep(r: ArrayLike) -> ArrayLike:
    """Smooth monotone ramp: 0 for ``r <= 0``, 1 for ``r >= 1``.

    Built as the cumulative integral of the unit bump rescaled to (0, 1).
    """
    arr = np.atleast_1d(np.asarray(r, dtype=np.float64))
    out = np.zeros_like(arr)
    out[arr >= 1.0] = 1.0
    mid = (arr > 0.0) & (arr < 1.0)
    if np.any(mid):
        nodes, weights = _smoothstep_table()
        # integrate bump over (-1, 2r-1) by mapping Legendre nodes per point
        upper = 2.0 * arr[mid] - 1.0
        half = (upper + 1.0) / 2.0
        pts = -1.0 + half[:, None] * (nodes[None, :] + 1.0)
        out[mid] = (bump(pts) * weights[None, :]).sum(axis=1) * half
    return float(out[0]) if np.isscalar(r) or np.asarray(r).ndim == 0 else out


def cutoff(x: ArrayLike, n: int) -> ArrayLike:
    """Plateau function: 1 on ``[-n, n]``, 0 outside ``(-n-2, n+2)``, smooth."""
    return smoothstep((n + 2.0 - np.abs(np.asarray(x, dtype=np.float64))) / 2.0)


class MollifiedFamily:
    """Level-``n`` smooth, compactly supported approximation of a base pair.

    ``b_n(x) = (int b(x - v/n) phi(v) dv) * eta_n(x)`` and likewise for the
    diffusion, both evaluated by fixed Gauss-Legendre quadrature on the bump
    support.  Scalar evaluations are memoized (thread-safe; the value per
    point is deterministic, so a racing recompute is harmless).
    """

    def __init__(self, base: CoefficientSpec, n: int, quad_points: int = 128):
        if n < 1:
            raise InvalidArgumentError(f"mollification level must be >= 1, got {n}")
        if quad_points < 64:
            raise InvalidArgumentError(f"quad_points must be >= 64, got {quad_points}")
        self.base = base
        self.n = int(n)
        self.quad_points = int(quad_points)
        nodes, weights = np.polynomial.legendre.leggauss(quad_points)
        self._nodes = nodes
        self._weights = weights * bump(nodes)
        self._cache_b: dict[float, float] = {}
        self._cache_sigma: dict[float, float] = {}
        self._lock = threading.Lock()

        span = float(n + 3)
        self.L_n = estimate_lipschitz(self.b, -span, span, 2048)
        self.K_n = estimate_lipschitz(self.sigma, -span, span, 2048)
        self.L_b = self._linear_growth_constant()

    def _smooth(self, f, x: np.ndarray) -> np.ndarray:
        # int f(x - v/n) phi(v) dv on the Legendre stencil
        pts = x[:, None] - self._nodes[None, :] / self.n
        vals = np.asarray(f(pts), dtype=np.float64)
        if not np.all(np.isfinite(vals)):
            raise QuadratureError("base coefficient is non-finite on the mollifier stencil")
        return vals @ self._weights

    def _eval(self, f, cache: dict[float, float], x: ArrayLike) -> ArrayLike:
        arr = np.atleast_1d(np.asarray(x, dtype=np.float64))
        out = self._smooth(f, arr) * cutoff(arr, self.n)
        if np.isscalar(x) or np.asarray(x).ndim == 0:
            key = float(x)
            with self._lock:
                cached = cache.setdefault(key, float(out[0]))
            return cached
        return out

    def b(self, x: ArrayLike) -> ArrayLike:
        return self._eval(self.base.b, self._cache_b, x)

    def sigma(self, x: ArrayLike) -> ArrayLike:
        return self._eval(self.base.sigma, self._cache_sigma, x)

    def _linear_growth_constant(self) -> float:
        # smallest L with |b_n| <= c1 |x| log+|x| + L (|x| + 1) on a dense sample
        xs = np.linspace(-(self.n + 3), self.n + 3, 4096)
        bn = np.abs(self.b(xs))
        log_part = self.base.c1 * np.abs(xs) * log_plus(np.abs(xs))
        return float(np.max((bn - log_part) / (np.abs(xs) + 1.0)))

    @property
    def c1(self) -> float:
        return self.base.c1

    @property
    def K_sigma(self) -> float:
        return self.base.K_sigma


def mollify(base: CoefficientSpec, n: int, quad_points: int = 128) -> MollifiedFamily:
    """Build the level-``n`` mollified family of a coefficient pair."""
    return MollifiedFamily(base, n, quad_points)


def estimate_lipschitz(f: Callable, lo: float, hi: float, samples: int) -> float:
    """Max difference quotient of ``f`` over adjacent equispaced sample pairs.

    A certified lower bound on the true Lipschitz constant, for step-size
    heuristics only.  For drifts with unbounded local slope (x log|x| near 0)
    the estimate keeps growing as ``samples`` does; the true constant is
    infinite there.
    """
    if not lo < hi:
        raise InvalidArgumentError(f"need lo < hi, got [{lo}, {hi}]")
    if samples < 2:
        raise InvalidArgumentError(f"need samples >= 2, got {samples}")
    xs = np.linspace(lo, hi, samples)
    vals = np.asarray(f(xs), dtype=np.float64)
    quot = np.abs(np.diff(vals)) / np.diff(xs)
    return float(np.max(quot))


# --- named presets ----------------------------------------------------------

def _drift_zero() -> tuple[Callable, float, float, tuple]:
    f = lambda u: np.zeros_like(np.asarray(u, dtype=np.float64))
    return f, 0.0, 0.0, (0.0, 0.0, 0.0)


def _drift_linear(a: float) -> tuple[Callable, float, float, tuple]:
    # |a u| <= a |u| log+|u| + a e  (linear below e, dominated above)
    f = lambda u: a * np.asarray(u, dtype=np.float64)
    aa = abs(a)
    return f, aa, aa * math.e, (0.0, 0.0, aa)


def _drift_xlogx(c: float) -> tuple[Callable, float, float, tuple]:
    # |c u log|u|| <= c |u| log+|u| + c/e ; log-Lipschitz constants scale by c
    f = lambda u: c * drift_xlogx(u)
    cc = abs(c)
    return f, cc, cc / math.e, (cc, cc, cc * (1.0 + math.log(2.0)))


_DRIFTS = {"zero": _drift_zero, "linear": _drift_linear, "xlogx": _drift_xlogx}


def _sigma_tanh(K: float) -> tuple[Callable, float, float]:
    f = lambda u: K * np.tanh(np.asarray(u, dtype=np.float64))
    return f, abs(K), abs(K)


def _sigma_constant(K: float) -> tuple[Callable, float, float]:
    f = lambda u: np.full_like(np.asarray(u, dtype=np.float64), K)
    return f, abs(K), 0.0


def _sigma_zero() -> tuple[Callable, float, float]:
    f = lambda u: np.zeros_like(np.asarray(u, dtype=np.float64))
    return f, 0.0, 0.0


_SIGMAS = {"tanh-diffusion": _sigma_tanh, "constant-diffusion": _sigma_constant, "zero": _sigma_zero}


def _parse_call(text: str, kind: str, table: dict) -> tuple[str, list[float]]:
    text = text.strip()
    if "(" in text:
        if not text.endswith(")"):
            raise InvalidArgumentError(f"malformed {kind} preset {text!r}")
        name, _, argstr = text.partition("(")
        args = [float(a) for a in argstr[:-1].split(",") if a.strip()]
    else:
        name, args = text, []
    name = name.strip()
    if name not in table:
        raise InvalidArgumentError(
            f"unknown {kind} preset {name!r}; available: {sorted(table)}"
        )
    return name, args


def coefficient_preset(drift: str, sigma: str) -> CoefficientSpec:
    """Build a :class:`CoefficientSpec` from preset strings.

    Drifts: ``zero``, ``linear(a)``, ``xlogx(c)``.
    Diffusions: ``zero``, ``tanh-diffusion(K)``, ``constant-diffusion(K)``.
    """
    dname, dargs = _parse_call(drift, "drift", _DRIFTS)
    sname, sargs = _parse_call(sigma, "diffusion", _SIGMAS)
    b, c1, c2, (c3, c4, c5) = _DRIFTS[dname](*dargs)
    s, K, L = _SIGMAS[sname](*sargs)
    return CoefficientSpec(
        b=b, sigma=s, c1=c1, c2=c2, c3=c3, c4=c4, c5=c5,
        K_sigma=K, L_sigma=L, name=f"{drift}|{sigma}",
    )
