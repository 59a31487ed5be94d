"""Explicit constants of the stochastic-convolution moment bounds.

The high-order constant (valid for moment order ``p > 10``, weight exponent
``h_T`` at the horizon ``T``) is

    C(p, h_T, T) = 2*sqrt(2) * p^(p/2) * (2/pi)^p * (2*pi)^(-(p/2+1)/2)
                   * ((6p-8)/(p-10))^(3p/2-2) * T^(p/4-3/2)
                   * exp(3 p^2 h_T^2 T / 4).

The lower-order constant (``0 < p <= 10``) comes from a Young split at
weight ``eps`` and an infimum over an auxiliary order ``q > 10``:

    C(eps, p, h_T, T) = inf_q  p/(q-p) * q^(-q/p) * eps^(1-q/p)
                               * (q - p + q*C(q, h_T, T))^(q/p).

Both explode far beyond float64 range at everyday parameters, so the
primary computations run in log space; plain-value wrappers return ``inf``
honestly on overflow.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidArgumentError


@dataclass(frozen=True)
class MomentBoundParams:
    """Parameter bundle for one moment-bound evaluation."""

    p: float
    h_T: float
    T: float
    epsilon: float | None = None

    def __post_init__(self) -> None:
        if not self.p > 0:
            raise InvalidArgumentError(f"p must be > 0, got {self.p}")
        if self.h_T < 0:
            raise InvalidArgumentError(f"h_T must be >= 0, got {self.h_T}")
        if not self.T > 0:
            raise InvalidArgumentError(f"T must be > 0, got {self.T}")


def log_constant_high_order(p: float, h_T: float, T: float) -> float:
    """Natural log of the high-order constant; requires ``p > 10``."""
    if not p > 10:
        raise InvalidArgumentError(f"high-order constant needs p > 10, got {p}")
    if h_T < 0:
        raise InvalidArgumentError(f"h_T must be >= 0, got {h_T}")
    if not T > 0:
        raise InvalidArgumentError(f"T must be > 0, got {T}")
    return (
        math.log(2.0 * math.sqrt(2.0))
        + (p / 2.0) * math.log(p)
        + p * math.log(2.0 / math.pi)
        - (p / 2.0 + 1.0) / 2.0 * math.log(2.0 * math.pi)
        + (1.5 * p - 2.0) * math.log((6.0 * p - 8.0) / (p - 10.0))
        + (p / 4.0 - 1.5) * math.log(T)
        + 0.75 * p * p * h_T * h_T * T
    )


def constant_high_order(p: float, h_T: float, T: float) -> float:
    """The high-order constant itself; ``inf`` if it overflows float64."""
    lg = log_constant_high_order(p, h_T, T)
    return math.exp(lg) if lg < 709.0 else math.inf


def default_q_grid(count: int = 256, q_max: float = 200.0) -> np.ndarray:
    """Log-spaced auxiliary orders in ``(10, q_max]``."""
    return 10.0 + np.logspace(math.log10(0.05), math.log10(q_max - 10.0), count)


def _log_lower_order_at(q: float, eps: float, p: float, h_T: float, T: float) -> float:
    log_cq = log_constant_high_order(q, h_T, T)
    # log(q - p + q*C_q) computed stably for huge C_q
    log_q_cq = math.log(q) + log_cq
    if log_q_cq > 60.0:
        log_bracket = log_q_cq + math.log1p((q - p) * math.exp(-log_q_cq))
    else:
        log_bracket = math.log((q - p) + q * math.exp(log_cq))
    return (
        math.log(p / (q - p))
        - (q / p) * math.log(q)
        + (1.0 - q / p) * math.log(eps)
        + (q / p) * log_bracket
    )


def log_constant_lower_order(
    eps: float,
    p: float,
    h_T: float,
    T: float,
    q_grid: np.ndarray | None = None,
) -> float:
    """Natural log of the lower-order constant (grid-infimum over ``q``).

    The grid minimum is refined once around the argmin; any grid point gives
    a valid constant, so the result is a certified upper bound on the true
    infimum.
    """
    if not eps > 0:
        raise InvalidArgumentError(f"epsilon must be > 0, got {eps}")
    if not 0 < p <= 10:
        raise InvalidArgumentError(f"lower-order constant needs 0 < p <= 10, got {p}")
    if q_grid is None:
        q_grid = default_q_grid()
    qs = np.asarray(q_grid, dtype=np.float64)
    if qs.size == 0 or np.any(qs <= 10.0):
        raise InvalidArgumentError("q_grid must be nonempty with all entries > 10")

    vals = np.array([_log_lower_order_at(q, eps, p, h_T, T) for q in qs])
    i = int(np.argmin(vals))
    lo = qs[max(i - 1, 0)]
    hi = qs[min(i + 1, qs.size - 1)]
    refined = np.linspace(lo, hi, 33)
    refined = refined[refined > 10.0]
    vals2 = np.array([_log_lower_order_at(q, eps, p, h_T, T) for q in refined])
    return float(min(vals.min(), vals2.min()))


def constant_lower_order(
    eps: float,
    p: float,
    h_T: float,
    T: float,
    q_grid: np.ndarray | None = None,
) -> float:
    """The lower-order constant; ``inf`` if it overflows float64."""
    lg = log_constant_lower_order(eps, p, h_T, T, q_grid)
    return math.exp(lg) if lg < 709.0 else math.inf


def log_constant_exact_diagnostic(
    p: float, h_T: float, T: float, alpha_count: int = 129
) -> float:
    """Log of the sharper two-factor constant minimized over the free exponent.

    The factorization method leaves an exponent ``alpha`` free inside
    ``(3/(2p), 1/4 - 1/p)``; this evaluates the product of the two
    alpha-indexed factors on a grid and returns the log of the minimum.
    Diagnostic only; the simplified closed form above is the contract.
    """
    if not p > 10:
        raise InvalidArgumentError(f"diagnostic constant needs p > 10, got {p}")
    lo, hi = 1.5 / p, 0.25 - 1.0 / p
    alphas = np.linspace(lo, hi, alpha_count + 2)[1:-1]
    best = math.inf
    for a in alphas:
        log_c1 = (
            p * math.log(math.sin(math.pi * a) / math.pi)
            - 0.5 * math.log(math.pi)
            + p * p * h_T * h_T * T / 4.0
            + (p - 1.0) * math.log((p - 1.0) / (a * p - 1.5))
            + (a * p - 1.5) * math.log(T)
        )
        log_c2 = (
            (p / 2.0) * math.log(4.0 * p / math.sqrt(2.0 * math.pi))
            + ((p - 2.0) / 2.0) * math.log((p - 2.0) / (p / 2.0 - 2.0 - 2.0 * a * p))
            + (p / 4.0 - a * p) * math.log(T)
            + math.log(2.0)
            + p * p * h_T * h_T * T / 2.0
        )
        best = min(best, log_c1 + log_c2)
    return best
