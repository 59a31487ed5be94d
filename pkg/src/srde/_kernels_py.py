"""Numpy implementation of the hot kernels (fallback backend).

Same signatures as the compiled core in ``_core.pyx``; all arrays are
C-contiguous float64.  ``sig`` and ``dW`` are (nt, nx) per-step fields and
noise increments; lag kernels are point values (the dt*dx cell scale lives
inside the increments or is applied by the caller).
"""

from __future__ import annotations

import math

import numpy as np


def lag_matrix(xs: np.ndarray, t: float) -> np.ndarray:
    """Point kernel values ``p_t(x_i, x_j)`` as an (nx, nx) matrix."""
    d = xs[:, None] - xs[None, :]
    return np.exp(-d * d / (2.0 * t)) / math.sqrt(2.0 * math.pi * t)


def lag_rows(xs_out: np.ndarray, xs: np.ndarray, t: float) -> np.ndarray:
    """Point kernel values ``p_t(x_out_i, x_j)`` as (nout, nx)."""
    d = xs_out[:, None] - xs[None, :]
    return np.exp(-d * d / (2.0 * t)) / math.sqrt(2.0 * math.pi * t)


def step_combined(A: np.ndarray, B: np.ndarray, a: np.ndarray, c: np.ndarray) -> np.ndarray:
    """``A @ a + B @ c`` fused."""
    return A @ a + B @ c


def conv_direct_at(xs: np.ndarray, dt: float, k: int, sig: np.ndarray, dW: np.ndarray) -> np.ndarray:
    """Stochastic convolution field at frame ``k``: sum over m < k of
    ``p_{(k-m)dt}(x_i, y_j) * sig[m, j] * dW[m, j]``."""
    nx = xs.shape[0]
    out = np.zeros(nx)
    if k == 0:
        return out
    E = sig[:k] * dW[:k]
    for l in range(1, k + 1):
        out += lag_matrix(xs, l * dt) @ E[k - l]
    return out


def conv_direct_at_nodes(
    xs: np.ndarray, dt: float, k: int, sel: np.ndarray, sig: np.ndarray, dW: np.ndarray
) -> np.ndarray:
    """Stochastic convolution at frame ``k`` restricted to selected nodes."""
    xs_sel = xs[sel]
    out = np.zeros(xs_sel.shape[0])
    if k == 0:
        return out
    E = sig[:k] * dW[:k]
    for l in range(1, k + 1):
        out += lag_rows(xs_sel, xs, l * dt) @ E[k - l]
    return out


def conv_direct_full(xs: np.ndarray, dt: float, sig: np.ndarray, dW: np.ndarray) -> np.ndarray:
    """Stochastic convolution at every frame 0..nt as an (nt+1, nx) array."""
    nt, nx = sig.shape
    E = sig * dW
    out = np.zeros((nt + 1, nx))
    for l in range(1, nt + 1):
        P = lag_matrix(xs, l * dt)
        out[l:] += E[: nt + 1 - l] @ P
    return out


def conv_direct_series_at(
    xs: np.ndarray, dt: float, sel: np.ndarray, sig: np.ndarray, dW: np.ndarray
) -> np.ndarray:
    """Time series of the stochastic convolution at selected nodes: (nt+1, nsel)."""
    nt, nx = sig.shape
    E = sig * dW
    out = np.zeros((nt + 1, sel.shape[0]))
    xs_sel = xs[sel]
    for l in range(1, nt + 1):
        R = lag_rows(xs_sel, xs, l * dt)
        out[l:] += E[: nt + 1 - l] @ R.T
    return out


def factorized_field(
    xs: np.ndarray, dt: float, k: int, alpha: float, sig: np.ndarray, dW: np.ndarray
) -> np.ndarray:
    """Stochastic convolution at frame ``k`` via the two-stage factorization.

    Stage one builds the singular-weighted stochastic field
    ``Y[s] = sum_{m<s} ((s-m)dt)^(-alpha) P_{(s-m)dt} (sig*dW)[m]``;
    stage two smooths it deterministically with the conjugate fractional
    weight ``(lag)^(alpha-1)``, integrated exactly over each time slice, and
    prefactor ``sin(pi alpha)/pi``.  The zero-lag slice evaluates the kernel
    at midpoint lag ``dt/2``.
    """
    nt, nx = sig.shape
    dx = xs[1] - xs[0]
    E = sig * dW
    Y = np.zeros((k + 1, nx))
    for l in range(1, k + 1):
        P = lag_matrix(xs, l * dt)
        Y[l:] += (l * dt) ** (-alpha) * (E[: k + 1 - l] @ P)
    out = np.zeros(nx)
    for l in range(1, k):
        w = (((l + 1) * dt) ** alpha - (l * dt) ** alpha) / alpha
        out += w * (lag_matrix(xs, l * dt) @ Y[k - l])
    out += dt**alpha / alpha * (lag_matrix(xs, 0.5 * dt) @ Y[k])
    return math.sin(math.pi * alpha) / math.pi * dx * out
