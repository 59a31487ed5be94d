# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled implementation of the hot kernels.

Mirrors the signatures of ``_kernels_py``; plain sequential loops with a
fixed summation order, so results are independent of thread configuration.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport exp, sqrt, sin, pow, M_PI

cnp.import_array()


cdef void _fill_lag(double[:, ::1] P, const double[::1] xs_out,
                    const double[::1] xs, double t) noexcept nogil:
    cdef Py_ssize_t nout = xs_out.shape[0]
    cdef Py_ssize_t nx = xs.shape[0]
    cdef double norm = 1.0 / sqrt(2.0 * M_PI * t)
    cdef double inv2t = 1.0 / (2.0 * t)
    cdef Py_ssize_t i, j
    cdef double d
    for i in range(nout):
        for j in range(nx):
            d = xs_out[i] - xs[j]
            P[i, j] = norm * exp(-d * d * inv2t)
    return


def lag_matrix(const double[::1] xs, double t):
    out_arr = np.empty((xs.shape[0], xs.shape[0]), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    _fill_lag(out, xs, xs, t)
    return out_arr


def lag_rows(const double[::1] xs_out, const double[::1] xs, double t):
    out_arr = np.empty((xs_out.shape[0], xs.shape[0]), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    _fill_lag(out, xs_out, xs, t)
    return out_arr


def step_combined(const double[:, ::1] A, const double[:, ::1] B,
                  const double[::1] a, const double[::1] c):
    cdef Py_ssize_t nx = A.shape[0]
    out_arr = np.empty(nx, dtype=np.float64)
    cdef double[::1] out = out_arr
    cdef Py_ssize_t i, j
    cdef double acc
    for i in range(nx):
        acc = 0.0
        for j in range(nx):
            acc += A[i, j] * a[j] + B[i, j] * c[j]
        out[i] = acc
    return out_arr


cdef void _accum_rows(double[:, ::1] out, const double[:, ::1] P,
                      const double[:, ::1] E, Py_ssize_t first_out,
                      double scale) noexcept nogil:
    # out[first_out + m] += scale * P @ E[m] for all rows m of E
    cdef Py_ssize_t nout = P.shape[0]
    cdef Py_ssize_t nx = P.shape[1]
    cdef Py_ssize_t nm = E.shape[0]
    cdef Py_ssize_t m, i, j
    cdef double acc
    for m in range(nm):
        for i in range(nout):
            acc = 0.0
            for j in range(nx):
                acc += P[i, j] * E[m, j]
            out[first_out + m, i] += scale * acc
    return


def conv_direct_at(const double[::1] xs, double dt, Py_ssize_t k,
                   const double[:, ::1] sig, const double[:, ::1] dW):
    cdef Py_ssize_t nx = xs.shape[0]
    out_arr = np.zeros((1, nx), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    if k == 0:
        return out_arr[0]
    E_arr = np.multiply(sig, dW)
    cdef double[:, ::1] E = E_arr
    P_arr = np.empty((nx, nx), dtype=np.float64)
    cdef double[:, ::1] P = P_arr
    cdef Py_ssize_t l
    for l in range(1, k + 1):
        _fill_lag(P, xs, xs, l * dt)
        _accum_rows(out, P, E[k - l : k - l + 1], 0, 1.0)
    return out_arr[0]


def conv_direct_at_nodes(const double[::1] xs, double dt, Py_ssize_t k, cnp.ndarray sel,
                         const double[:, ::1] sig, const double[:, ::1] dW):
    sel_arr = np.ascontiguousarray(sel, dtype=np.int64)
    xs_sel = np.ascontiguousarray(np.asarray(xs)[sel_arr])
    cdef double[::1] xs_sel_v = xs_sel
    cdef Py_ssize_t nsel = xs_sel_v.shape[0]
    cdef Py_ssize_t nx = xs.shape[0]
    out_arr = np.zeros((1, nsel), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    if k == 0:
        return out_arr[0]
    E_arr = np.multiply(sig, dW)
    cdef double[:, ::1] E = E_arr
    P_arr = np.empty((nsel, nx), dtype=np.float64)
    cdef double[:, ::1] P = P_arr
    cdef Py_ssize_t l
    for l in range(1, k + 1):
        _fill_lag(P, xs_sel_v, xs, l * dt)
        _accum_rows(out, P, E[k - l : k - l + 1], 0, 1.0)
    return out_arr[0]


def conv_direct_full(const double[::1] xs, double dt,
                     const double[:, ::1] sig, const double[:, ::1] dW):
    cdef Py_ssize_t nt = sig.shape[0]
    cdef Py_ssize_t nx = sig.shape[1]
    E_arr = np.multiply(sig, dW)
    cdef double[:, ::1] E = E_arr
    out_arr = np.zeros((nt + 1, nx), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    P_arr = np.empty((nx, nx), dtype=np.float64)
    cdef double[:, ::1] P = P_arr
    cdef Py_ssize_t l
    for l in range(1, nt + 1):
        _fill_lag(P, xs, xs, l * dt)
        _accum_rows(out, P, E[: nt + 1 - l], l, 1.0)
    return out_arr


def conv_direct_series_at(const double[::1] xs, double dt, cnp.ndarray sel,
                          const double[:, ::1] sig, const double[:, ::1] dW):
    cdef Py_ssize_t nt = sig.shape[0]
    cdef Py_ssize_t nx = sig.shape[1]
    sel_arr = np.ascontiguousarray(sel, dtype=np.int64)
    xs_sel = np.ascontiguousarray(np.asarray(xs)[sel_arr])
    cdef double[::1] xs_sel_v = xs_sel
    cdef Py_ssize_t nsel = xs_sel_v.shape[0]
    E_arr = np.multiply(sig, dW)
    cdef double[:, ::1] E = E_arr
    out_arr = np.zeros((nt + 1, nsel), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    P_arr = np.empty((nsel, nx), dtype=np.float64)
    cdef double[:, ::1] P = P_arr
    cdef Py_ssize_t l
    for l in range(1, nt + 1):
        _fill_lag(P, xs_sel_v, xs, l * dt)
        _accum_rows(out, P, E[: nt + 1 - l], l, 1.0)
    return out_arr


def factorized_field(const double[::1] xs, double dt, Py_ssize_t k, double alpha,
                     const double[:, ::1] sig, const double[:, ::1] dW):
    cdef Py_ssize_t nx = xs.shape[0]
    cdef double dx = xs[1] - xs[0]
    E_arr = np.multiply(sig, dW)
    cdef double[:, ::1] E = E_arr
    Y_arr = np.zeros((k + 1, nx), dtype=np.float64)
    cdef double[:, ::1] Y = Y_arr
    P_arr = np.empty((nx, nx), dtype=np.float64)
    cdef double[:, ::1] P = P_arr
    cdef Py_ssize_t l
    cdef double t, w
    for l in range(1, k + 1):
        t = l * dt
        _fill_lag(P, xs, xs, t)
        _accum_rows(Y, P, E[: k + 1 - l], l, pow(t, -alpha))
    out_arr = np.zeros((1, nx), dtype=np.float64)
    cdef double[:, ::1] out2 = out_arr
    # the fractional factor is integrated exactly over each time slice; the
    # zero-lag slice evaluates the kernel at midpoint lag dt/2
    for l in range(1, k):
        w = (pow((l + 1) * dt, alpha) - pow(l * dt, alpha)) / alpha
        _fill_lag(P, xs, xs, l * dt)
        _accum_rows(out2, P, Y[k - l : k - l + 1], 0, w)
    _fill_lag(P, xs, xs, 0.5 * dt)
    _accum_rows(out2, P, Y[k : k + 1], 0, pow(dt, alpha) / alpha)
    result = out_arr[0]
    result *= sin(M_PI * alpha) / M_PI * dx
    return result
