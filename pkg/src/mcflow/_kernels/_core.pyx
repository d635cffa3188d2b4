# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled versions of the hot kernels; see _fallback.py for the
reference semantics."""

import numpy as np

cimport numpy as cnp
from libc.math cimport fabs, isfinite, pow, sqrt

cnp.import_array()


cdef inline double _g(int kind, double param, double w) noexcept nogil:
    if kind == 0:
        return pow(w, -param)
    return 1.0 / w + param


cdef inline double _g_prime(int kind, double param, double w) noexcept nogil:
    if kind == 0:
        return -param * pow(w, -param - 1.0)
    return -1.0 / (w * w)


def residual_full(cnp.int64_t[:, ::1] tris, double[:, :, ::1] grad_hat,
                  double[::1] areas, double[::1] values, int kind,
                  double param):
    cdef Py_ssize_t m = tris.shape[0]
    cdef Py_ssize_t n = values.shape[0]
    out_arr = np.zeros(n)
    cdef double[::1] out = out_arr
    cdef Py_ssize_t f, k
    cdef double gx, gy, w, g, area, flux
    with nogil:
        for f in range(m):
            gx = 0.0
            gy = 0.0
            for k in range(3):
                gx += values[tris[f, k]] * grad_hat[f, k, 0]
                gy += values[tris[f, k]] * grad_hat[f, k, 1]
            w = sqrt(1.0 + gx * gx + gy * gy)
            g = _g(kind, param, w)
            area = areas[f]
            for k in range(3):
                flux = (gx * grad_hat[f, k, 0] + gy * grad_hat[f, k, 1]) / w
                out[tris[f, k]] += area * flux + area * g / 3.0
    return out_arr


def jacobian_blocks(cnp.int64_t[:, ::1] tris, double[:, :, ::1] grad_hat,
                    double[::1] areas, double[::1] values, int kind,
                    double param):
    cdef Py_ssize_t m = tris.shape[0]
    blocks_arr = np.empty((m, 3, 3))
    cdef double[:, :, ::1] blocks = blocks_arr
    cdef Py_ssize_t f, k, l
    cdef double gx, gy, w, w3, gp, area, dot, stiff
    cdef double a[3]
    with nogil:
        for f in range(m):
            gx = 0.0
            gy = 0.0
            for k in range(3):
                gx += values[tris[f, k]] * grad_hat[f, k, 0]
                gy += values[tris[f, k]] * grad_hat[f, k, 1]
            w = sqrt(1.0 + gx * gx + gy * gy)
            w3 = w * w * w
            gp = _g_prime(kind, param, w)
            area = areas[f]
            for k in range(3):
                a[k] = gx * grad_hat[f, k, 0] + gy * grad_hat[f, k, 1]
            for k in range(3):
                for l in range(3):
                    dot = (grad_hat[f, k, 0] * grad_hat[f, l, 0]
                           + grad_hat[f, k, 1] * grad_hat[f, l, 1])
                    stiff = dot / w - a[k] * a[l] / w3
                    blocks[f, k, l] = area * (stiff + gp / w * a[l] / 3.0)
    return blocks_arr


cdef inline double _slope_rhs(int kind, double param, double r,
                              double p) noexcept nogil:
    cdef double w2 = 1.0 + p * p
    if kind == 0:
        return pow(w2, 0.5 * (3.0 - param)) - p * w2 / r
    return w2 + param * pow(w2, 1.5) - p * w2 / r


def rk4_slope(int kind, double param, double r0, double r_end, Py_ssize_t n,
              double p0, double cap):
    out_arr = np.empty(n + 1)
    cdef double[::1] out = out_arr
    cdef double h = (r_end - r0) / n
    cdef double r = r0, p = p0
    cdef double k1, k2, k3, k4
    cdef Py_ssize_t i, blown = -1
    out[0] = p0
    with nogil:
        for i in range(1, n + 1):
            k1 = _slope_rhs(kind, param, r, p)
            k2 = _slope_rhs(kind, param, r + 0.5 * h, p + 0.5 * h * k1)
            k3 = _slope_rhs(kind, param, r + 0.5 * h, p + 0.5 * h * k2)
            k4 = _slope_rhs(kind, param, r + h, p + h * k3)
            p = p + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
            r = r0 + i * h
            out[i] = p
            if not isfinite(p) or fabs(p) > cap:
                blown = i
                break
    if blown >= 0:
        return out_arr, blown
    return out_arr, -1
