"""Pure numpy reference implementations of the hot kernels.

kind 0: right-hand side g(w) = w**(-param)
kind 1: right-hand side g(w) = 1/w + param
with w = sqrt(1 + |grad u|^2) constant on each P1 triangle.
"""

import numpy as np


def _g(kind, param, w):
    if kind == 0:
        return w ** -param
    return 1.0 / w + param


def _g_prime(kind, param, w):
    if kind == 0:
        return -param * w ** (-param - 1.0)
    return -1.0 / (w * w)


def _triangle_state(tris, grad_hat, values):
    u_tri = values[tris]                                   # (m,3)
    grad_u = np.einsum("fk,fkd->fd", u_tri, grad_hat)      # (m,2)
    w = np.sqrt(1.0 + grad_u[:, 0] ** 2 + grad_u[:, 1] ** 2)
    return grad_u, w


def residual_full(tris, grad_hat, areas, values, kind, param):
    """Galerkin residual accumulated at every vertex (boundary included).

    Per triangle: area * (grad u . grad phi_k) / w for the flux part and
    area/3 * g(w) for the vertex-lumped forcing part.
    """
    grad_u, w = _triangle_state(tris, grad_hat, values)
    flux = np.einsum("fd,fkd->fk", grad_u, grad_hat) / w[:, None]
    contrib = areas[:, None] * flux + (areas * _g(kind, param, w) / 3.0)[:, None]
    out = np.zeros(len(values))
    np.add.at(out, tris, contrib)
    return out


def jacobian_blocks(tris, grad_hat, areas, values, kind, param):
    """Exact derivative of the residual as per-triangle 3x3 blocks.

    block[f, k, l] = d residual_k / d value_l on triangle f:
        area * [ (grad phi_l . grad phi_k)/w
                 - (grad u . grad phi_k)(grad u . grad phi_l)/w^3 ]
      + area/3 * g'(w) * (grad u . grad phi_l)/w
    """
    grad_u, w = _triangle_state(tris, grad_hat, values)
    dots = np.einsum("fkd,fld->fkl", grad_hat, grad_hat)
    a = np.einsum("fd,fkd->fk", grad_u, grad_hat)          # (m,3)
    stiff = dots / w[:, None, None] \
        - a[:, :, None] * a[:, None, :] / (w ** 3)[:, None, None]
    forcing = (_g_prime(kind, param, w) / w)[:, None, None] \
        * a[:, None, :] / 3.0
    return areas[:, None, None] * (stiff + forcing)


def rk4_slope(kind, param, r0, r_end, n, p0, cap):
    """Classic fixed-step RK4 for the radial slope equation

        p'(r) = g-term(r, p) - p (1 + p^2) / r

    from r0 to r_end in n steps. Returns (p values at the n+1 grid
    points, index of the first blow-up step or -1)."""
    def f(r, p):
        w2 = 1.0 + p * p
        if kind == 0:
            return w2 ** (0.5 * (3.0 - param)) - p * w2 / r
        return w2 + param * w2 ** 1.5 - p * w2 / r

    h = (r_end - r0) / n
    out = np.empty(n + 1)
    out[0] = p0
    r, p = r0, p0
    for i in range(1, n + 1):
        try:
            k1 = f(r, p)
            k2 = f(r + 0.5 * h, p + 0.5 * h * k1)
            k3 = f(r + 0.5 * h, p + 0.5 * h * k2)
            k4 = f(r + h, p + h * k3)
            p = p + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        except OverflowError:
            # python floats raise instead of producing inf
            out[i] = np.inf
            return out, i
        r = r0 + i * h
        out[i] = p
        if not np.isfinite(p) or abs(p) > cap:
            return out, i
    return out, -1
