"""Pure-numpy boundary determinant for isotropic P-SV layered half-spaces.

All quantities are dimensionless: wavenumber k = 1, velocities in units of
the substrate shear velocity, densities in units of the substrate density
and stiffnesses in units of rho_sub * vT_sub**2.  Layer thicknesses enter as
``kd = k * d``.

The sagittal-plane state vector is ``(a, w, s, t)`` with ``u_x = i a``,
``u_z = w``, ``sigma_xz = i s`` and ``sigma_zz = t``; with this choice the
system matrix is real, so the characteristic function is real too.
"""

import numpy as np

__all__ = ["characteristic", "find_roots"]


def _system_matrix(rho, c11, c44, c):
    # c: (N,), returns (N, 4, 4)
    lam = c11 - 2.0 * c44
    w2 = c * c
    A = np.zeros(c.shape + (4, 4))
    A[:, 0, 1] = -1.0
    A[:, 0, 2] = 1.0 / c44
    A[:, 1, 0] = lam / c11
    A[:, 1, 3] = 1.0 / c11
    A[:, 2, 0] = -rho * w2 + (c11 - lam * lam / c11)
    A[:, 2, 3] = -lam / c11
    A[:, 3, 1] = -rho * w2
    A[:, 3, 2] = 1.0
    return A


def _even(x, d):
    # cosh(sqrt(x) d), analytic in x
    r = np.sqrt(np.abs(x)) * d
    return np.where(x >= 0.0, np.cosh(r), np.cos(r))


def _odd(x, d):
    # sinh(sqrt(x) d) / sqrt(x), analytic in x
    s = np.sqrt(np.abs(x))
    r = s * d
    safe = np.where(s > 0.0, s, 1.0)
    val = np.where(x >= 0.0, np.sinh(r), np.sin(r)) / safe
    return np.where(s * d < 1e-8, d, val)


def _layer_propagator(rho, c11, c44, kd, c):
    """exp(-A kd): maps the state at the bottom of a layer to its top."""
    A = _system_matrix(rho, c11, c44, c)
    A2 = A @ A
    x1 = 1.0 - c * c * rho / c11  # q_p**2
    x2 = 1.0 - c * c * rho / c44  # q_s**2
    eye = np.eye(4)
    denom = (x1 - x2)[:, None, None]
    P1 = (A2 - x2[:, None, None] * eye) / denom
    P2 = (x1[:, None, None] * eye - A2) / denom
    F = _even(x1, kd)[:, None, None] * P1 + _even(x2, kd)[:, None, None] * P2
    G = _odd(x1, kd)[:, None, None] * P1 + _odd(x2, kd)[:, None, None] * P2
    return F - A @ G


def _substrate_vectors(rho, c11, c44, c):
    mu = c44
    qp = np.sqrt(1.0 - c * c * rho / c11)
    qs = np.sqrt(1.0 - c * c * rho / c44)
    ks2 = c * c * rho / c44
    one = np.ones_like(c)
    vp = np.stack([one, -qp, -2.0 * mu * qp, mu * (2.0 - ks2)], axis=-1)
    vs = np.stack([qs, -one, -mu * (1.0 + qs * qs), 2.0 * mu * qs], axis=-1)
    return vp, vs


def characteristic(rho, c11, c44, kd, sub, c):
    """Normalized traction determinant at the free surface.

    ``rho``, ``c11``, ``c44``, ``kd`` are per-layer arrays (top first),
    ``sub`` is ``(rho, c11, c44)`` of the half-space and ``c`` an array of
    trial phase velocities strictly below the substrate shear velocity.
    """
    c = np.atleast_1d(np.asarray(c, dtype=float))
    v1, v2 = _substrate_vectors(sub[0], sub[1], sub[2], c)
    v1 = v1 / np.linalg.norm(v1, axis=-1, keepdims=True)
    v2 = v2 / np.linalg.norm(v2, axis=-1, keepdims=True)
    for i in range(len(kd) - 1, -1, -1):
        T = _layer_propagator(rho[i], c11[i], c44[i], kd[i], c)
        v1 = np.einsum("nij,nj->ni", T, v1)
        v2 = np.einsum("nij,nj->ni", T, v2)
        v1 = v1 / np.linalg.norm(v1, axis=-1, keepdims=True)
        v2 = v2 / np.linalg.norm(v2, axis=-1, keepdims=True)
    return v1[:, 2] * v2[:, 3] - v2[:, 2] * v1[:, 3]


def find_roots(rho, c11, c44, kd, sub, c_lo, c_hi, n_samples, rtol):
    """Scan ``[c_lo, c_hi]`` and bisect every sign change to ``rtol``."""
    grid = np.linspace(c_lo, c_hi, n_samples)
    vals = characteristic(rho, c11, c44, kd, sub, grid)
    roots = []
    for j in range(n_samples - 1):
        fa, fb = vals[j], vals[j + 1]
        if fa == 0.0:
            roots.append(grid[j])
            continue
        if fa * fb > 0.0 or fb == 0.0:
            continue
        a, b = grid[j], grid[j + 1]
        while b - a > rtol * b:
            m = 0.5 * (a + b)
            fm = characteristic(rho, c11, c44, kd, sub, m)[0]
            if fm == 0.0:
                a = b = m
                break
            if (fm > 0.0) == (fa > 0.0):
                a, fa = m, fm
            else:
                b = m
        roots.append(0.5 * (a + b))
    if vals[-1] == 0.0:
        roots.append(grid[-1])
    return np.array(roots)
