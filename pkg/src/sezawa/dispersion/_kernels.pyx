# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled boundary determinant; same contract as ``_kernels_py``."""

import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt, cosh, sinh, cos, sin, fabs

cnp.import_array()


cdef inline double _even(double x, double d) noexcept nogil:
    cdef double r = sqrt(fabs(x)) * d
    if x >= 0.0:
        return cosh(r)
    return cos(r)


cdef inline double _odd(double x, double d) noexcept nogil:
    cdef double s = sqrt(fabs(x))
    if s * d < 1e-8:
        return d
    if x >= 0.0:
        return sinh(s * d) / s
    return sin(s * d) / s


cdef inline void _normalize(double* v) noexcept nogil:
    cdef double n = sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2] + v[3] * v[3])
    v[0] /= n
    v[1] /= n
    v[2] /= n
    v[3] /= n


cdef void _propagate(double rho, double c11, double c44, double kd, double c,
                     double* v1, double* v2) noexcept nogil:
    cdef double A[4][4]
    cdef double A2[4][4]
    cdef double G[4][4]
    cdef double T[4][4]
    cdef double lam = c11 - 2.0 * c44
    cdef double w2 = c * c
    cdef double x1 = 1.0 - w2 * rho / c11
    cdef double x2 = 1.0 - w2 * rho / c44
    cdef double den = x1 - x2
    cdef double f1 = _even(x1, kd), f2 = _even(x2, kd)
    cdef double g1 = _odd(x1, kd), g2 = _odd(x2, kd)
    cdef double p1, p2, acc, t1[4], t2[4]
    cdef int i, j, k

    for i in range(4):
        for j in range(4):
            A[i][j] = 0.0
    A[0][1] = -1.0
    A[0][2] = 1.0 / c44
    A[1][0] = lam / c11
    A[1][3] = 1.0 / c11
    A[2][0] = -rho * w2 + (c11 - lam * lam / c11)
    A[2][3] = -lam / c11
    A[3][1] = -rho * w2
    A[3][2] = 1.0

    for i in range(4):
        for j in range(4):
            acc = 0.0
            for k in range(4):
                acc = acc + A[i][k] * A[k][j]
            A2[i][j] = acc

    # F = f1 P1 + f2 P2, G = g1 P1 + g2 P2 with spectral projectors of A^2
    for i in range(4):
        for j in range(4):
            p1 = A2[i][j]
            p2 = -A2[i][j]
            if i == j:
                p1 = p1 - x2
                p2 = p2 + x1
            p1 = p1 / den
            p2 = p2 / den
            T[i][j] = f1 * p1 + f2 * p2
            G[i][j] = g1 * p1 + g2 * p2

    # T = F - A G
    for i in range(4):
        for j in range(4):
            acc = 0.0
            for k in range(4):
                acc = acc + A[i][k] * G[k][j]
            T[i][j] = T[i][j] - acc

    for i in range(4):
        t1[i] = T[i][0] * v1[0] + T[i][1] * v1[1] + T[i][2] * v1[2] + T[i][3] * v1[3]
        t2[i] = T[i][0] * v2[0] + T[i][1] * v2[1] + T[i][2] * v2[2] + T[i][3] * v2[3]
    for i in range(4):
        v1[i] = t1[i]
        v2[i] = t2[i]
    _normalize(v1)
    _normalize(v2)


cdef double _det(Py_ssize_t n, const double* rho, const double* c11, const double* c44,
                 const double* kd, double srho, double sc11, double sc44,
                 double c) noexcept nogil:
    cdef double v1[4]
    cdef double v2[4]
    cdef double mu = sc44
    cdef double qp = sqrt(1.0 - c * c * srho / sc11)
    cdef double qs = sqrt(1.0 - c * c * srho / sc44)
    cdef double ks2 = c * c * srho / sc44
    cdef Py_ssize_t i
    v1[0] = 1.0
    v1[1] = -qp
    v1[2] = -2.0 * mu * qp
    v1[3] = mu * (2.0 - ks2)
    v2[0] = qs
    v2[1] = -1.0
    v2[2] = -mu * (1.0 + qs * qs)
    v2[3] = 2.0 * mu * qs
    _normalize(v1)
    _normalize(v2)
    i = n - 1
    while i >= 0:
        _propagate(rho[i], c11[i], c44[i], kd[i], c, v1, v2)
        i -= 1
    return v1[2] * v2[3] - v2[2] * v1[3]


def _as_c(x):
    return np.ascontiguousarray(x, dtype=np.float64)


def characteristic(rho, c11, c44, kd, sub, c):
    cdef double[::1] r = _as_c(rho)
    cdef double[::1] a = _as_c(c11)
    cdef double[::1] b = _as_c(c44)
    cdef double[::1] d = _as_c(kd)
    cdef double[::1] cc = _as_c(np.atleast_1d(c))
    cdef Py_ssize_t n = r.shape[0], m = cc.shape[0], j
    cdef double srho = sub[0], sc11 = sub[1], sc44 = sub[2]
    out = np.empty(m)
    cdef double[::1] o = out
    cdef const double* pr = &r[0] if n else NULL
    cdef const double* pa = &a[0] if n else NULL
    cdef const double* pb = &b[0] if n else NULL
    cdef const double* pd = &d[0] if n else NULL
    with nogil:
        for j in range(m):
            o[j] = _det(n, pr, pa, pb, pd, srho, sc11, sc44, cc[j])
    return out


def find_roots(rho, c11, c44, kd, sub, double c_lo, double c_hi, Py_ssize_t n_samples, double rtol):
    cdef double[::1] r = _as_c(rho)
    cdef double[::1] a = _as_c(c11)
    cdef double[::1] b = _as_c(c44)
    cdef double[::1] d = _as_c(kd)
    grid_arr = np.linspace(c_lo, c_hi, n_samples)
    cdef double[::1] grid = grid_arr
    cdef Py_ssize_t n = r.shape[0], j
    cdef double srho = sub[0], sc11 = sub[1], sc44 = sub[2]
    cdef const double* pr = &r[0] if n else NULL
    cdef const double* pa = &a[0] if n else NULL
    cdef const double* pb = &b[0] if n else NULL
    cdef const double* pd = &d[0] if n else NULL
    vals_arr = np.empty(n_samples)
    cdef double[::1] vals = vals_arr
    roots_arr = np.empty(n_samples)
    cdef double[::1] roots = roots_arr
    cdef Py_ssize_t nroots = 0
    cdef double fa, fb, fm, lo, hi, mid
    with nogil:
        for j in range(n_samples):
            vals[j] = _det(n, pr, pa, pb, pd, srho, sc11, sc44, grid[j])
        for j in range(n_samples - 1):
            fa = vals[j]
            fb = vals[j + 1]
            if fa == 0.0:
                roots[nroots] = grid[j]
                nroots += 1
                continue
            if fa * fb > 0.0 or fb == 0.0:
                continue
            lo = grid[j]
            hi = grid[j + 1]
            while hi - lo > rtol * hi:
                mid = 0.5 * (lo + hi)
                fm = _det(n, pr, pa, pb, pd, srho, sc11, sc44, mid)
                if fm == 0.0:
                    lo = mid
                    hi = mid
                    break
                if (fm > 0.0) == (fa > 0.0):
                    lo = mid
                    fa = fm
                else:
                    hi = mid
            roots[nroots] = 0.5 * (lo + hi)
            nroots += 1
        if vals[n_samples - 1] == 0.0:
            roots[nroots] = grid[n_samples - 1]
            nroots += 1
    return roots_arr[:nroots].copy()
