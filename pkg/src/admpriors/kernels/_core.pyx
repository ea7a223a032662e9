# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled kernels: divergence-form stencils, red-black SOR sweeps and
Euler-Maruyama path stepping.

Arithmetic order matches admpriors.kernels._ref exactly (and the extension
is built with FP contraction disabled), so results are bit-identical to the
NumPy fallback.
"""
import numpy as np

cimport numpy as cnp

cnp.import_array()


def div_form_apply_1d(double[::1] a, double[::1] u, double h):
    cdef Py_ssize_t n = u.shape[0]
    out = np.full(n, np.nan)
    cdef double[::1] o = out
    cdef double inv = 1.0 / (2.0 * h * h)
    cdef Py_ssize_t k
    for k in range(1, n - 1):
        o[k] = ((a[k + 1] + a[k]) * (u[k + 1] - u[k])
                - (a[k] + a[k - 1]) * (u[k] - u[k - 1])) * inv
    return out


def div_form_apply_2d(double[:, ::1] a11, double[:, ::1] a12,
                      double[:, ::1] a22, double[:, ::1] u,
                      double h1, double h2):
    cdef Py_ssize_t n1 = u.shape[0], n2 = u.shape[1]
    out = np.full((n1, n2), np.nan)
    cdef double[:, ::1] o = out
    cdef double i1 = 1.0 / (2.0 * h1 * h1)
    cdef double i2 = 1.0 / (2.0 * h2 * h2)
    cdef double c1 = 1.0 / (2.0 * h1)
    cdef double c2 = 1.0 / (2.0 * h2)
    cdef Py_ssize_t i, j
    cdef double t, gE, gW, gN, gS
    for i in range(1, n1 - 1):
        for j in range(1, n2 - 1):
            t = ((a11[i + 1, j] + a11[i, j]) * (u[i + 1, j] - u[i, j])
                 - (a11[i, j] + a11[i - 1, j]) * (u[i, j] - u[i - 1, j])) * i1
            t = t + ((a22[i, j + 1] + a22[i, j]) * (u[i, j + 1] - u[i, j])
                     - (a22[i, j] + a22[i, j - 1]) * (u[i, j] - u[i, j - 1])) * i2
            gE = a12[i + 1, j] * ((u[i + 1, j + 1] - u[i + 1, j - 1]) * c2)
            gW = a12[i - 1, j] * ((u[i - 1, j + 1] - u[i - 1, j - 1]) * c2)
            t = t + (gE - gW) * c1
            gN = a12[i, j + 1] * ((u[i + 1, j + 1] - u[i - 1, j + 1]) * c1)
            gS = a12[i, j - 1] * ((u[i + 1, j - 1] - u[i - 1, j - 1]) * c1)
            t = t + (gN - gS) * c2
            o[i, j] = t
    return out


def corner_term_2d(double[:, ::1] a12, double[:, ::1] u, double h1, double h2):
    """Mixed-derivative contribution at interior nodes (snapshot of u)."""
    cdef Py_ssize_t n1 = u.shape[0], n2 = u.shape[1]
    out = np.empty((n1 - 2, n2 - 2))
    cdef double[:, ::1] o = out
    cdef double c1 = 1.0 / (2.0 * h1)
    cdef double c2 = 1.0 / (2.0 * h2)
    cdef Py_ssize_t i, j
    cdef double gE, gW, gN, gS, t
    for i in range(1, n1 - 1):
        for j in range(1, n2 - 1):
            gE = a12[i + 1, j] * ((u[i + 1, j + 1] - u[i + 1, j - 1]) * c2)
            gW = a12[i - 1, j] * ((u[i - 1, j + 1] - u[i - 1, j - 1]) * c2)
            t = (gE - gW) * c1
            gN = a12[i, j + 1] * ((u[i + 1, j + 1] - u[i - 1, j + 1]) * c1)
            gS = a12[i, j - 1] * ((u[i + 1, j - 1] - u[i - 1, j - 1]) * c1)
            t = t + (gN - gS) * c2
            o[i - 1, j - 1] = t
    return out


def sor_color_sweep_1d(double[::1] u, double[::1] wE, double[::1] wW,
                       double[::1] wC, double[::1] f, double omega, int color):
    cdef Py_ssize_t n = u.shape[0]
    cdef Py_ssize_t k
    cdef double num
    for k in range(1 + color, n - 1, 2):
        num = wE[k - 1] * u[k + 1] + wW[k - 1] * u[k - 1] - f[k - 1]
        u[k] = (1.0 - omega) * u[k] + omega * (num / wC[k - 1])


def sor_color_sweep_2d(double[:, ::1] u, double[:, ::1] wE, double[:, ::1] wW,
                       double[:, ::1] wN, double[:, ::1] wS, double[:, ::1] wC,
                       double[:, ::1] T, double[:, ::1] f,
                       double omega, int color):
    cdef Py_ssize_t n1 = u.shape[0], n2 = u.shape[1]
    cdef Py_ssize_t i, j, j0
    cdef double num
    for i in range(1, n1 - 1):
        j0 = 1 + ((i + 1 + color) % 2)
        for j in range(j0, n2 - 1, 2):
            num = (wE[i - 1, j - 1] * u[i + 1, j] + wW[i - 1, j - 1] * u[i - 1, j]
                   + wN[i - 1, j - 1] * u[i, j + 1] + wS[i - 1, j - 1] * u[i, j - 1]
                   + T[i - 1, j - 1] - f[i - 1, j - 1])
            u[i, j] = (1.0 - omega) * u[i, j] + omega * (num / wC[i - 1, j - 1])


def sde_path_block(double[::1] x, double t, double strat, double[::1] noise,
                   double[::1] lo, double[::1] hi, double[::1] drift,
                   double[::1] b, double[:, ::1] sqrtv,
                   double step, double substep, double sqrt_step,
                   double sqrt_substep, double margin, double max_time):
    """Advance one path through a block of unit normals; see _ref for the
    contract. x is updated in place; d draws are consumed per step."""
    cdef Py_ssize_t d = x.shape[0]
    cdef Py_ssize_t n = noise.shape[0]
    cdef Py_ssize_t used = 0
    cdef Py_ssize_t i, j
    cdef double dt, sq, s, lam, li, acc
    cdef double prop[3]
    cdef bint near, outside
    while used + d <= n:
        if t >= max_time:
            return 2, used, t, strat, None
        near = False
        for i in range(d):
            if x[i] - lo[i] < margin or hi[i] - x[i] < margin:
                near = True
                break
        if near:
            dt = substep
            sq = sqrt_substep
        else:
            dt = step
            sq = sqrt_step
        outside = False
        for i in range(d):
            s = 0.0
            for j in range(d):
                s = s + sqrtv[i, j] * noise[used + j]
            prop[i] = x[i] + sq * s + drift[i] * dt
            if prop[i] <= lo[i] or prop[i] >= hi[i]:
                outside = True
        used += d
        t = t + dt
        if outside:
            lam = 1.0
            for i in range(d):
                if prop[i] <= lo[i]:
                    li = (lo[i] - x[i]) / (prop[i] - x[i])
                elif prop[i] >= hi[i]:
                    li = (hi[i] - x[i]) / (prop[i] - x[i])
                else:
                    continue
                if li < lam:
                    lam = li
            exit_pt = np.empty(d)
            for i in range(d):
                exit_pt[i] = x[i] + lam * (prop[i] - x[i])
                if exit_pt[i] < lo[i]:
                    exit_pt[i] = lo[i]
                elif exit_pt[i] > hi[i]:
                    exit_pt[i] = hi[i]
            acc = 0.0
            for i in range(d):
                acc = acc + b[i] * (exit_pt[i] - x[i])
            strat = strat + acc
            return 1, used, t, strat, exit_pt
        acc = 0.0
        for i in range(d):
            acc = acc + b[i] * (prop[i] - x[i])
            x[i] = prop[i]
        strat = strat + acc
    return 0, used, t, strat, None
