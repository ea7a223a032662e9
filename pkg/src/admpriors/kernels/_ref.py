"""Pure-NumPy reference implementations of the hot kernels.

Mirrors ``admpriors.kernels._core`` (the Cython build) operation for
operation.  Every update formula is written in the same arithmetic order as
the compiled loop, and the extension is compiled with FP contraction off, so
the two backends produce bit-identical results.
"""
from __future__ import annotations

import numpy as np

__all__ = [
    "div_form_apply_1d",
    "div_form_apply_2d",
    "div_form_apply_3d",
    "corner_term_2d",
    "sor_color_sweep_1d",
    "sor_color_sweep_2d",
    "sde_path_block",
]


def div_form_apply_1d(a, u, h):
    """(d/dx)(a du/dx) with half-node averaged coefficients; edges NaN."""
    out = np.full_like(u, np.nan)
    inv = 1.0 / (2.0 * h * h)
    C = np.s_[1:-1]
    E = np.s_[2:]
    W = np.s_[:-2]
    out[C] = ((a[E] + a[C]) * (u[E] - u[C]) - (a[C] + a[W]) * (u[C] - u[W])) * inv
    return out


def div_form_apply_2d(a11, a12, a22, u, h1, h2):
    """sum_ij d_i(A_ij d_j u) on a 2-d grid; edges NaN.

    Diagonal terms use half-node coefficient means, the mixed term nested
    central differences with node coefficients.
    """
    out = np.full_like(u, np.nan)
    C = np.s_[1:-1, 1:-1]
    E = np.s_[2:, 1:-1]
    W = np.s_[:-2, 1:-1]
    N = np.s_[1:-1, 2:]
    S = np.s_[1:-1, :-2]
    i1 = 1.0 / (2.0 * h1 * h1)
    i2 = 1.0 / (2.0 * h2 * h2)
    t = ((a11[E] + a11[C]) * (u[E] - u[C]) - (a11[C] + a11[W]) * (u[C] - u[W])) * i1
    t = t + ((a22[N] + a22[C]) * (u[N] - u[C]) - (a22[C] + a22[S]) * (u[C] - u[S])) * i2
    t = t + _corner_2d(a12, u, h1, h2)
    out[C] = t
    return out


def _corner_2d(a12, u, h1, h2):
    c1 = 1.0 / (2.0 * h1)
    c2 = 1.0 / (2.0 * h2)
    d2u = np.empty_like(u)
    d2u[:, 1:-1] = (u[:, 2:] - u[:, :-2]) * c2
    d2u[:, 0] = 0.0
    d2u[:, -1] = 0.0
    g = a12 * d2u
    t = (g[2:, 1:-1] - g[:-2, 1:-1]) * c1
    d1u = np.empty_like(u)
    d1u[1:-1, :] = (u[2:, :] - u[:-2, :]) * c1
    d1u[0, :] = 0.0
    d1u[-1, :] = 0.0
    g = a12 * d1u
    t = t + (g[1:-1, 2:] - g[1:-1, :-2]) * c2
    return t


def corner_term_2d(a12, u, h1, h2):
    """Mixed-derivative contribution at interior nodes (snapshot of u)."""
    return _corner_2d(a12, u, h1, h2)


def div_form_apply_3d(a, u, h):
    """Generic 3-d divergence-form apply; a has shape u.shape + (3, 3)."""
    out = np.full_like(u, np.nan)
    C = tuple(slice(1, -1) for _ in range(3))
    t = np.zeros_like(u[C])
    for i in range(3):
        aii = a[..., i, i]
        up = _shift(u, i, +1)
        dn = _shift(u, i, -1)
        ap = _shift(aii, i, +1)
        an = _shift(aii, i, -1)
        inv = 1.0 / (2.0 * h[i] * h[i])
        t += (((ap + aii) * (up - u) - (aii + an) * (u - dn)) * inv)[C]
    for i in range(3):
        for j in range(3):
            if i == j:
                continue
            du = (_shift(u, j, +1) - _shift(u, j, -1)) / (2.0 * h[j])
            _zero_faces(du, j)
            g = a[..., i, j] * du
            t += ((_shift(g, i, +1) - _shift(g, i, -1)) / (2.0 * h[i]))[C]
    out[C] = t
    return out


def _shift(v, axis, by):
    return np.roll(v, -by, axis=axis)


def _zero_faces(v, axis):
    sl = [slice(None)] * v.ndim
    sl[axis] = 0
    v[tuple(sl)] = 0.0
    sl[axis] = -1
    v[tuple(sl)] = 0.0


def sor_color_sweep_1d(u, wE, wW, wC, f, omega, color):
    """One-color SOR update for (d/dx)(a du/dx) = f, Dirichlet ends.

    Weight arrays are interior-shaped; ``color`` selects interior nodes with
    parity ``(index-1) % 2 == color``.
    """
    num = wE * u[2:] + wW * u[:-2] - f
    upd = (1.0 - omega) * u[1:-1] + omega * (num / wC)
    u[1 + color:-1:2] = upd[color::2]


_MASKS: dict = {}


def _color_mask(shape, color):
    key = (shape, color)
    m = _MASKS.get(key)
    if m is None:
        ii, jj = np.meshgrid(np.arange(1, shape[0] - 1),
                             np.arange(1, shape[1] - 1), indexing="ij")
        m = ((ii + jj) % 2) == color
        _MASKS[key] = m
    return m


def sor_color_sweep_2d(u, wE, wW, wN, wS, wC, T, f, omega, color):
    """One-color red-black SOR update with snapshot corner term T.

    Same-color coupling enters only through T, so the update order within a
    color is immaterial and parallel sweeps reproduce serial ones.
    """
    num = (wE * u[2:, 1:-1] + wW * u[:-2, 1:-1]
           + wN * u[1:-1, 2:] + wS * u[1:-1, :-2] + T - f)
    upd = (1.0 - omega) * u[1:-1, 1:-1] + omega * (num / wC)
    mask = _color_mask(u.shape, color)
    sub = u[1:-1, 1:-1]
    sub[mask] = upd[mask]
    u[1:-1, 1:-1] = sub


def sde_path_block(x, t, strat, noise, lo, hi, drift, b, sqrtv,
                   step, substep, sqrt_step, sqrt_substep, margin, max_time):
    """Advance one Euler-Maruyama path through a block of unit normals.

    ``x`` (length d) is updated in place; ``noise`` is consumed front to back,
    d draws per step.  Near a wall (distance < margin) the substep size is
    used.  Returns ``(status, used, t, strat, exit_point)`` with status 0 =
    noise exhausted, 1 = exited (exit_point on the wall), 2 = censored.
    """
    d = x.shape[0]
    n = noise.shape[0]
    used = 0
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
        prop = np.empty(d)
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
