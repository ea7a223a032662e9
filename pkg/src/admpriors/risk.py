"""Asymptotic risk functionals, always relative to the uniform prior.

Two routes compute the same quantity: the decision-function form
R(b) = sum_ij { d_i(V_ij b_j) + (1/2) b_i b_j V_ij } and, for prior-induced
decisions b_i = d_i log p, the divergence form 2 div(V grad sqrt(p))/sqrt(p).
They agree to O(h^2); the square root is taken nodewise before differencing
so the conservative structure of the divergence form is preserved.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grids import (ScalarField, TensorField, VectorField,
                    divergence_form_apply, gradient)

__all__ = [
    "decision_of_prior",
    "risk_of_decision",
    "risk_of_prior",
    "risk_gain_vs_uniform",
    "GainResult",
    "BrownResidualError",
]


class BrownResidualError(RuntimeError):
    def __init__(self, residual, tol):
        super().__init__(
            f"prior does not satisfy the stationarity equation: residual "
            f"{residual:.3e} exceeds {tol:.3e}; the gain formula does not apply")
        self.residual = residual
        self.tol = tol


def _require_positive(p: ScalarField):
    if np.any(p.values <= 0):
        raise ValueError("prior must be strictly positive at every node")


def decision_of_prior(p: ScalarField) -> VectorField:
    """b_i = d_i log p by central differences on log p."""
    _require_positive(p)
    return gradient(p.map(np.log))


def risk_of_decision(b: VectorField, V: TensorField) -> ScalarField:
    """Pointwise risk of a decision field (interior nodes; edges NaN)."""
    g = b.grid
    w = np.einsum("...ij,...j->...i", V.values, b.values)
    div = np.zeros(g.n)
    for i in range(g.d):
        div += np.gradient(w[..., i], g.h[i], axis=i, edge_order=2)
    quad = 0.5 * np.einsum("...i,...i->...", b.values, w)
    out = div + quad
    full = np.full(g.n, np.nan)
    full[g.interior] = out[g.interior]
    return ScalarField(g, full, interior_only=True)


def risk_of_prior(p: ScalarField, V: TensorField) -> ScalarField:
    """2 div(V grad sqrt(p)) / sqrt(p) at interior nodes."""
    _require_positive(p)
    root = p.map(np.sqrt)
    lap = divergence_form_apply(V, root)
    return ScalarField(p.grid, 2.0 * lap.values / root.values,
                       interior_only=True)


@dataclass(frozen=True)
class GainResult:
    """Risk gain against the uniform for a stationary prior.

    gain          -- minus the divergence-form risk (authoritative route)
    gain_gradient -- the gradient-form (1/2)(grad p)' V (grad p) / p
    max_discrepancy -- max |gain - gain_gradient| over interior nodes; the
                       two displayed forms differ by a factor 1/p, so this is
                       reported rather than silently reconciled
    stationarity_residual -- max |div(V grad p)| over interior nodes
    """

    gain: ScalarField
    gain_gradient: ScalarField
    max_discrepancy: float
    stationarity_residual: float


def risk_gain_vs_uniform(p: ScalarField, V: TensorField,
                         brown_tol: float = 0.02) -> GainResult:
    """Gain of a prior solving div(V grad p) = 0 against the uniform.

    Requires the stationarity residual to be below brown_tol (the gain
    formulas presuppose a solution of the equation).
    """
    _require_positive(p)
    g = p.grid
    resid = divergence_form_apply(V, p)
    residual = float(np.max(np.abs(resid.values[g.interior])))
    if residual > brown_tol:
        raise BrownResidualError(residual, brown_tol)
    eq6 = risk_of_prior(p, V)
    gain = ScalarField(g, -eq6.values, interior_only=True)
    gp = gradient(p)
    w = np.einsum("...ij,...j->...i", V.values, gp.values)
    quad = np.einsum("...i,...i->...", gp.values, w)
    grad_vals = np.full(g.n, np.nan)
    grad_vals[g.interior] = (0.5 * quad / p.values)[g.interior]
    gain_grad = ScalarField(g, grad_vals, interior_only=True)
    disc = float(np.max(np.abs(
        gain.values[g.interior] - gain_grad.values[g.interior])))
    return GainResult(gain, gain_grad, disc, residual)
