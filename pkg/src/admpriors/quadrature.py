"""Composite Gauss-Legendre quadrature shared by the covariance and
admissibility machinery.  Panels are uniform; adaptivity is by whole-rule
node doubling so results are deterministic."""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

__all__ = ["QuadratureConfig", "QuadratureError", "gauss_legendre_rule", "integrate"]


class QuadratureError(RuntimeError):
    def __init__(self, message: str, achieved: float):
        super().__init__(f"{message} (achieved relative tolerance {achieved:.3e})")
        self.achieved = achieved


@dataclass(frozen=True)
class QuadratureConfig:
    """Integration window extends half_width beyond the component means."""

    half_width: float = 10.0
    nodes: int = 2000
    rel_tol: float = 1e-8

    def __post_init__(self):
        if self.half_width < 6:
            raise ValueError("half_width must be at least 6")
        if self.nodes < 100:
            raise ValueError("need at least 100 quadrature nodes")


@lru_cache(maxsize=64)
def _leggauss(n: int):
    return np.polynomial.legendre.leggauss(n)


def gauss_legendre_rule(a: float, b: float, n_total: int, panel_size: int = 10):
    """Nodes and weights of a composite rule with ceil(n_total/panel_size)
    equal panels of panel_size-point Gauss-Legendre each."""
    if not b > a:
        raise ValueError(f"empty interval [{a}, {b}]")
    m = max(1, math.ceil(n_total / panel_size))
    xg, wg = _leggauss(panel_size)
    edges = np.linspace(a, b, m + 1)
    mid = 0.5 * (edges[:-1] + edges[1:])
    half = 0.5 * (edges[1:] - edges[:-1])
    nodes = (mid[:, None] + half[:, None] * xg[None, :]).ravel()
    weights = (half[:, None] * wg[None, :]).ravel()
    return nodes, weights


def integrate(f, a: float, b: float, n: int = 200, panel_size: int = 10) -> float:
    x, w = gauss_legendre_rule(a, b, n, panel_size)
    return float(np.sum(w * f(x)))
