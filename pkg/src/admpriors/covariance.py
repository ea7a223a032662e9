"""Asymptotic covariance providers.

Closed-form families (identity, the correlation-coefficient variance) and
the two-component normal location mixture, whose information matrix is
computed by composite Gauss-Legendre quadrature of the score products.
Also: sampling from the mixture and confidence-ellipse emission.

The mixture on the open quadrant {x1>0, x2>0} is the worked example used by
the relaxation solver; its information degenerates at the walls (one score
vanishes), so covariance evaluation refuses near-wall points instead of
returning an unusable inverse.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .grids import Grid, TensorField
from .quadrature import QuadratureConfig, QuadratureError, gauss_legendre_rule

__all__ = [
    "MixtureParams",
    "NearSingularError",
    "mixture_density",
    "mixture_scores",
    "mixture_information",
    "mixture_covariance",
    "mixture_sample",
    "information_limit_low_x1",
    "information_limit_low_x2",
    "information_limit_radial",
    "covariance_ellipses",
    "CovarianceModel",
    "IdentityModel",
    "ConstantModel",
    "CorrelationModel",
    "MixtureModel",
    "TabulatedModel",
    "CallableModel",
    "identity_v",
    "correlation_v",
    "jeffreys_prior",
]

_SQRT2PI = math.sqrt(2.0 * math.pi)

NEAR_WALL = 1e-2  # below this the information is flagged, not inverted
COND_LIMIT = 1e12


class NearSingularError(RuntimeError):
    def __init__(self, theta, cond):
        super().__init__(
            f"information matrix at theta={tuple(theta)} is numerically "
            f"singular (condition number {cond:.3e})")
        self.theta = tuple(theta)
        self.cond = cond


@dataclass(frozen=True)
class MixtureParams:
    x1: float
    x2: float

    def __post_init__(self):
        if not (self.x1 > 0 and self.x2 > 0):
            raise ValueError("mixture parameters must be strictly positive")

    @property
    def q(self) -> float:
        return self.x1 / (self.x1 + self.x2)


def _phi(z):
    return np.exp(-0.5 * z * z) / _SQRT2PI


def _as_params(theta) -> MixtureParams:
    if isinstance(theta, MixtureParams):
        return theta
    return MixtureParams(*theta)


def mixture_density(y, theta) -> np.ndarray | float:
    """f(y) = {x2 phi(y+x1) + x1 phi(y-x2)} / (x1+x2)."""
    t = _as_params(theta)
    return (t.x2 * _phi(y + t.x1) + t.x1 * _phi(y - t.x2)) / (t.x1 + t.x2)


def mixture_scores(y, theta):
    """Score components (d/dx1 log f, d/dx2 log f)."""
    t = _as_params(theta)
    s = t.x1 + t.x2
    f = mixture_density(y, t)
    pa = _phi(y + t.x1)
    pb = _phi(y - t.x2)
    l1 = -1.0 / s + pb / (s * f) - (y + t.x1) * t.x2 * pa / (s * f)
    l2 = -1.0 / s + pa / (s * f) + (y - t.x2) * t.x1 * pb / (s * f)
    return l1, l2


def _information_once(t: MixtureParams, q: QuadratureConfig, nodes: int) -> np.ndarray:
    y, w = gauss_legendre_rule(-t.x1 - q.half_width, t.x2 + q.half_width, nodes)
    f = mixture_density(y, t)
    l1, l2 = mixture_scores(y, t)
    wf = w * f
    return np.array([[np.sum(wf * l1 * l1), np.sum(wf * l1 * l2)],
                     [np.sum(wf * l1 * l2), np.sum(wf * l2 * l2)]])


def mixture_information(theta, q: QuadratureConfig = QuadratureConfig(),
                        verify: bool = True) -> np.ndarray:
    """Information matrix L_ij = int l_i l_j f dy by composite quadrature.

    With verify=True the rule is recomputed at doubled node count and the
    relative change must be below q.rel_tol, else QuadratureError.
    """
    t = _as_params(theta)
    L = _information_once(t, q, q.nodes)
    if verify:
        L2 = _information_once(t, q, 2 * q.nodes)
        scale = max(np.max(np.abs(L2)), 1e-300)
        achieved = float(np.max(np.abs(L2 - L)) / scale)
        if achieved > q.rel_tol:
            raise QuadratureError(
                f"information quadrature did not converge at theta={tuple(theta)}",
                achieved)
        L = L2
    return L


def information_limit_low_x1(x2: float) -> np.ndarray:
    """Wall limit x1 -> 0: L11 -> (exp(x2^2)-1-x2^2)/x2^2, others 0."""
    v = (math.exp(x2 * x2) - 1.0 - x2 * x2) / (x2 * x2)
    return np.array([[v, 0.0], [0.0, 0.0]])


def information_limit_low_x2(x1: float) -> np.ndarray:
    v = (math.exp(x1 * x1) - 1.0 - x1 * x1) / (x1 * x1)
    return np.array([[0.0, 0.0], [0.0, v]])


def information_limit_radial(s) -> np.ndarray:
    """Far-field limit along direction s (unit vector in the open quadrant):
    L -> diag(s2, s1)/(s1+s2)."""
    s1, s2 = s
    tot = s1 + s2
    return np.array([[s2 / tot, 0.0], [0.0, s1 / tot]])


def _sym2_cond(L: np.ndarray) -> float:
    tr = L[0, 0] + L[1, 1]
    det = L[0, 0] * L[1, 1] - L[0, 1] * L[1, 0]
    disc = max(tr * tr / 4.0 - det, 0.0)
    lo = tr / 2.0 - math.sqrt(disc)
    hi = tr / 2.0 + math.sqrt(disc)
    if lo <= 0:
        return math.inf
    return hi / lo


def mixture_covariance(theta, q: QuadratureConfig = QuadratureConfig(),
                       verify: bool = True) -> np.ndarray:
    """V = L^{-1}.  Raises NearSingularError instead of inverting garbage:
    either a wall coordinate below NEAR_WALL or condition number >= 1e12."""
    t = _as_params(theta)
    L = mixture_information(t, q, verify=verify)
    cond = _sym2_cond(L)
    if min(t.x1, t.x2) < NEAR_WALL or cond >= COND_LIMIT:
        raise NearSingularError((t.x1, t.x2), cond)
    det = L[0, 0] * L[1, 1] - L[0, 1] * L[1, 0]
    return np.array([[L[1, 1], -L[0, 1]], [-L[1, 0], L[0, 0]]]) / det


def mixture_sample(theta, n: int, seed: int, return_components: bool = False):
    """Draw n observations Y = Z + (B ? x2 : -x1), B ~ Bernoulli(q).

    The first component is centred at -x1, matching the density (the
    displayed mixture representation carries the opposite sign; the density
    is authoritative).  Uses one counter-based Philox stream per call, so
    draws are reproducible and index-splittable.
    """
    if n < 1:
        raise ValueError("need at least one draw")
    t = _as_params(theta)
    gen = np.random.Generator(np.random.Philox(np.random.SeedSequence(seed)))
    b = gen.random(n) < t.q
    z = gen.standard_normal(n)
    y = z + np.where(b, t.x2, -t.x1)
    if return_components:
        return y, b
    return y


def chi2_2_quantile(level: float) -> float:
    """Quantile of chi-square with 2 dof (closed form)."""
    if not 0 < level < 1:
        raise ValueError("confidence level must be in (0,1)")
    return -2.0 * math.log1p(-level)


def covariance_ellipses(thetas, n: int, level: float = 0.95,
                        segments: int = 64,
                        q: QuadratureConfig = QuadratureConfig()):
    """Level-set ellipses of N(theta, V(theta)/n) as closed polylines.

    Returns a list of (theta, vertices) with segments+1 vertices, the last
    repeating the first.  NearSingularError propagates.
    """
    psi = np.linspace(0.0, 2.0 * math.pi, segments + 1)
    circle = np.stack([np.cos(psi), np.sin(psi)])
    radius = math.sqrt(chi2_2_quantile(level) / n)
    out = []
    for theta in thetas:
        t = _as_params(theta)
        V = mixture_covariance(t, q)
        Lc = np.linalg.cholesky(V)
        verts = np.array([t.x1, t.x2])[:, None] + radius * (Lc @ circle)
        out.append((t, verts.T))
    return out


# ---------------------------------------------------------------------------
# Covariance model objects


class CovarianceModel:
    """Provider of V(x); subclasses define __call__(x) -> (d,d) matrix."""

    kind = "custom"
    dimension: int

    def __call__(self, x) -> np.ndarray:
        raise NotImplementedError

    def inverse_at(self, x) -> np.ndarray:
        return np.linalg.inv(self(x))

    def is_constant(self) -> bool:
        return False

    def tabulate(self, grid: Grid, threads: int = 1) -> TensorField:
        pts = grid.nodes()
        if threads > 1:
            with ThreadPoolExecutor(max_workers=threads) as ex:
                mats = list(ex.map(self, pts))
        else:
            mats = [self(p) for p in pts]
        vals = np.asarray(mats, dtype=float).reshape(grid.n + (grid.d, grid.d))
        return TensorField(grid, vals)


class ConstantModel(CovarianceModel):
    kind = "constant"

    def __init__(self, matrix):
        m = np.atleast_2d(np.asarray(matrix, dtype=float))
        if m.shape[0] != m.shape[1]:
            raise ValueError("covariance matrix must be square")
        self.matrix = m
        self.dimension = m.shape[0]

    def __call__(self, x):
        return self.matrix

    def inverse_at(self, x):
        return np.linalg.inv(self.matrix)

    def is_constant(self):
        return True

    def tabulate(self, grid, threads: int = 1):
        return TensorField.constant(grid, self.matrix)


class IdentityModel(ConstantModel):
    kind = "identity"

    def __init__(self, d: int):
        super().__init__(np.eye(d))


def identity_v(d: int) -> IdentityModel:
    """V = I on R^d - {0}."""
    return IdentityModel(d)


class CorrelationModel(CovarianceModel):
    """d=1 variance of the sample correlation coefficient on (-1, 1):
    V(rho) = (1 - rho^2)^2, evaluated in the factored form (1-rho)(1+rho)."""

    kind = "correlation"
    dimension = 1

    def __call__(self, x):
        rho = float(np.asarray(x).reshape(-1)[0])
        v = ((1.0 - rho) * (1.0 + rho)) ** 2
        return np.array([[v]])

    def inverse_at(self, x):
        rho = float(np.asarray(x).reshape(-1)[0])
        return np.array([[((1.0 - rho) * (1.0 + rho)) ** -2]])


def correlation_v() -> CorrelationModel:
    return CorrelationModel()


class MixtureModel(CovarianceModel):
    """Mixture covariance V(x) = L(x)^{-1} on the open quadrant.

    ``information_at`` is pure quadrature (optionally switching to the
    radial limit in the far field, where the quadrature window can no longer
    resolve the two bumps).  Covariance evaluation refuses coordinates below
    NEAR_WALL; grid tabulation records flagged near-wall nodes (x_i < 0.2).
    """

    kind = "mixture"
    dimension = 2
    FLAG_BELOW = 0.2

    def __init__(self, q: QuadratureConfig = QuadratureConfig(),
                 far_field_radius: float = 200.0, verify: bool = True):
        self.q = q
        self.far_field_radius = far_field_radius
        self.verify = verify
        self.flagged_nodes: list[tuple[float, float]] = []

    def information_at(self, x) -> np.ndarray:
        x1, x2 = float(x[0]), float(x[1])
        r = math.hypot(x1, x2)
        if r >= self.far_field_radius:
            return information_limit_radial((x1 / r, x2 / r))
        return mixture_information((x1, x2), self.q, verify=self.verify)

    def __call__(self, x):
        x1, x2 = float(x[0]), float(x[1])
        return mixture_covariance((x1, x2), self.q)

    def inverse_at(self, x):
        return self.information_at(x)

    def tabulate(self, grid: Grid, threads: int = 1) -> TensorField:
        pts = grid.nodes()
        self.flagged_nodes = [tuple(p) for p in pts if min(p) < self.FLAG_BELOW]

        def one(p):
            return mixture_covariance((p[0], p[1]), self.q, verify=self.verify)

        if threads > 1:
            with ThreadPoolExecutor(max_workers=threads) as ex:
                mats = list(ex.map(one, pts))
        else:
            mats = [one(p) for p in pts]
        vals = np.asarray(mats).reshape(grid.n + (2, 2))
        return TensorField(grid, vals)


class TabulatedModel(CovarianceModel):
    kind = "tabulated"

    def __init__(self, field: TensorField):
        self.field = field
        self.dimension = field.grid.d

    def __call__(self, x):
        g = self.field.grid
        idx = tuple(
            int(round((xi - lo) / hi_h))
            for xi, lo, hi_h in zip(np.atleast_1d(x), g.spec.lower, g.h))
        idx = tuple(min(max(k, 0), m - 1) for k, m in zip(idx, g.n))
        return self.field.values[idx]

    def tabulate(self, grid, threads: int = 1):
        if grid == self.field.grid:
            return self.field
        return super().tabulate(grid, threads)


class CallableModel(CovarianceModel):
    kind = "custom"

    def __init__(self, fn, d: int, inverse_fn=None):
        self.fn = fn
        self.dimension = d
        self.inverse_fn = inverse_fn

    def __call__(self, x):
        return np.atleast_2d(np.asarray(self.fn(x), dtype=float))

    def inverse_at(self, x):
        if self.inverse_fn is not None:
            return np.atleast_2d(np.asarray(self.inverse_fn(x), dtype=float))
        return np.linalg.inv(self(x))


def jeffreys_prior(model: CovarianceModel):
    """Jeffreys density J = V^{-1/2} (provided for d=1 only)."""
    if model.dimension != 1:
        raise ValueError("Jeffreys prior is provided for one dimension only")

    def p(x):
        return float(model(x)[0, 0]) ** -0.5

    return p
