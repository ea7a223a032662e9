"""Rectangular grids over open domains, scalar/vector/tensor fields on them,
and conservative finite-difference operators.

Fields are immutable after construction (arrays are set non-writeable) and
the operators are pure functions, so everything here is safe to evaluate
concurrently.  Node storage is row-major with axis 0 slowest; CSV emission
follows that order.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from . import kernels

__all__ = [
    "FaceKind",
    "DomainSpec",
    "Grid",
    "ScalarField",
    "VectorField",
    "TensorField",
    "GridError",
    "SingularTensorError",
    "build_grid",
    "gradient",
    "divergence_form_apply",
    "write_field_csv",
    "read_scalar_field_csv",
]


class GridError(ValueError):
    pass


class SingularTensorError(ValueError):
    pass


class FaceKind(enum.Enum):
    """Wall: a genuine finite boundary of the domain.  Asymptotic: the true
    boundary sits at 0 or infinity and the grid edge is a truncation."""

    WALL = "Wall"
    ASYMPTOTIC = "Asymptotic"


@dataclass(frozen=True)
class DomainSpec:
    lower: tuple[float, ...]
    upper: tuple[float, ...]
    face_kinds: tuple[tuple[FaceKind, FaceKind], ...] = ()
    excluded_origin: bool = False

    def __post_init__(self):
        lower = tuple(float(v) for v in self.lower)
        upper = tuple(float(v) for v in self.upper)
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)
        if len(lower) != len(upper):
            raise GridError("lower/upper dimension mismatch")
        if not 1 <= len(lower) <= 3:
            raise GridError("only dimensions 1..3 are supported")
        for lo, hi in zip(lower, upper):
            if not (np.isfinite(lo) and np.isfinite(hi) and lo < hi):
                raise GridError(f"non-positive extent: [{lo}, {hi}]")
        if not self.face_kinds:
            object.__setattr__(
                self, "face_kinds",
                tuple((FaceKind.WALL, FaceKind.WALL) for _ in lower))
        elif len(self.face_kinds) != len(lower):
            raise GridError("face_kinds must give (low, high) per axis")

    @property
    def d(self) -> int:
        return len(self.lower)

    def wall_faces(self):
        """Yield (axis, side, coordinate) for each Wall face; side is 0/1."""
        for axis, (lo_kind, hi_kind) in enumerate(self.face_kinds):
            if lo_kind is FaceKind.WALL:
                yield axis, 0, self.lower[axis]
            if hi_kind is FaceKind.WALL:
                yield axis, 1, self.upper[axis]


@dataclass(frozen=True)
class Grid:
    spec: DomainSpec
    n: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "n", tuple(int(v) for v in self.n))
        if len(self.n) != self.spec.d:
            raise GridError("node counts must match domain dimension")
        if any(v < 3 for v in self.n):
            raise GridError("need at least 3 nodes per axis")

    @property
    def d(self) -> int:
        return self.spec.d

    @property
    def h(self) -> tuple[float, ...]:
        return tuple((hi - lo) / (m - 1) for lo, hi, m in
                     zip(self.spec.lower, self.spec.upper, self.n))

    def axis(self, i: int) -> np.ndarray:
        return np.linspace(self.spec.lower[i], self.spec.upper[i], self.n[i])

    def axes(self) -> list[np.ndarray]:
        return [self.axis(i) for i in range(self.d)]

    def meshgrid(self) -> list[np.ndarray]:
        return list(np.meshgrid(*self.axes(), indexing="ij"))

    def nodes(self) -> np.ndarray:
        """All node coordinates, shape (prod(n), d), axis 0 slowest."""
        mesh = self.meshgrid()
        return np.stack([m.ravel() for m in mesh], axis=-1)

    @property
    def interior(self) -> tuple[slice, ...]:
        return tuple(slice(1, -1) for _ in range(self.d))

    def interior_mask(self) -> np.ndarray:
        m = np.zeros(self.n, dtype=bool)
        m[self.interior] = True
        return m


def build_grid(spec: DomainSpec, n: Sequence[int]) -> Grid:
    return Grid(spec, tuple(n))


def _freeze(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a, dtype=float)
    a.flags.writeable = False
    return a


@dataclass(frozen=True)
class ScalarField:
    """Scalar values per node.  Operator outputs are interior-only and carry
    NaN on the edge ring; constructed fields must be finite everywhere."""

    grid: Grid
    values: np.ndarray
    interior_only: bool = field(default=False, compare=False)

    def __post_init__(self):
        v = _freeze(self.values)
        object.__setattr__(self, "values", v)
        if v.shape != self.grid.n:
            raise GridError(f"values shape {v.shape} != grid {self.grid.n}")
        region = self.grid.interior if self.interior_only else tuple(
            slice(None) for _ in range(self.grid.d))
        if not np.all(np.isfinite(v[region])):
            raise GridError("non-finite field values")

    @classmethod
    def from_function(cls, grid: Grid, fn: Callable) -> "ScalarField":
        mesh = grid.meshgrid()
        return cls(grid, np.asarray(fn(*mesh), dtype=float))

    @classmethod
    def constant(cls, grid: Grid, c: float) -> "ScalarField":
        return cls(grid, np.full(grid.n, float(c)))

    def interior_values(self) -> np.ndarray:
        return self.values[self.grid.interior]

    def map(self, fn: Callable) -> "ScalarField":
        return ScalarField(self.grid, fn(self.values),
                           interior_only=self.interior_only)


@dataclass(frozen=True)
class VectorField:
    grid: Grid
    values: np.ndarray  # shape grid.n + (d,)
    interior_only: bool = field(default=False, compare=False)

    def __post_init__(self):
        v = _freeze(self.values)
        object.__setattr__(self, "values", v)
        if v.shape != self.grid.n + (self.grid.d,):
            raise GridError(f"vector values shape {v.shape} invalid")
        if not self.interior_only and not np.all(np.isfinite(v)):
            raise GridError("non-finite field values")

    @classmethod
    def from_function(cls, grid: Grid, fn: Callable) -> "VectorField":
        mesh = grid.meshgrid()
        comps = fn(*mesh)
        return cls(grid, np.stack([np.broadcast_to(np.asarray(c, dtype=float), grid.n)
                                   for c in comps], axis=-1))

    def component(self, i: int) -> np.ndarray:
        return self.values[..., i]


@dataclass(frozen=True)
class TensorField:
    """Symmetric d x d matrix per node, positive definite at interior nodes
    (checked via leading principal minors)."""

    grid: Grid
    values: np.ndarray  # shape grid.n + (d, d)

    def __post_init__(self):
        v = _freeze(self.values)
        object.__setattr__(self, "values", v)
        d = self.grid.d
        if v.shape != self.grid.n + (d, d):
            raise GridError(f"tensor values shape {v.shape} invalid")
        if not np.all(np.isfinite(v)):
            raise GridError("non-finite tensor values")
        sym = np.max(np.abs(v - np.swapaxes(v, -1, -2)))
        scale = np.max(np.abs(v)) or 1.0
        if sym > 1e-12 * scale:
            raise GridError(f"tensor not symmetric (max asymmetry {sym:.3e})")
        inner = v[self.grid.interior]
        if np.any(self._leading_minors(inner) <= 0):
            raise SingularTensorError(
                "tensor not positive definite at an interior node")

    @staticmethod
    def _leading_minors(v: np.ndarray) -> np.ndarray:
        d = v.shape[-1]
        minors = [v[..., 0, 0]]
        if d >= 2:
            minors.append(v[..., 0, 0] * v[..., 1, 1] - v[..., 0, 1] ** 2)
        if d >= 3:
            minors.append(np.linalg.det(v))
        return np.stack(minors, axis=-1)

    @classmethod
    def constant(cls, grid: Grid, matrix) -> "TensorField":
        m = np.asarray(matrix, dtype=float)
        if m.ndim == 0:
            m = m.reshape(1, 1)
        return cls(grid, np.broadcast_to(m, grid.n + m.shape).copy())

    @classmethod
    def identity(cls, grid: Grid) -> "TensorField":
        return cls.constant(grid, np.eye(grid.d))

    @classmethod
    def from_function(cls, grid: Grid, fn: Callable) -> "TensorField":
        pts = grid.nodes()
        mats = np.array([fn(p) for p in pts], dtype=float)
        return cls(grid, mats.reshape(grid.n + (grid.d, grid.d)))

    def component(self, i: int, j: int) -> np.ndarray:
        return self.values[..., i, j]

    def scale(self, c: float) -> "TensorField":
        return TensorField(self.grid, self.values * float(c))


def gradient(f: ScalarField) -> VectorField:
    """Central differences at interior nodes, second-order one-sided at the
    edges (np.gradient with edge_order=2 implements exactly this)."""
    g = f.grid
    comps = [np.gradient(f.values, g.h[i], axis=i, edge_order=2)
             for i in range(g.d)]
    return VectorField(g, np.stack(comps, axis=-1),
                       interior_only=f.interior_only)


def divergence_form_apply(A: TensorField, u: ScalarField) -> ScalarField:
    """sum_ij d_i(A_ij d_j u), defined at interior nodes only (edges NaN).

    Diagonal terms use the conservative half-node scheme with arithmetic-mean
    coefficients; mixed terms use nested central differences with node
    coefficients.  The resulting discrete operator is symmetric.
    """
    g = u.grid
    if A.grid is not u.grid and A.grid != u.grid:
        raise GridError("tensor and scalar fields live on different grids")
    h = g.h
    if g.d == 1:
        out = kernels.div_form_apply_1d(A.values[..., 0, 0], u.values, h[0])
    elif g.d == 2:
        out = kernels.div_form_apply_2d(
            np.ascontiguousarray(A.component(0, 0)),
            np.ascontiguousarray(A.component(0, 1)),
            np.ascontiguousarray(A.component(1, 1)),
            u.values, h[0], h[1])
    else:
        out = kernels.div_form_apply_3d(A.values, u.values, h)
    return ScalarField(g, out, interior_only=True)


# ---------------------------------------------------------------------------
# CSV emission / ingestion


def _fmt(v: float) -> str:
    return f"{v:.17g}"


def write_field_csv(fld, path, config_hash: str | None = None,
                    interior_only: bool | None = None,
                    value_header: str | None = None) -> None:
    """Write a field as CSV: x1..xd then value column(s), 17 significant
    digits, node order row-major with axis 0 slowest.  Tensor components are
    emitted in row-major upper-triangle order."""
    g = fld.grid
    d = g.d
    coords = g.nodes()
    if isinstance(fld, ScalarField):
        cols = fld.values.reshape(-1, 1)
        names = [value_header or "value"]
    elif isinstance(fld, VectorField):
        cols = fld.values.reshape(-1, d)
        names = [f"value_{i + 1}" for i in range(d)]
    elif isinstance(fld, TensorField):
        idx = [(i, j) for i in range(d) for j in range(i, d)]
        cols = np.stack([fld.values[..., i, j].ravel() for i, j in idx], axis=-1)
        names = [f"value_{k + 1}" for k in range(len(idx))]
    else:
        raise TypeError(f"cannot serialize {type(fld).__name__}")
    if interior_only is None:
        interior_only = getattr(fld, "interior_only", False)
    keep = g.interior_mask().ravel() if interior_only else np.ones(len(coords), bool)
    lines = []
    if config_hash:
        lines.append(f"# config_hash: {config_hash}")
    lines.append(",".join([f"x{i + 1}" for i in range(d)] + names))
    for k in np.flatnonzero(keep):
        lines.append(",".join(_fmt(v) for v in coords[k]) +
                     "," + ",".join(_fmt(v) for v in cols[k]))
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def read_scalar_field_csv(path) -> ScalarField:
    """Read a full-grid scalar field CSV written by write_field_csv."""
    rows = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if line[0] in "xX":  # header
                continue
            rows.append([float(t) for t in line.split(",")])
    data = np.asarray(rows, dtype=float)
    d = data.shape[1] - 1
    axes = [np.unique(data[:, i]) for i in range(d)]
    n = tuple(len(a) for a in axes)
    if np.prod(n) != len(data):
        raise GridError("CSV does not cover a full rectangular grid")
    for a in axes:
        dh = np.diff(a)
        if not np.allclose(dh, dh[0], rtol=1e-8, atol=1e-12):
            raise GridError("CSV grid is not uniformly spaced")
    spec = DomainSpec(tuple(a[0] for a in axes), tuple(a[-1] for a in axes))
    grid = Grid(spec, n)
    order = np.lexsort(tuple(data[:, i] for i in reversed(range(d))))
    values = data[order, -1].reshape(n)
    return ScalarField(grid, values)
