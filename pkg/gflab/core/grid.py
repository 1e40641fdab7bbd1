# core/grid.py
"""
Periodic grids on the unit torus and the discrete calculus on them.

Values are stored with the spatial axes first: a Field holds an array of
shape sizes + (d,), a ProjectionField or operator field sizes + (d, d).
The gradient is the forward difference with periodic wrap and the Laplacian
is the matching stencil -Σ D_k†D_k, so summation by parts holds exactly.
"""
import logging
from dataclasses import dataclass, field
from typing import List, Sequence, Tuple

import numpy as np

from gflab.core.errors import (
    DimensionMismatchError,
    GridMismatchError,
    InvalidProjectionError,
    TrajectoryError,
)
from gflab.core.fiber import ALGEBRAIC_TOL, Projection, projection_defects

logger = logging.getLogger(__name__)

MAX_DIMS = 3


@dataclass(frozen=True)
class GridSpec:
    """Periodic grid on [0, length)^n with sizes[k] cells along axis k."""
    sizes: Tuple[int, ...]
    length: float = 1.0

    def __post_init__(self):
        sizes = tuple(int(s) for s in np.atleast_1d(self.sizes))
        if not 1 <= len(sizes) <= MAX_DIMS:
            raise ValueError(f"grid dimension must be 1..{MAX_DIMS}, got {len(sizes)}")
        if any(s < 2 for s in sizes):
            raise ValueError(f"every axis needs at least 2 cells, got {sizes}")
        if not self.length > 0:
            raise ValueError(f"torus length must be positive, got {self.length}")
        object.__setattr__(self, "sizes", sizes)

    @property
    def n(self) -> int:
        return len(self.sizes)

    @property
    def shape(self) -> Tuple[int, ...]:
        return self.sizes

    @property
    def num_cells(self) -> int:
        return int(np.prod(self.sizes))

    @property
    def spacings(self) -> Tuple[float, ...]:
        return tuple(self.length / s for s in self.sizes)

    @property
    def h(self) -> float:
        """Spacing of a uniform grid (coarsest axis otherwise)."""
        return max(self.spacings)

    @property
    def cell_volume(self) -> float:
        return float(np.prod(self.spacings))

    def coordinates(self) -> List[np.ndarray]:
        """Cell coordinates x_k = i_k·h_k as broadcastable arrays, one per axis."""
        axes = [np.arange(s) * h for s, h in zip(self.sizes, self.spacings)]
        return list(np.meshgrid(*axes, indexing="ij"))

    def cell_indices(self) -> List[Tuple[int, ...]]:
        return [tuple(int(i) for i in idx) for idx in np.ndindex(*self.sizes)]


def _check_same_grid(a: GridSpec, b: GridSpec):
    if a != b:
        raise GridMismatchError(f"grid mismatch: {a} vs {b}")


@dataclass(frozen=True, eq=False)
class Field:
    """Grid-indexed array of fiber vectors, the discrete L²(torus; C^d)."""
    grid: GridSpec
    values: np.ndarray

    def __post_init__(self):
        values = np.array(self.values, dtype=complex)
        if values.ndim != self.grid.n + 1 or values.shape[:-1] != self.grid.shape:
            raise DimensionMismatchError(
                f"field values of shape {values.shape} do not fit grid {self.grid.shape}"
            )
        if not np.all(np.isfinite(values)):
            raise ValueError("field has non-finite values")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @classmethod
    def zeros(cls, grid: GridSpec, d: int) -> "Field":
        return cls(grid, np.zeros(grid.shape + (d,), dtype=complex))

    @classmethod
    def constant(cls, grid: GridSpec, v) -> "Field":
        v = np.asarray(v, dtype=complex)
        return cls(grid, np.broadcast_to(v, grid.shape + v.shape))

    @classmethod
    def random(cls, grid: GridSpec, d: int, rng: np.random.Generator) -> "Field":
        shape = grid.shape + (d,)
        return cls(grid, rng.standard_normal(shape) + 1j * rng.standard_normal(shape))

    @property
    def d(self) -> int:
        return self.values.shape[-1]

    def with_values(self, values) -> "Field":
        return Field(self.grid, values)

    def norm(self) -> float:
        return float(np.sqrt(inner(self, self).real))

    def cell_norms(self) -> np.ndarray:
        return np.linalg.norm(self.values, axis=-1)

    def __add__(self, other: "Field") -> "Field":
        _check_same_grid(self.grid, other.grid)
        return self.with_values(self.values + other.values)

    def __sub__(self, other: "Field") -> "Field":
        _check_same_grid(self.grid, other.grid)
        return self.with_values(self.values - other.values)

    def __mul__(self, scalar) -> "Field":
        return self.with_values(scalar * self.values)

    __rmul__ = __mul__


@dataclass(frozen=True, eq=False)
class ProjectionField:
    """Grid-indexed family of fiber projections x ↦ P_x."""
    grid: GridSpec
    values: np.ndarray
    tol: float = ALGEBRAIC_TOL

    def __post_init__(self):
        values = np.array(self.values, dtype=complex)
        n = self.grid.n
        if values.ndim != n + 2 or values.shape[:n] != self.grid.shape or values.shape[-1] != values.shape[-2]:
            raise DimensionMismatchError(
                f"projection field of shape {values.shape} does not fit grid {self.grid.shape}"
            )
        if not np.all(np.isfinite(values)):
            raise InvalidProjectionError("projection field has non-finite entries")
        idempotence, hermitian = projection_defects(values)
        worst = max(float(idempotence.max()), float(hermitian.max()))
        if worst > self.tol:
            raise InvalidProjectionError(f"cell value is not an orthogonal projection (defect {worst:.3e})")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @classmethod
    def constant(cls, grid: GridSpec, p: Projection) -> "ProjectionField":
        return cls(grid, np.broadcast_to(p.op, grid.shape + p.op.shape))

    @property
    def d(self) -> int:
        return self.values.shape[-1]

    def cell(self, index: Sequence[int]) -> Projection:
        return Projection(self.values[tuple(index)], tol=self.tol)

    def complement(self) -> "ProjectionField":
        return ProjectionField(self.grid, np.eye(self.d) - self.values, self.tol)

    def sup_distance(self, other: "ProjectionField") -> float:
        _check_same_grid(self.grid, other.grid)
        return float(np.max(np.linalg.norm(self.values - other.values, ord=2, axis=(-2, -1))))


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Time samples of fields on one grid."""
    times: np.ndarray
    states: Tuple[Field, ...] = field(default_factory=tuple)

    def __post_init__(self):
        times = np.asarray(self.times, dtype=float)
        states = tuple(self.states)
        if times.ndim != 1 or times.size != len(states):
            raise TrajectoryError(f"{times.size} times for {len(states)} states")
        if times.size > 1 and np.any(np.diff(times) <= 0):
            raise TrajectoryError("times must be strictly increasing")
        if states and any(s.grid != states[0].grid for s in states):
            raise TrajectoryError("all states must live on the same grid")
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "states", states)

    @property
    def grid(self) -> GridSpec:
        return self.states[0].grid

    def __len__(self):
        return len(self.states)


# ── Discrete calculus ─────────────────────────────────────────────────────────

def shift(values: np.ndarray, axis: int, step: int = 1) -> np.ndarray:
    """(S values)(x) = values(x + step·h e_axis) with periodic wrap."""
    return np.roll(values, -step, axis=axis)


def difference(values: np.ndarray, grid: GridSpec, axis: int) -> np.ndarray:
    """Forward difference along one spatial axis; works for fields and operator fields."""
    return (shift(values, axis) - values) / grid.spacings[axis]


def inner(f: Field, g: Field) -> complex:
    """(f|g) = hⁿ Σ_x (f(x)|g(x)), linear in f."""
    _check_same_grid(f.grid, g.grid)
    if f.d != g.d:
        raise DimensionMismatchError(f"fiber dimensions {f.d} and {g.d} differ")
    return complex(f.grid.cell_volume * np.sum(f.values * np.conj(g.values)))


def gradient(f: Field) -> List[Field]:
    return [f.with_values(difference(f.values, f.grid, k)) for k in range(f.grid.n)]


def laplacian(f: Field) -> Field:
    out = np.zeros_like(f.values)
    for k, h in enumerate(f.grid.spacings):
        out += (shift(f.values, k, 1) + shift(f.values, k, -1) - 2.0 * f.values) / h**2
    return f.with_values(out)


def form_a_sesq(f: Field, g: Field) -> complex:
    """a(f, g) = hⁿ Σ_x Σ_k (D_k f(x) | D_k g(x))."""
    _check_same_grid(f.grid, g.grid)
    total = 0j
    for k in range(f.grid.n):
        total += np.sum(difference(f.values, f.grid, k) * np.conj(difference(g.values, g.grid, k)))
    return complex(f.grid.cell_volume * total)


def form_a(f: Field) -> float:
    total = 0.0
    for k in range(f.grid.n):
        total += float(np.sum(np.abs(difference(f.values, f.grid, k)) ** 2))
    return f.grid.cell_volume * total


def lagrangian(traj: Trajectory) -> complex:
    """
    Σ_j dt_j [ i·(φ̇_j | φ_j) + a(φ_j) ] with the forward time difference
    φ̇_j = (φ_{j+1} − φ_j)/dt_j over the first len−1 samples.
    """
    if len(traj) < 2:
        raise TrajectoryError("lagrangian needs at least 2 time samples")
    total = 0j
    for j in range(len(traj) - 1):
        dt = traj.times[j + 1] - traj.times[j]
        phi, nxt = traj.states[j], traj.states[j + 1]
        velocity = (nxt - phi) * (1.0 / dt)
        total += dt * (1j * inner(velocity, phi) + form_a(phi))
    return complex(total)
