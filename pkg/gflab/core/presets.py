# core/presets.py
import logging
from typing import Callable, Dict, List, Optional

import numpy as np

from gflab.core.fiber import (
    Projection,
    coordinate_projection,
    identity_projection,
    random_projection,
    zero_projection,
)
from gflab.core.grid import GridSpec, ProjectionField

logger = logging.getLogger(__name__)

PRESET_NAMES = ("constant", "identity", "zero", "step", "rotating", "random", "from-file")


def constant_field(grid: GridSpec, d: int, p: Optional[Projection] = None) -> ProjectionField:
    """Constant field, diag(1, 0, ..., 0) unless another projection is given."""
    return ProjectionField.constant(grid, p if p is not None else coordinate_projection(d, [0]))


def identity_field(grid: GridSpec, d: int) -> ProjectionField:
    return ProjectionField.constant(grid, identity_projection(d))


def zero_field(grid: GridSpec, d: int) -> ProjectionField:
    return ProjectionField.constant(grid, zero_projection(d))


def step_field(grid: GridSpec, d: int, axis: int = 0) -> ProjectionField:
    """diag(1, 0, ...) on the half-torus x_axis < 1/2, its complement on the other half."""
    left = coordinate_projection(d, [0]).op
    right = np.eye(d) - left
    index = np.indices(grid.shape)[axis]
    mask = (index < grid.sizes[axis] // 2)[..., None, None]
    return ProjectionField(grid, np.where(mask, left, right))


def _rotation_frame(grid: GridSpec, d: int, axis: int):
    if d < 2:
        raise ValueError("rotating preset needs a fiber of dimension at least 2")
    theta = 2.0 * np.pi * grid.coordinates()[axis]
    u = np.zeros(grid.shape + (d,))
    w = np.zeros(grid.shape + (d,))
    u[..., 0], u[..., 1] = np.cos(theta), np.sin(theta)
    w[..., 0], w[..., 1] = -np.sin(theta), np.cos(theta)
    return u, w


def rotating_field(grid: GridSpec, d: int, axis: int = 0) -> ProjectionField:
    """P_x = R(2πx) diag(1, 0, ...) R(2πx)† with R rotating the (e₁, e₂) plane along `axis`."""
    u, _ = _rotation_frame(grid, d, axis)
    return ProjectionField(grid, np.einsum("...i,...j->...ij", u, u))


def rotating_field_derivative(grid: GridSpec, d: int, axis: int = 0) -> List[np.ndarray]:
    """Analytic ∂_k P_x of the rotating preset: 2π(u wᵀ + w uᵀ) along `axis`, zero elsewhere."""
    u, w = _rotation_frame(grid, d, axis)
    derivative = 2.0 * np.pi * (np.einsum("...i,...j->...ij", u, w) + np.einsum("...i,...j->...ij", w, u))
    zeros = np.zeros(grid.shape + (d, d))
    return [derivative.astype(complex) if k == axis else zeros.astype(complex) for k in range(grid.n)]


def _random_hermitian(rng: np.random.Generator, d: int) -> np.ndarray:
    a = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    h = 0.5 * (a + a.conj().T)
    return h / np.linalg.norm(h, 2)


def random_smooth_field(
    grid: GridSpec,
    d: int,
    rng: np.random.Generator,
    rank: Optional[int] = None,
    amplitude: float = 1.0,
) -> ProjectionField:
    """
    P_x = U(x) P₀ U(x)† with U(x) = exp(i H(x)),
    H(x) = amplitude · Σ_k (A_k cos 2πx_k + B_k sin 2πx_k), A_k, B_k random Hermitian.
    """
    if rank is None:
        rank = int(rng.integers(1, d)) if d > 1 else 1
    p0 = random_projection(rng, d, rank).op

    coords = grid.coordinates()
    generator = np.zeros(grid.shape + (d, d), dtype=complex)
    for k in range(grid.n):
        a, b = _random_hermitian(rng, d), _random_hermitian(rng, d)
        phase = 2.0 * np.pi * coords[k]
        generator += np.cos(phase)[..., None, None] * a + np.sin(phase)[..., None, None] * b
    generator *= amplitude

    eigenvalues, vectors = np.linalg.eigh(generator)
    unitary = vectors @ (np.exp(1j * eigenvalues)[..., None] * np.conj(np.swapaxes(vectors, -1, -2)))
    values = unitary @ p0 @ np.conj(np.swapaxes(unitary, -1, -2))
    values = 0.5 * (values + np.conj(np.swapaxes(values, -1, -2)))
    return ProjectionField(grid, values)


def build_preset(
    name: str,
    grid: GridSpec,
    d: int,
    rng: Optional[np.random.Generator] = None,
    axis: int = 0,
    rank: Optional[int] = None,
    path: Optional[str] = None,
) -> ProjectionField:
    """Build a named projection field preset on `grid`."""
    builders: Dict[str, Callable[[], ProjectionField]] = {
        "constant": lambda: constant_field(grid, d),
        "identity": lambda: identity_field(grid, d),
        "zero": lambda: zero_field(grid, d),
        "step": lambda: step_field(grid, d, axis),
        "rotating": lambda: rotating_field(grid, d, axis),
        "random": lambda: random_smooth_field(grid, d, rng if rng is not None else np.random.default_rng(0), rank),
        "from-file": lambda: _from_file(path, grid, d),
    }
    if name not in builders:
        raise ValueError(f"unknown preset '{name}', expected one of {PRESET_NAMES}")
    field = builders[name]()
    logger.debug(f"built preset '{name}' on grid {grid.sizes} with d={d}")
    return field


def _from_file(path: Optional[str], grid: GridSpec, d: int) -> ProjectionField:
    from gflab.core.serialization import read_projection_field

    if not path:
        raise ValueError("preset 'from-file' needs a file path")
    field = read_projection_field(path)
    if field.grid.sizes != grid.sizes or field.d != d:
        logger.warning(
            f"projection field in {path} has grid {field.grid.sizes} and d={field.d}; "
            f"config asked for {grid.sizes} and d={d}, using the file"
        )
    return field
