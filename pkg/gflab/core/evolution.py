# core/evolution.py
"""
Exact time evolution for the discrete Laplacian on the torus.

Fields are moved to Fourier space per fiber component, mode m is multiplied
by e^{tλ_m} (heat) or e^{±itλ_m} (Schrödinger) and transformed back, so
there is no time-stepping error.
"""
import logging
from functools import lru_cache
from typing import Callable, List, Sequence

import numpy as np

from gflab.core.calculus import exp_projection_field
from gflab.core.errors import AnnihilatedStateError, GridMismatchError, NegativeTimeError
from gflab.core.grid import Field, GridSpec, ProjectionField

logger = logging.getLogger(__name__)

SUPPORT_THRESHOLD = 1e-13


@lru_cache(maxsize=32)
def laplacian_symbol(grid: GridSpec) -> np.ndarray:
    """λ_m = −Σ_k (4/h_k²) sin²(π m_k / N_k) on the FFT mode grid (read-only, shared)."""
    symbol = np.zeros(grid.shape)
    for k, (size, h) in enumerate(zip(grid.sizes, grid.spacings)):
        modes = np.arange(size)
        axis_symbol = -(4.0 / h**2) * np.sin(np.pi * modes / size) ** 2
        shape = [1] * grid.n
        shape[k] = size
        symbol = symbol + axis_symbol.reshape(shape)
    symbol.setflags(write=False)
    return symbol


def _spectral_multiply(f: Field, multiplier: np.ndarray) -> Field:
    axes = tuple(range(f.grid.n))
    spectrum = np.fft.fftn(f.values, axes=axes)
    return f.with_values(np.fft.ifftn(spectrum * multiplier[..., None], axes=axes))


def evolve_heat(f: Field, t: float) -> Field:
    if t < 0:
        raise NegativeTimeError(f"heat semigroup needs t ≥ 0, got {t} (use evolve_schrodinger)")
    if t == 0:
        return f
    return _spectral_multiply(f, np.exp(t * laplacian_symbol(f.grid)))


def evolve_schrodinger(f: Field, t: float, sign: int = 1) -> Field:
    if sign not in (1, -1):
        raise ValueError(f"sign must be +1 or -1, got {sign}")
    if t == 0:
        return f
    return _spectral_multiply(f, np.exp(sign * 1j * t * laplacian_symbol(f.grid)))


def _check_grid(p: ProjectionField, f: Field):
    if p.grid != f.grid:
        raise GridMismatchError(f"grid mismatch: projection field on {p.grid}, field on {f.grid}")
    if p.d != f.d:
        raise GridMismatchError(f"fiber mismatch: projections on C^{p.d}, field in C^{f.d}")


def apply_operator_field(ops: np.ndarray, f: Field) -> Field:
    """(M f)(x) = M_x f(x) for an operator field of shape sizes + (d, d)."""
    return f.with_values(np.einsum("...ij,...j->...i", ops, f.values))


def apply_projection_field(p: ProjectionField, f: Field) -> Field:
    _check_grid(p, f)
    return apply_operator_field(p.values, f)


def apply_exp_group(p: ProjectionField, s: float, f: Field) -> Field:
    """(e^{is𝒫} f)(x) = e^{isP_x} f(x)."""
    _check_grid(p, f)
    return apply_operator_field(exp_projection_field(p.values, 1j * s), f)


def leakage(
    p: ProjectionField,
    f: Field,
    times: Sequence[float],
    evolve: Callable[[Field, float], Field] = evolve_heat,
) -> List[float]:
    """‖(Id−𝒫) U(t) 𝒫f‖ / ‖𝒫f‖ for each t; U is the heat semigroup unless evolve says otherwise."""
    projected = apply_projection_field(p, f)
    scale = projected.norm()
    if scale == 0.0:
        raise AnnihilatedStateError("initial state annihilated by projection")
    complement = p.complement()
    values = []
    for t in times:
        if t == 0:
            values.append(0.0)
            continue
        escaped = apply_projection_field(complement, evolve(projected, t))
        values.append(escaped.norm() / scale)
    return values


def support_mask(f: Field, threshold: float = SUPPORT_THRESHOLD) -> np.ndarray:
    """Cells where the fiber vector has norm above threshold·‖f‖."""
    return f.cell_norms() > threshold * f.norm()


def heat_positivity(f: Field, t: float) -> float:
    """Smallest real value of e^{tΔ}f over cells and components (scalar fibers are real)."""
    return float(np.min(evolve_heat(f, t).values.real))
