# core/calculus.py
"""
Projection calculus: exponentials of projections, the off-diagonal block
structure of the gradient of a projection field, and the lattice test for
projections onto ideals.
"""
import logging
import math
from dataclasses import dataclass
from typing import List, Optional, Sequence

import numpy as np

from gflab.core.fiber import (
    SPECTRAL_TOL,
    Projection,
    operator_norm,
)
from gflab.core.grid import GridSpec, ProjectionField, difference

logger = logging.getLogger(__name__)

IDEAL_SAMPLES = 1000
SERIES_TERMS = 40


def exp_projection(p: Projection, z: complex) -> np.ndarray:
    """e^{zP} = e^z P + (Id − P)."""
    return np.exp(z) * p.op + (np.eye(p.dim) - p.op)


def exp_projection_field(values: np.ndarray, z: complex) -> np.ndarray:
    """Cellwise e^{zP_x} for stacked projections (..., d, d)."""
    d = values.shape[-1]
    return np.exp(z) * values + (np.eye(d) - values)


def exp_projection_series(p: Projection, z: complex, terms: int = SERIES_TERMS) -> np.ndarray:
    """Truncated power series Σ_{k<terms} (zP)^k / k!, used as an oracle for exp_projection."""
    zp = z * p.op
    term = np.eye(p.dim, dtype=complex)
    total = term.copy()
    for k in range(1, terms):
        term = term @ zp / k
        total += term
    return total


def projection_gradient(p_field: ProjectionField) -> List[np.ndarray]:
    """Per-axis forward differences D_k P of a projection field."""
    return [difference(p_field.values, p_field.grid, k) for k in range(p_field.grid.n)]


@dataclass(frozen=True, eq=False)
class OffDiagonalSplit:
    """Block decomposition of D_kP along one axis, all arrays shaped sizes + (d, d)."""
    axis: int
    lower: np.ndarray       # P⊥ (D_kP) P
    upper: np.ndarray       # P (D_kP) P⊥
    derivative: np.ndarray  # D_kP
    diagonal_residual: np.ndarray  # per cell ‖P(D_kP)P‖ + ‖P⊥(D_kP)P⊥‖

    @property
    def max_diagonal_residual(self) -> float:
        return float(np.max(self.diagonal_residual))

    @property
    def reassembly_error(self) -> float:
        return float(np.max(operator_norm(self.lower + self.upper - self.derivative)))


def _split(values: np.ndarray, derivative: np.ndarray, axis: int) -> OffDiagonalSplit:
    complement = np.eye(values.shape[-1]) - values
    lower = complement @ derivative @ values
    upper = values @ derivative @ complement
    residual = operator_norm(values @ derivative @ values) + operator_norm(complement @ derivative @ complement)
    return OffDiagonalSplit(axis, lower, upper, derivative, np.asarray(residual))


def grad_offdiagonal_decompose(p_field: ProjectionField, grid: Optional[GridSpec] = None) -> List[OffDiagonalSplit]:
    """
    Per axis, the two off-diagonal terms P⊥(D_kP)P and P(D_kP)P⊥ of the
    discrete gradient. Their sum differs from D_kP by the diagonal blocks,
    which vanish in the continuum and are O(h) on the grid.
    """
    if grid is not None and grid != p_field.grid:
        raise ValueError(f"projection field lives on {p_field.grid}, not {grid}")
    return [_split(p_field.values, dp, k) for k, dp in enumerate(projection_gradient(p_field))]


@dataclass(frozen=True, eq=False)
class TwistComparison:
    axis: int
    lhs: np.ndarray   # e^{zP}(D_kP)
    rhs: np.ndarray   # e^z P(D_kP)P⊥ + P⊥(D_kP)P
    residual: float   # sup over cells of ‖lhs − rhs‖


def exp_grad_twist(
    p_field: ProjectionField,
    grid: Optional[GridSpec] = None,
    z: complex = 0.0,
    derivative: Optional[Sequence[np.ndarray]] = None,
) -> List[TwistComparison]:
    """
    Compare e^{zP}(D_kP) with e^z P(D_kP)P⊥ + P⊥(D_kP)P per axis.

    `derivative` replaces the discrete D_kP, e.g. by an analytic derivative
    or by its off-diagonal part, in which case both sides agree exactly.
    """
    if grid is not None and grid != p_field.grid:
        raise ValueError(f"projection field lives on {p_field.grid}, not {grid}")
    derivatives = list(derivative) if derivative is not None else projection_gradient(p_field)
    values = p_field.values
    complement = np.eye(p_field.d) - values
    twist = exp_projection_field(values, z)

    comparisons = []
    for k, dp in enumerate(derivatives):
        lhs = twist @ dp
        rhs = np.exp(z) * values @ dp @ complement + complement @ dp @ values
        residual = float(np.max(operator_norm(lhs - rhs)))
        comparisons.append(TwistComparison(k, lhs, rhs, residual))
    return comparisons


def offdiagonal_part(p_field: ProjectionField) -> List[np.ndarray]:
    """P⊥(D_kP)P + P(D_kP)P⊥ per axis: the discrete gradient with its diagonal blocks removed."""
    return [split.lower + split.upper for split in grad_offdiagonal_decompose(p_field)]


@dataclass(frozen=True)
class IdealVerdict:
    is_ideal: bool          # sampled lattice criterion
    worst_residual: float   # max ‖|(Id−Q)v| − (Id−Q)|v|‖ over samples
    structural: bool        # Q is a 0/1 diagonal matrix
    agree: bool

    def __bool__(self):
        return self.is_ideal


def is_structurally_ideal(q: Projection, tol: float = SPECTRAL_TOL) -> bool:
    """Q is diagonal with diagonal entries in {0, 1} up to tol."""
    op = q.op
    diagonal = np.diag(op)
    off = op - np.diag(diagonal)
    near_01 = np.minimum(np.abs(diagonal), np.abs(diagonal - 1.0))
    return bool(np.max(np.abs(off), initial=0.0) <= tol and np.max(near_01) <= tol)


def is_ideal_projection(
    q: Projection,
    samples: int = IDEAL_SAMPLES,
    rng: Optional[np.random.Generator] = None,
    tol: float = SPECTRAL_TOL,
) -> IdealVerdict:
    """
    Does q project onto a closed ideal of C^d?

    The range of q is the kernel of Id−q, which is an ideal iff
    |(Id−q)v| = (Id−q)|v| for all v. We test `samples` complex Gaussian
    vectors plus ±e_j and compare with the structural 0/1-diagonal test.
    """
    if samples < 1:
        raise ValueError("samples must be at least 1")
    rng = rng if rng is not None else np.random.default_rng(0)
    d = q.dim
    kernel_projector = np.eye(d) - q.op

    basis = np.eye(d, dtype=complex)
    gaussian = rng.standard_normal((samples, d)) + 1j * rng.standard_normal((samples, d))
    vectors = np.vstack([basis, -basis, gaussian])
    images = vectors @ kernel_projector.T
    residuals = np.linalg.norm(np.abs(images) - np.abs(vectors) @ kernel_projector.T, axis=1)
    worst = float(residuals.max())

    sampled = worst <= tol
    structural = is_structurally_ideal(q, tol)
    if sampled != structural:
        logger.error(f"ideal tests disagree: sampled={sampled} (residual {worst:.3e}), structural={structural}")
    return IdealVerdict(sampled, worst, structural, sampled == structural)


def measured_order(spacings: Sequence[float], errors: Sequence[float]) -> float:
    """Least-squares slope of log(error) against log(h)."""
    spacings = np.asarray(spacings, dtype=float)
    errors = np.asarray(errors, dtype=float)
    if spacings.size < 2:
        raise ValueError("convergence order needs at least two resolutions")
    if np.any(errors <= 0):
        return math.nan
    slope, _ = np.polyfit(np.log(spacings), np.log(errors), 1)
    return float(slope)


def pairwise_orders(spacings: Sequence[float], errors: Sequence[float]) -> List[float]:
    orders = []
    for (h0, e0), (h1, e1) in zip(zip(spacings, errors), zip(spacings[1:], errors[1:])):
        orders.append(math.log(e0 / e1) / math.log(h0 / h1) if e0 > 0 and e1 > 0 else math.nan)
    return orders
