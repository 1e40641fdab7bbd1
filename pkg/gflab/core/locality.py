# core/locality.py
"""
Brute-force locality analysis of projections on the whole discrete space.

A GlobalOperator is an (N·d)×(N·d) matrix in cell-major block layout: the
d×d block (x, y) couples cell y to cell x, cells numbered in C order.
Multiplication by a cell indicator stands in for the smooth cut-off
multipliers; a projection commuting with all of them is localizable, and
then it is block diagonal, i.e. strictly local.
"""
import logging
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np
from scipy.linalg import block_diag

from gflab.core.calculus import IDEAL_SAMPLES, is_ideal_projection, is_structurally_ideal
from gflab.core.errors import (
    DimensionMismatchError,
    GridMismatchError,
    LocalityLimitError,
    NotAProjectionError,
    NotStrictlyLocalError,
)
from gflab.core.fiber import ALGEBRAIC_TOL, SPECTRAL_TOL
from gflab.core.grid import Field, GridSpec, ProjectionField

logger = logging.getLogger(__name__)

MAX_BRUTE_FORCE_SIZE = 2048   # N·d; cost grows like (N·d)³
LOCALITY_TOL = 1e-10


def check_brute_force_size(grid: GridSpec, d: int, limit: int = MAX_BRUTE_FORCE_SIZE):
    size = grid.num_cells * d
    if size > limit:
        raise LocalityLimitError(
            f"locality analysis needs a {size}×{size} matrix; refusing above N·d = {limit}"
        )


@dataclass(frozen=True, eq=False)
class GlobalOperator:
    grid: GridSpec
    d: int
    matrix: np.ndarray
    is_projection: bool = False
    tol: float = ALGEBRAIC_TOL

    def __post_init__(self):
        matrix = np.array(self.matrix, dtype=complex)
        size = self.grid.num_cells * self.d
        if matrix.shape != (size, size):
            raise DimensionMismatchError(f"operator of shape {matrix.shape}, expected {(size, size)}")
        if not np.all(np.isfinite(matrix)):
            raise ValueError("global operator has non-finite entries")
        matrix.setflags(write=False)
        object.__setattr__(self, "matrix", matrix)
        if self.is_projection:
            idempotence, hermitian = self.projection_defects()
            if idempotence > self.tol or hermitian > self.tol:
                raise NotAProjectionError(
                    f"flagged as projection but ‖G²−G‖={idempotence:.3e}, ‖G−G†‖={hermitian:.3e}"
                )

    @property
    def size(self) -> int:
        return self.matrix.shape[0]

    def projection_defects(self) -> Tuple[float, float]:
        m = self.matrix
        return float(np.linalg.norm(m @ m - m, 2)), float(np.linalg.norm(m - m.conj().T, 2))

    def blocks(self) -> np.ndarray:
        """Array of shape (N, N, d, d) with blocks[x, y] the coupling from cell y to cell x."""
        n, d = self.grid.num_cells, self.d
        return self.matrix.reshape(n, d, n, d).transpose(0, 2, 1, 3)

    def block(self, x: int, y: int) -> np.ndarray:
        d = self.d
        return self.matrix[x * d:(x + 1) * d, y * d:(y + 1) * d]

    def apply(self, f: Field) -> Field:
        if f.grid != self.grid or f.d != self.d:
            raise GridMismatchError(f"field on {f.grid} with d={f.d} for operator on {self.grid} with d={self.d}")
        return f.with_values((self.matrix @ f.values.reshape(-1)).reshape(f.values.shape))


def lift(p_field: ProjectionField) -> GlobalOperator:
    """Block-diagonal global projection of a projection field."""
    check_brute_force_size(p_field.grid, p_field.d)
    blocks = p_field.values.reshape(-1, p_field.d, p_field.d)
    return GlobalOperator(p_field.grid, p_field.d, block_diag(*blocks), is_projection=True)


def reflection_permutation(grid: GridSpec) -> np.ndarray:
    """Flat cell index of −x (componentwise mod N_k) for every cell x."""
    index = np.indices(grid.shape)
    reflected = tuple((-index[k]) % grid.sizes[k] for k in range(grid.n))
    return np.ravel_multi_index(reflected, grid.shape).reshape(-1)


def even_part_projection(grid: GridSpec, d: int) -> GlobalOperator:
    """(𝒫f)(x) = (f(x) + f(−x))/2: a projection onto reflection-even fields, not localizable."""
    check_brute_force_size(grid, d)
    n = grid.num_cells
    permutation = np.zeros((n, n))
    permutation[np.arange(n), reflection_permutation(grid)] = 1.0
    matrix = 0.5 * (np.eye(n * d) + np.kron(permutation, np.eye(d)))
    return GlobalOperator(grid, d, matrix, is_projection=True)


def _require_projection(g: GlobalOperator):
    if g.is_projection:
        return
    idempotence, hermitian = g.projection_defects()
    if idempotence > g.tol or hermitian > g.tol:
        raise NotAProjectionError(
            f"locality tests need a projection: ‖G²−G‖={idempotence:.3e}, ‖G−G†‖={hermitian:.3e}"
        )


def commutator_norms(g: GlobalOperator) -> np.ndarray:
    """
    ‖[G, M_j]‖ for every cell indicator M_j.

    [G, M_j] = G E Eᴴ − E Eᴴ G = A Bᴴ with A = [G E, −E], B = [E, Gᴴ E] and E
    the selector of cell j, so its norm is that of the 2d×2d product R_A R_Bᴴ
    from thin QR factorizations.
    """
    d, size = g.d, g.size
    m = g.matrix
    norms = np.empty(g.grid.num_cells)
    for j in range(g.grid.num_cells):
        cols = slice(j * d, (j + 1) * d)
        selector = np.zeros((size, d), dtype=complex)
        selector[cols, :] = np.eye(d)
        a = np.hstack([m[:, cols], -selector])
        b = np.hstack([selector, m[cols, :].conj().T])
        r_a = np.linalg.qr(a, mode="r")
        r_b = np.linalg.qr(b, mode="r")
        norms[j] = np.linalg.norm(r_a @ r_b.conj().T, 2)
    return norms


def offdiagonal_block_norms(g: GlobalOperator) -> np.ndarray:
    """(N, N) array of ‖block(x, y)‖, with the diagonal set to zero."""
    norms = np.linalg.norm(g.blocks(), ord=2, axis=(-2, -1))
    np.fill_diagonal(norms, 0.0)
    return norms


@dataclass(frozen=True)
class LocalizabilityResult:
    localizable: bool
    worst_commutator_norm: float
    worst_offdiagonal_block_norm: float
    agree: bool

    def __bool__(self):
        return self.localizable


def is_localizable(g: GlobalOperator, tol: float = LOCALITY_TOL) -> LocalizabilityResult:
    _require_projection(g)
    commutator = float(np.max(commutator_norms(g)))
    offdiagonal = float(np.max(offdiagonal_block_norms(g)))
    by_commutator = commutator <= tol
    by_blocks = offdiagonal <= tol
    if by_commutator != by_blocks:
        logger.error(
            f"localizability tests disagree: commutator {commutator:.3e}, off-diagonal block {offdiagonal:.3e}"
        )
    return LocalizabilityResult(by_commutator, commutator, offdiagonal, by_commutator == by_blocks)


def extract_blocks(g: GlobalOperator, tol: float = LOCALITY_TOL) -> ProjectionField:
    """Cellwise projections P_x of a strictly local projection."""
    verdict = is_localizable(g, tol)
    if not verdict.localizable:
        raise NotStrictlyLocalError(
            f"not strictly local: worst commutator norm {verdict.worst_commutator_norm:.3e}"
        )
    n, d = g.grid.num_cells, g.d
    diagonal = g.blocks()[np.arange(n), np.arange(n)]
    return ProjectionField(g.grid, diagonal.reshape(g.grid.shape + (d, d)), tol=g.tol)


@dataclass(frozen=True, eq=False)
class IdealSubspaceResult:
    is_ideal: bool
    localizable: bool
    cell_verdicts: Optional[np.ndarray] = None   # bool per cell, None when not localizable
    failing_cells: List[Tuple[int, ...]] = field(default_factory=list)
    worst_commutator_norm: float = 0.0

    def __bool__(self):
        return self.is_ideal


def is_ideal_subspace_projection(
    g: GlobalOperator,
    samples: int = IDEAL_SAMPLES,
    rng: Optional[np.random.Generator] = None,
    tol: float = LOCALITY_TOL,
) -> IdealSubspaceResult:
    """Projection onto a closed ideal: localizable and every block projects onto a coordinate ideal."""
    locality = is_localizable(g, tol)
    if not locality.localizable:
        return IdealSubspaceResult(False, False, worst_commutator_norm=locality.worst_commutator_norm)

    rng = rng if rng is not None else np.random.default_rng(0)
    p_field = extract_blocks(g, tol)
    verdicts = np.zeros(g.grid.shape, dtype=bool)
    failing = []
    for index in g.grid.cell_indices():
        verdicts[index] = is_ideal_projection(p_field.cell(index), samples, rng, SPECTRAL_TOL).is_ideal
        if not verdicts[index]:
            failing.append(index)
    if failing:
        logger.debug(f"{len(failing)} of {g.grid.num_cells} cells fail the ideal test")
    return IdealSubspaceResult(not failing, True, verdicts, failing, locality.worst_commutator_norm)


def ideal_family_projection(p_field: ProjectionField) -> GlobalOperator:
    """Global projection of a family of coordinate-ideal projections (its range is an ideal)."""
    for index in p_field.grid.cell_indices():
        if not is_structurally_ideal(p_field.cell(index)):
            raise ValueError(f"cell {index} does not project onto a coordinate ideal")
    return lift(p_field)


def plant_offdiagonal_block(
    g: GlobalOperator,
    x: int,
    y: int,
    block_norm: float,
) -> GlobalOperator:
    """
    Rotate a block-diagonal projection in the plane of (x, a) and (y, b) so
    the result is still a projection but block (x, y) has norm ≥ block_norm.
    Cell y's projection is zeroed first and a maximizes P_x[a, a].
    """
    if x == y:
        raise ValueError("planted block must be off the diagonal")
    d = g.d
    matrix = np.array(g.matrix)
    matrix[y * d:(y + 1) * d, :] = 0.0
    matrix[:, y * d:(y + 1) * d] = 0.0
    diag_x = np.diag(matrix[x * d:(x + 1) * d, x * d:(x + 1) * d]).real
    a = int(np.argmax(diag_x))
    if diag_x[a] <= 0.5 / d:
        raise ValueError(f"cell {x} carries a zero projection; nothing to rotate")
    ratio = min(1.0, 2.0 * block_norm / diag_x[a])
    angle = 0.5 * np.arcsin(ratio)

    i, j = x * d + a, y * d
    rotation = np.eye(g.size, dtype=complex)
    c, s = np.cos(angle), np.sin(angle)
    rotation[i, i], rotation[i, j] = c, -s
    rotation[j, i], rotation[j, j] = s, c
    planted = rotation @ matrix @ rotation.conj().T
    return GlobalOperator(g.grid, d, 0.5 * (planted + planted.conj().T), is_projection=True, tol=g.tol)
