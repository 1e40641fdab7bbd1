# core/fiber.py
"""
Fiber algebra on C^d.

A fiber vector is a 1-D complex array of length d, a fiber operator a d×d
complex array. The lattice structure is the componentwise modulus with
respect to the standard basis, so the closed ideals of the fiber are the
coordinate subspaces.
"""
import logging
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence, Tuple

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from gflab.core.errors import DimensionMismatchError, EmptySpanError, InvalidProjectionError

logger = logging.getLogger(__name__)

ALGEBRAIC_TOL = 1e-12     # idempotence / Hermitian defect, Gram-Schmidt drop
SPECTRAL_TOL = 1e-10      # eigenvalues of a projection must sit this close to {0, 1}


def as_fiber_vector(entries) -> np.ndarray:
    v = np.asarray(entries, dtype=complex)
    if v.ndim != 1 or v.size == 0:
        raise DimensionMismatchError(f"fiber vector must be 1-D and nonempty, got shape {v.shape}")
    if not np.all(np.isfinite(v)):
        raise ValueError("fiber vector has non-finite entries")
    return v


def as_fiber_operator(entries) -> np.ndarray:
    op = np.asarray(entries, dtype=complex)
    if op.ndim != 2 or op.shape[0] != op.shape[1] or op.shape[0] == 0:
        raise DimensionMismatchError(f"fiber operator must be square, got shape {op.shape}")
    if not np.all(np.isfinite(op)):
        raise ValueError("fiber operator has non-finite entries")
    return op


def operator_norm(op: np.ndarray) -> float:
    """Largest singular value. Stacked operators (..., d, d) give an array of norms."""
    op = np.asarray(op)
    if op.ndim == 2:
        return float(np.linalg.norm(op, 2))
    return np.linalg.norm(op, ord=2, axis=(-2, -1))


def adjoint(op: np.ndarray) -> np.ndarray:
    return np.conj(np.swapaxes(op, -1, -2))


def projection_defects(ops: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Idempotence and Hermitian defects ‖P²−P‖, ‖P−P†‖ for stacked operators."""
    ops = np.asarray(ops, dtype=complex)
    idempotence = operator_norm(ops @ ops - ops)
    hermitian = operator_norm(ops - adjoint(ops))
    return np.asarray(idempotence), np.asarray(hermitian)


@dataclass(frozen=True, eq=False)
class Projection:
    """Orthogonal projection on C^d. Validated on construction and read-only afterwards."""
    op: np.ndarray
    tol: float = ALGEBRAIC_TOL

    def __post_init__(self):
        op = as_fiber_operator(self.op).copy()
        idempotence, hermitian = projection_defects(op)
        if idempotence > self.tol or hermitian > self.tol:
            raise InvalidProjectionError(
                f"not an orthogonal projection: ‖P²−P‖={float(idempotence):.3e}, "
                f"‖P−P†‖={float(hermitian):.3e} (tol {self.tol:.1e})"
            )
        eigenvalues = np.linalg.eigvalsh(0.5 * (op + op.conj().T))
        off = np.minimum(np.abs(eigenvalues), np.abs(eigenvalues - 1.0))
        if np.any(off > SPECTRAL_TOL):
            raise InvalidProjectionError(f"eigenvalues {eigenvalues} not in {{0, 1}}")
        op.setflags(write=False)
        object.__setattr__(self, "op", op)

    @property
    def dim(self) -> int:
        return self.op.shape[0]

    @property
    def rank(self) -> int:
        return int(round(float(np.trace(self.op).real)))

    def complement(self) -> "Projection":
        return complement(self)

    def apply(self, v) -> np.ndarray:
        v = as_fiber_vector(v)
        if v.size != self.dim:
            raise DimensionMismatchError(f"vector of length {v.size} for projection on C^{self.dim}")
        return self.op @ v

    def distance(self, other: "Projection") -> float:
        return operator_norm(self.op - other.op)

    def __repr__(self):
        return f"Projection(dim={self.dim}, rank={self.rank})"


def project_onto_span(vectors: Sequence, tol: float = ALGEBRAIC_TOL) -> Projection:
    """
    Orthogonal projection onto span(vectors).

    Modified Gram-Schmidt with one re-orthogonalization pass; a vector whose
    residual falls below tol (relative to max(1, ‖v‖)) is dependent and dropped.
    """
    vectors = [as_fiber_vector(v) for v in vectors]
    if not vectors:
        raise EmptySpanError("empty span: no vectors given")
    d = vectors[0].size
    if any(v.size != d for v in vectors):
        raise DimensionMismatchError(f"vectors of mixed lengths {[v.size for v in vectors]}")

    basis = []
    for v in vectors:
        w = v.copy()
        for _ in range(2):
            for q in basis:
                w -= np.vdot(q, w) * q
        residual = np.linalg.norm(w)
        if residual < tol * max(1.0, np.linalg.norm(v)):
            continue
        basis.append(w / residual)

    if not basis:
        raise EmptySpanError("empty span: all vectors vanish after orthogonalization")

    q = np.column_stack(basis)
    op = q @ q.conj().T
    logger.debug(f"span of {len(vectors)} vectors in C^{d} has rank {len(basis)}")
    return Projection(0.5 * (op + op.conj().T))


def coordinate_projection(d: int, subset: Iterable[int]) -> Projection:
    """Projection onto the coordinate ideal spanned by e_j, j in subset (0-based)."""
    diag = np.zeros(d)
    for j in subset:
        diag[j] = 1.0
    return Projection(np.diag(diag).astype(complex))


def identity_projection(d: int) -> Projection:
    return Projection(np.eye(d, dtype=complex))


def zero_projection(d: int) -> Projection:
    return Projection(np.zeros((d, d), dtype=complex))


def modulus(v) -> np.ndarray:
    """Lattice modulus |v|: componentwise complex absolute value."""
    return np.abs(as_fiber_vector(v))


def complement(p: Projection) -> Projection:
    return Projection(np.eye(p.dim, dtype=complex) - p.op, tol=p.tol)


def random_fiber_vector(rng: np.random.Generator, d: int) -> np.ndarray:
    return rng.standard_normal(d) + 1j * rng.standard_normal(d)


def random_projection(rng: np.random.Generator, d: int, rank: Optional[int] = None) -> Projection:
    """Projection onto the span of `rank` complex Gaussian vectors; rank drawn from 1..d if omitted."""
    if rank is None:
        rank = int(rng.integers(1, d + 1))
    if rank == 0:
        return zero_projection(d)
    return project_onto_span([random_fiber_vector(rng, d) for _ in range(rank)])


def is_lattice_irreducible(op, tol: float = ALGEBRAIC_TOL) -> bool:
    """
    Banach-lattice irreducibility of a fiber operator: no permutation of the
    coordinates brings it to block triangular form, i.e. the directed graph of
    its nonzero pattern is strongly connected.
    """
    op = as_fiber_operator(op)
    if op.shape[0] == 1:
        return True
    pattern = csr_matrix((np.abs(op) > tol).astype(np.int8))
    n_components, _ = connected_components(pattern, directed=True, connection="strong")
    return n_components == 1
