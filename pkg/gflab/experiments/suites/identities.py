# experiments/suites/identities.py
"""Algebraic identities of the fiber, the projection calculus and the grid."""
import logging
import math

import numpy as np

from gflab.core.calculus import (
    IDEAL_SAMPLES,
    exp_grad_twist,
    exp_projection,
    exp_projection_series,
    grad_offdiagonal_decompose,
    is_ideal_projection,
    offdiagonal_part,
)
from gflab.core.fiber import (
    coordinate_projection,
    identity_projection,
    is_lattice_irreducible,
    modulus,
    operator_norm,
    project_onto_span,
    random_projection,
)
from gflab.core.grid import Field, GridSpec, difference, form_a, form_a_sesq, inner, laplacian
from gflab.core.presets import rotating_field, rotating_field_derivative
from gflab.core.symmetry import form_group_expansion
from gflab.core.evolution import apply_exp_group
from gflab.experiments.base_experiment import BaseSuite

logger = logging.getLogger(__name__)

RANDOM_CASES = 100
IDEAL_CASES = 1000
MAX_SERIES_D = 8
MAX_IDEAL_D = 4
EIGEN_GRID = (8, 8)


class IdentitiesSuite(BaseSuite):
    """Exponential formula, ideal criteria, summation by parts and gradient block structure"""

    name = "identities"

    def execute(self) -> None:
        self._exponential()
        self._fiber()
        self._ideals()
        self._grid()
        self._gradient_blocks()
        self._group_expansion()

    # ── Exponentials of projections ───────────────────────────────────────────
    def _random_z(self) -> complex:
        radius = 2.0 * math.pi * self.rng.random()
        return radius * np.exp(2j * math.pi * self.rng.random())

    def _exponential(self):
        tol = self.config.tol_algebraic
        series, group, unitarity, half_turn = 0.0, 0.0, 0.0, 0.0
        for _ in range(RANDOM_CASES):
            d = int(self.rng.integers(1, MAX_SERIES_D + 1))
            p = random_projection(self.rng, d)
            z1, z2 = self._random_z(), self._random_z()
            closed = exp_projection(p, z1)
            series = max(series, operator_norm(closed - exp_projection_series(p, z1)) / (1.0 + operator_norm(closed)))

            product = exp_projection(p, z1) @ exp_projection(p, z2)
            combined = exp_projection(p, z1 + z2)
            group = max(group, operator_norm(product - combined) / (1.0 + operator_norm(combined)))

            u = exp_projection(p, 1j * z1.real)
            unitarity = max(unitarity, operator_norm(u.conj().T @ u - np.eye(d)))
            half_turn = max(half_turn, operator_norm(exp_projection(p, 1j * math.pi) - (np.eye(d) - 2.0 * p.op)))

        self.check("exp_projection.series", series, tol, cases=RANDOM_CASES, terms=40)
        self.check("exp_projection.group_law", group, tol, cases=RANDOM_CASES)
        self.check("exp_projection.unitary", unitarity, tol, cases=RANDOM_CASES)
        self.check("exp_projection.half_turn", half_turn, tol, cases=RANDOM_CASES)

    # ── Fiber algebra ─────────────────────────────────────────────────────────
    def _fiber(self):
        tol = self.config.tol_algebraic
        homogeneity, orthogonality = 0.0, 0.0
        for _ in range(RANDOM_CASES):
            d = int(self.rng.integers(1, MAX_SERIES_D + 1))
            v = self.rng.standard_normal(d) + 1j * self.rng.standard_normal(d)
            c = complex(self.rng.standard_normal(), self.rng.standard_normal())
            homogeneity = max(homogeneity, float(np.linalg.norm(modulus(c * v) - abs(c) * modulus(v))))
            p = random_projection(self.rng, d)
            orthogonality = max(orthogonality, operator_norm(p.op @ p.complement().op))
        self.check("modulus.homogeneous", homogeneity, tol, cases=RANDOM_CASES)
        self.check("complement.orthogonal", orthogonality, tol, cases=RANDOM_CASES)

        basis_change = 0.0
        for _ in range(RANDOM_CASES):
            d = int(self.rng.integers(2, MAX_SERIES_D + 1))
            k = int(self.rng.integers(1, d))
            a = self.rng.standard_normal((d, k)) + 1j * self.rng.standard_normal((d, k))
            mix = self.rng.standard_normal((k, k)) + 1j * self.rng.standard_normal((k, k)) + 3.0 * np.eye(k)
            first = project_onto_span(list(a.T))
            second = project_onto_span(list((a @ mix).T))
            basis_change = max(basis_change, first.distance(second))
        self.check("project_onto_span.basis_independent", basis_change, self.config.tol_pass * 1e-2, cases=RANDOM_CASES)

        dense = self.rng.standard_normal((4, 4)) + 3.0
        self.check_flag(
            "lattice_irreducible",
            is_lattice_irreducible(dense) and not is_lattice_irreducible(np.diag([1.0, 2.0, 3.0, 4.0])),
        )

    # ── Ideal criteria ────────────────────────────────────────────────────────
    def _ideals(self):
        disagreements, ideal_count = 0, 0
        for case in range(IDEAL_CASES):
            d = int(self.rng.integers(1, MAX_IDEAL_D + 1))
            if case % 2 == 0:
                subset = [j for j in range(d) if self.rng.random() < 0.5]
                q = coordinate_projection(d, subset)
            else:
                q = random_projection(self.rng, d)
            verdict = is_ideal_projection(q, IDEAL_SAMPLES, self.rng)
            disagreements += 0 if verdict.agree else 1
            ideal_count += 1 if verdict.is_ideal else 0
        self.check(
            "ideal_criterion.agreement", disagreements, 0,
            cases=IDEAL_CASES, ideal=ideal_count, non_ideal=IDEAL_CASES - ideal_count,
        )

        diagonal = is_ideal_projection(coordinate_projection(2, [0]), rng=self.rng).is_ideal
        diagonal_line = not is_ideal_projection(project_onto_span([[1.0, 1.0]]), rng=self.rng).is_ideal
        full = is_ideal_projection(identity_projection(2), rng=self.rng).is_ideal
        self.check_flag("ideal_criterion.examples", diagonal and diagonal_line and full)

    # ── Grid calculus ─────────────────────────────────────────────────────────
    def _grid(self):
        tol = self.config.tol_algebraic
        grid, d = self.config.grid, self.config.d
        by_parts, self_adjoint, symmetry = 0.0, 0.0, 0.0
        for _ in range(RANDOM_CASES):
            f = Field.random(grid, d, self.rng)
            g = Field.random(grid, d, self.rng)
            energy = form_a(f)
            by_parts = max(by_parts, abs(energy + inner(laplacian(f), f)) / (1.0 + energy))
            scale = 1.0 + form_a(f) + form_a(g)
            self_adjoint = max(self_adjoint, abs(inner(laplacian(f), g) - inner(f, laplacian(g))) / scale)
            symmetry = max(symmetry, abs(form_a_sesq(f, g) - np.conj(form_a_sesq(g, f))) / scale)
        self.check("laplacian.summation_by_parts", by_parts, tol, cases=RANDOM_CASES)
        self.check("laplacian.self_adjoint", self_adjoint, tol, cases=RANDOM_CASES)
        self.check("form_a_sesq.conjugate_symmetric", symmetry, tol, cases=RANDOM_CASES)

        small = GridSpec(EIGEN_GRID)
        coords = small.coordinates()
        worst = 0.0
        for mode in np.ndindex(*small.sizes):
            phase = sum(m * x for m, x in zip(mode, coords))
            values = np.zeros(small.shape + (2,), dtype=complex)
            values[..., 0] = np.exp(2j * np.pi * phase)
            f = Field(small, values)
            eigenvalue = -sum(
                (4.0 / h**2) * np.sin(np.pi * m / size) ** 2 for m, size, h in zip(mode, small.sizes, small.spacings)
            )
            residual = np.max(np.abs(laplacian(f).values - eigenvalue * f.values)) / (1.0 + abs(eigenvalue))
            worst = max(worst, float(residual))
        self.check("laplacian.eigenpairs", worst, tol, grid=list(EIGEN_GRID))

    # ── Gradient block structure ──────────────────────────────────────────────
    def _gradient_blocks(self):
        tol = self.config.tol_algebraic
        p = self.p_field
        complement_rule = 0.0
        for k in range(p.grid.n):
            lhs = difference(np.eye(p.d) - p.values, p.grid, k)
            complement_rule = max(complement_rule, float(np.max(np.abs(lhs + difference(p.values, p.grid, k)))))
        self.check("gradient.complement_rule", complement_rule, tol)

        d = max(self.config.d, 2)
        spacings, residuals = [], []
        for size in self.config.convergence_sizes:
            grid = GridSpec((size,))
            splits = grad_offdiagonal_decompose(rotating_field(grid, d))
            spacings.append(grid.h)
            residuals.append(max(split.max_diagonal_residual for split in splits))
        self.convergence("gradient.diagonal_blocks", spacings, residuals, self.config.min_order)

        grid = GridSpec((self.config.convergence_sizes[-1],))
        twist = exp_grad_twist(
            rotating_field(grid, d), z=1j * math.pi / 2, derivative=rotating_field_derivative(grid, d),
        )
        residual = max(c.residual for c in twist) / (2.0 * math.pi)
        self.check("gradient.twist_exact_derivative", residual, tol)

        offdiagonal = offdiagonal_part(p)
        scale = 1.0 + max((float(np.max(operator_norm(dp))) for dp in offdiagonal), default=0.0)
        twist = exp_grad_twist(p, z=2j * math.pi * self.rng.random(), derivative=offdiagonal)
        self.check("gradient.twist_offdiagonal_part", max(c.residual for c in twist) / scale, tol)

    def _group_expansion(self):
        p = self.p_field
        worst = 0.0
        for s in self.config.s_samples:
            for _ in range(self.config.trials):
                psi = Field.random(p.grid, p.d, self.rng)
                expansion = form_group_expansion(p, s, psi)
                direct = form_a(apply_exp_group(p, s, psi))
                worst = max(worst, abs(expansion - direct) / (1.0 + form_a(psi)))
        self.check("form_group_expansion", worst, self.config.tol_discretization)
