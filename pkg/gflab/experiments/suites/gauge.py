# experiments/suites/gauge.py
"""Gauge field of the scenario preset, the a_s forms and the interaction Lagrangian."""
import logging
import math

import numpy as np

from gflab.core.evolution import apply_exp_group, evolve_schrodinger
from gflab.core.fiber import operator_norm
from gflab.core.grid import Field, GridSpec, Trajectory, form_a
from gflab.core.presets import rotating_field
from gflab.core.symmetry import (
    form_a_s,
    form_a_s_exact,
    gauge_field,
    gauge_field_alternative,
    interaction_lagrangian,
    split_form_residuals,
)
from gflab.experiments.base_experiment import BaseSuite

logger = logging.getLogger(__name__)

EXACT_CASES = 100
REFINEMENT_S = math.pi / 2


def smooth_test_field(grid: GridSpec, d: int) -> Field:
    """e^{2πix}e₁ + ½e^{−4πix}e₂ along the first axis."""
    x = grid.coordinates()[0]
    values = np.zeros(grid.shape + (d,), dtype=complex)
    values[..., 0] = np.exp(2j * np.pi * x)
    values[..., 1] = 0.5 * np.exp(-4j * np.pi * x)
    return Field(grid, values)


class GaugeSuite(BaseSuite):
    """Gauge multiplier forms, a_s against a(e^{is𝒫}·), refinement study and 𝓛_s"""

    name = "gauge"

    def execute(self) -> None:
        self._gauge_forms()
        self._forms()
        self._refinement()
        self._lagrangian()

    def _gauge_forms(self):
        p = self.p_field
        tol = self.config.tol_algebraic

        zero = gauge_field(p, 0.0)
        self.check("s0_vanishes", zero.sup_norm(), 0.0)

        sup_norms, alternative, split_excess = {}, 0.0, 0.0
        for s in self.config.s_samples:
            gauge = gauge_field(p, s)
            scale = 1.0 + gauge.sup_norm()
            sup_norms[f"{s:.17g}"] = gauge.sup_norm()
            for a, b in zip(gauge.components, gauge_field_alternative(p, s).components):
                alternative = max(alternative, float(np.max(operator_norm(a - b))) / scale)
            for deviation, bound in split_form_residuals(p, s):
                split_excess = max(split_excess, float(np.max(deviation - bound)) / scale)
        self.check("alternative_form", alternative, tol)
        self.check("split_form_bound", max(split_excess, 0.0), tol)

        at_pi = gauge_field(p, math.pi)
        self.result.details["sup_norm"] = sup_norms
        self.result.details["support_size_at_pi"] = len(at_pi.support())

    def _forms(self):
        p = self.p_field
        exact, identity_at_zero = 0.0, 0.0
        for _ in range(EXACT_CASES):
            f = Field.random(p.grid, p.d, self.rng)
            s = 2.0 * math.pi * self.rng.random()
            energy = form_a(f)
            exact = max(exact, abs(form_a_s_exact(p, s, f) - form_a(apply_exp_group(p, s, f))) / (1.0 + energy))
            identity_at_zero = max(identity_at_zero, abs(form_a_s(p, 0.0, f) - energy) / (1.0 + energy))
        self.check("form_a_s_exact", exact, self.config.tol_discretization, cases=EXACT_CASES)
        self.check("form_a_s.s0_identity", identity_at_zero, self.config.tol_algebraic, cases=EXACT_CASES)

    def _refinement(self):
        d = max(self.config.d, 2)
        spacings, errors = [], []
        for size in self.config.convergence_sizes:
            grid = GridSpec((size,))
            p = rotating_field(grid, d)
            f = smooth_test_field(grid, d)
            spacings.append(grid.h)
            errors.append(abs(form_a_s(p, REFINEMENT_S, f) - form_a(apply_exp_group(p, REFINEMENT_S, f))))
        self.convergence("form_a_s.rotating", spacings, errors, self.config.min_order)

    def _lagrangian(self):
        p = self.p_field
        f = Field.random(p.grid, p.d, self.rng)
        times = np.asarray(self.config.time_simulate)
        traj = Trajectory(times, tuple(evolve_schrodinger(f, t) for t in times))

        values, periodicity = {}, 0.0
        for s in self.config.s_samples:
            current = interaction_lagrangian(p, s, traj)
            shifted = interaction_lagrangian(p, s + 2.0 * math.pi, traj)
            values[f"{s:.17g}"] = current
            periodicity = max(periodicity, abs(shifted - current) / (1.0 + current))
        self.result.details["interaction_lagrangian"] = values
        self.check_flag("interaction_lagrangian.nonnegative", all(v >= 0.0 for v in values.values()))
        self.check("interaction_lagrangian.periodic", periodicity, self.config.tol_algebraic)
        self.check("interaction_lagrangian.s0_vanishes", interaction_lagrangian(p, 0.0, traj), 0.0)
