# experiments/suites/locality.py
"""Brute-force localizability, block extraction and ideal subspaces."""
import logging

import numpy as np

from gflab.core.fiber import random_projection
from gflab.core.grid import Field, GridSpec, ProjectionField
from gflab.core.locality import (
    check_brute_force_size,
    even_part_projection,
    extract_blocks,
    ideal_family_projection,
    is_ideal_subspace_projection,
    is_localizable,
    lift,
    plant_offdiagonal_block,
)
from gflab.core.presets import rotating_field, step_field
from gflab.core.serialization import read_global_operator, write_global_operator
from gflab.experiments.base_experiment import BaseSuite

logger = logging.getLogger(__name__)

PLANTED_TRIALS = 200
PLANTED_BLOCK_NORM = 1e-6
PLANTED_GRID = (8,)
EVEN_PART_MIN_NORM = 0.4
IDEAL_GRID = (16,)
ROUND_TRIP_FIELDS = 100


def random_projection_field(grid: GridSpec, d: int, rng: np.random.Generator) -> ProjectionField:
    """Independent random projection in every cell (no smoothness)."""
    values = np.stack([random_projection(rng, d).op for _ in range(grid.num_cells)])
    return ProjectionField(grid, values.reshape(grid.shape + (d, d)))


class LocalitySuite(BaseSuite):
    """Localizable ⟺ strictly local, on the scenario grid and on planted counterexamples"""

    name = "locality"

    def execute(self) -> None:
        check_brute_force_size(self.config.grid, self.config.d)
        self._preset()
        self._even_part()
        self._planted()
        self._ideals()

    def _preset(self):
        p = self.p_field
        tol = self.config.tol_algebraic
        g = lift(p)
        verdict = is_localizable(g)
        self.check_flag("preset_localizable", verdict.localizable and verdict.agree,
                        worst_commutator_norm=verdict.worst_commutator_norm)

        extracted = extract_blocks(g)
        self.check("extract_lift_round_trip", extracted.sup_distance(p), tol)
        relifted = lift(extracted)
        self.check("lift_extract_round_trip", float(np.max(np.abs(relifted.matrix - g.matrix))), tol)

        application = 0.0
        for _ in range(ROUND_TRIP_FIELDS):
            f = Field.random(p.grid, p.d, self.rng)
            cellwise = f.with_values(np.einsum("...ij,...j->...i", extracted.values, f.values))
            application = max(application, (g.apply(f) - cellwise).norm() / f.norm())
        self.check("extracted_application", application, tol, cases=ROUND_TRIP_FIELDS)

        path = self.out_dir / "locality" / "preset_operator.csv"
        write_global_operator(g, path)
        self.artifact(path)
        reread = read_global_operator(path, g.grid, g.d)
        self.check("operator_csv_round_trip", float(np.max(np.abs(reread.matrix - g.matrix))), 0.0)

        ideal = is_ideal_subspace_projection(g, rng=self.rng)
        self.result.details["preset_ideal"] = {
            "is_ideal": ideal.is_ideal,
            "failing_cells": len(ideal.failing_cells),
        }

    def _even_part(self):
        grid = self.config.grid if max(self.config.grid.sizes) >= 4 else GridSpec((8,))
        g = even_part_projection(grid, self.config.d)
        idempotence, hermitian = g.projection_defects()
        self.check("even_part.is_projection", max(idempotence, hermitian), self.config.tol_algebraic)
        verdict = is_localizable(g)
        self.check_flag("even_part.rejected", not verdict.localizable and verdict.agree)
        self.check_at_least("even_part.commutator_norm", verdict.worst_commutator_norm, EVEN_PART_MIN_NORM)

    def _planted(self):
        grid, d = GridSpec(PLANTED_GRID), 2
        disagreements, missed, false_alarms = 0, 0, 0
        for trial in range(PLANTED_TRIALS):
            g = lift(random_projection_field(grid, d, self.rng))
            planted = trial % 2 == 1
            if planted:
                x, y = self.rng.choice(grid.num_cells, size=2, replace=False)
                g = plant_offdiagonal_block(g, int(x), int(y), PLANTED_BLOCK_NORM)
            verdict = is_localizable(g)
            disagreements += 0 if verdict.agree else 1
            if planted and verdict.localizable:
                missed += 1
            if not planted and not verdict.localizable:
                false_alarms += 1
        details = {"trials": PLANTED_TRIALS, "block_norm": PLANTED_BLOCK_NORM}
        self.check("planted.test_agreement", disagreements, 0, **details)
        self.check("planted.detection", missed + false_alarms, 0, missed=missed, false_alarms=false_alarms, **details)

    def _ideals(self):
        grid, d = GridSpec(IDEAL_GRID), 2
        step = ideal_family_projection(step_field(grid, d))
        self.check_flag("ideal.step_field", is_ideal_subspace_projection(step, rng=self.rng).is_ideal)

        rotating = is_ideal_subspace_projection(lift(rotating_field(grid, d)), rng=self.rng)
        self.check_flag("ideal.rotating_rejected", rotating.localizable and not rotating.is_ideal,
                        failing_cells=len(rotating.failing_cells))

        even = is_ideal_subspace_projection(even_part_projection(grid, d), rng=self.rng)
        self.check_flag("ideal.even_part_rejected", not even.localizable and not even.is_ideal)
