# experiments/suites/simulate.py
"""Exact heat / Schrödinger evolution, trajectory dumps and the Lagrangian."""
import logging
import math

import numpy as np

from gflab.core.evolution import (
    apply_exp_group,
    apply_projection_field,
    evolve_heat,
    evolve_schrodinger,
    laplacian_symbol,
    leakage,
)
from gflab.core.grid import Field, GridSpec, Trajectory, form_a, inner, lagrangian
from gflab.core.presets import constant_field
from gflab.core.serialization import (
    read_trajectory,
    write_field,
    write_projection_field,
    write_trajectory,
)
from gflab.core.symmetry import interaction_lagrangian
from gflab.experiments.base_experiment import BaseSuite

logger = logging.getLogger(__name__)

EVOLUTION_GRID = (8, 8)
EVOLUTION_D = 2
PHASE_OMEGA = 1.0
PHASE_STEPS = 100
PHASE_SPAN = 0.1
PHASE_TOL = 1e-4


def plane_wave(grid: GridSpec, d: int, mode) -> Field:
    coords = grid.coordinates()
    values = np.zeros(grid.shape + (d,), dtype=complex)
    values[..., 0] = np.exp(2j * np.pi * sum(m * x for m, x in zip(mode, coords)))
    return Field(grid, values)


class SimulateSuite(BaseSuite):
    """Evolution exactness on a fixed grid and on the scenario, with CSV trajectories"""

    name = "simulate"

    def execute(self) -> None:
        self._exactness(GridSpec(EVOLUTION_GRID), EVOLUTION_D, "fixed")
        self._exactness(self.config.grid, self.config.d, "scenario")
        self._projection_group()
        self._trajectories()
        self._lagrangian()

    def _exactness(self, grid: GridSpec, d: int, label: str):
        tol = self.config.tol_algebraic
        times = [t for t in self.config.time_simulate if t > 0] or [0.01]
        t1, t2 = times[0], times[-1]

        semigroup, contraction, mean, unitarity, reversibility, commutation = (0.0,) * 6
        p = constant_field(grid, d)
        for _ in range(self.config.trials):
            f = Field.random(grid, d, self.rng)
            norm = f.norm()
            two_step = evolve_heat(evolve_heat(f, t1), t2)
            semigroup = max(semigroup, (two_step - evolve_heat(f, t1 + t2)).norm() / norm)
            contraction = max(contraction, evolve_heat(f, t2).norm() / norm - 1.0)
            axes = tuple(range(grid.n))
            drift = evolve_heat(f, t2).values.mean(axis=axes) - f.values.mean(axis=axes)
            mean = max(mean, float(np.max(np.abs(drift))))
            unitarity = max(unitarity, abs(evolve_schrodinger(f, t2).norm() - norm) / norm)
            back = evolve_schrodinger(evolve_schrodinger(f, t2), t2, sign=-1)
            reversibility = max(reversibility, (back - f).norm() / norm)
            commuted = evolve_heat(apply_projection_field(p, f), t2) - apply_projection_field(p, evolve_heat(f, t2))
            commutation = max(commutation, commuted.norm() / norm)

        self.check(f"{label}.semigroup_law", semigroup, tol)
        self.check(f"{label}.heat_contraction", max(contraction, 0.0), tol)
        self.check(f"{label}.heat_mean", mean, tol)
        self.check(f"{label}.schrodinger_unitary", unitarity, tol)
        self.check(f"{label}.schrodinger_reversible", reversibility, tol)
        self.check(f"{label}.constant_projection_commutes", commutation, tol)

        if label == "fixed":
            symbol = laplacian_symbol(grid)
            heat_modes, phase_modes = 0.0, 0.0
            for mode in np.ndindex(*grid.sizes):
                wave = plane_wave(grid, d, mode)
                heat_modes = max(heat_modes, (evolve_heat(wave, t2) - wave * np.exp(t2 * symbol[mode])).norm())
                phase = evolve_schrodinger(wave, t2) - wave * np.exp(1j * t2 * symbol[mode])
                phase_modes = max(phase_modes, phase.norm())
            self.check(f"{label}.heat_plane_waves", heat_modes, tol)
            self.check(f"{label}.schrodinger_plane_waves", phase_modes, tol)

    def _projection_group(self):
        p = self.p_field
        tol = self.config.tol_algebraic
        group, unitary, half_turn, idempotent, hermitian = (0.0,) * 5
        for _ in range(self.config.trials):
            f = Field.random(p.grid, p.d, self.rng)
            g = Field.random(p.grid, p.d, self.rng)
            norm = f.norm()
            s1, s2 = 2.0 * math.pi * self.rng.random(), 2.0 * math.pi * self.rng.random()
            composed = apply_exp_group(p, s1, apply_exp_group(p, s2, f))
            group = max(group, (composed - apply_exp_group(p, s1 + s2, f)).norm() / norm)
            unitary = max(unitary, abs(apply_exp_group(p, s1, f).norm() - norm) / norm)
            projected = apply_projection_field(p, f)
            half_turn = max(half_turn, (apply_exp_group(p, math.pi, f) - (f - 2.0 * projected)).norm() / norm)
            idempotent = max(idempotent, (apply_projection_field(p, projected) - projected).norm() / norm)
            sym = inner(projected, g) - inner(f, apply_projection_field(p, g))
            hermitian = max(hermitian, abs(sym) / (norm * g.norm()))
        self.check("exp_group.group_law", group, tol)
        self.check("exp_group.unitary", unitary, tol)
        self.check("exp_group.half_turn", half_turn, tol)
        self.check("projection.idempotent", idempotent, tol)
        self.check("projection.hermitian", hermitian, tol)

        f = Field.random(p.grid, p.d, self.rng)
        if apply_projection_field(p, f).norm() > 0:
            self.check("leakage.t0", leakage(p, f, [0.0])[0], 0.0)

    def _trajectories(self):
        p = self.p_field
        times = np.asarray(self.config.time_simulate)
        f = Field.random(p.grid, p.d, self.rng)
        heat = Trajectory(times, tuple(evolve_heat(f, t) for t in times))
        schrodinger = Trajectory(times, tuple(evolve_schrodinger(f, t) for t in times))

        folder = self.out_dir / "simulate"
        self.artifact(write_field(f, folder / "initial_field.csv"))
        self.artifact(write_projection_field(p, folder / "projection_field.csv"))
        self.artifact(write_trajectory(heat, folder / "heat_trajectory.csv"))
        self.artifact(write_trajectory(schrodinger, folder / "schrodinger_trajectory.csv"))

        reread = read_trajectory(folder / "heat_trajectory.csv")
        difference = max(float(np.max(np.abs(a.values - b.values))) for a, b in zip(reread.states, heat.states))
        difference = max(difference, float(np.max(np.abs(reread.times - heat.times))))
        self.check("trajectory_csv_round_trip", difference, 0.0)

        self.result.details["lagrangian"] = {
            "schrodinger": lagrangian(schrodinger),
            "interaction_at_pi": interaction_lagrangian(p, math.pi, schrodinger),
        }

    def _lagrangian(self):
        tol = self.config.tol_algebraic
        grid, d = self.config.grid, self.config.d
        phi = Field.random(grid, d, self.rng)

        times = np.linspace(0.0, PHASE_SPAN, PHASE_STEPS + 1)
        stationary = Trajectory(times, tuple(phi for _ in times))
        expected = PHASE_SPAN * form_a(phi)
        self.check("lagrangian.stationary", abs(lagrangian(stationary) - expected) / (1.0 + expected), tol)

        zero = Field.zeros(grid, d)
        self.check("lagrangian.zero_field", abs(lagrangian(Trajectory(times, tuple(zero for _ in times)))), 0.0)

        rotating = Trajectory(times, tuple(phi * np.exp(1j * PHASE_OMEGA * t) for t in times))
        kinetic = lagrangian(rotating) - expected
        closed_form = -PHASE_OMEGA * phi.norm() ** 2 * PHASE_SPAN
        self.check("lagrangian.phase_rotation", abs(kinetic.real - closed_form) / abs(closed_form), PHASE_TOL,
                   imaginary_part=kinetic.imag)
