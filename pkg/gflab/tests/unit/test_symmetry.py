import math

import numpy as np
import pytest

from gflab.core.errors import GridMismatchError, TrajectoryError
from gflab.core.evolution import apply_exp_group, evolve_schrodinger
from gflab.core.grid import Field, GridSpec, Trajectory, form_a
from gflab.core.presets import (
    constant_field,
    identity_field,
    random_smooth_field,
    rotating_field,
    step_field,
    zero_field,
)
from gflab.core.symmetry import (
    PartitionLabel,
    Thresholds,
    Verdict,
    adjacent_distances,
    check_global_symmetry,
    check_invariance_criterion,
    combine,
    covariant_derivative,
    criterion_ensemble,
    detect_locally_constant,
    form_a_s,
    form_a_s_exact,
    form_group_expansion,
    fourier_mode_fields,
    gauge_field,
    gauge_field_alternative,
    gauge_field_split,
    heat_kernel_matrix,
    interaction_lagrangian,
    irreducibility_scan,
    necessary_condition_experiment,
    split_form_residuals,
)


class TestVerdicts:
    def test_thresholds(self):
        thresholds = Thresholds(1e-8, 1e-3)
        assert thresholds.classify(1e-12) is Verdict.SYMMETRIC
        assert thresholds.classify(1e-8) is Verdict.SYMMETRIC
        assert thresholds.classify(1e-5) is Verdict.INCONCLUSIVE
        assert thresholds.classify(1e-3) is Verdict.NOT_SYMMETRIC

    def test_combine(self):
        assert combine([Verdict.SYMMETRIC, Verdict.SYMMETRIC]) is Verdict.SYMMETRIC
        assert combine([Verdict.SYMMETRIC, Verdict.INCONCLUSIVE]) is Verdict.INCONCLUSIVE
        assert combine([Verdict.INCONCLUSIVE, Verdict.NOT_SYMMETRIC]) is Verdict.NOT_SYMMETRIC


class TestEnsemble:
    def test_fourier_modes(self, plane_grid):
        assert len(fourier_mode_fields(plane_grid, 3)) == 2 * 3 * 2

    def test_closed_under_quarter_turn(self, constant_p, rng):
        ensemble = criterion_ensemble(constant_p, 3, rng)
        base = len(fourier_mode_fields(constant_p.grid, 2)) + 3
        assert len(ensemble) == 2 * base
        turned = apply_exp_group(constant_p, math.pi / 2, ensemble[0])
        assert np.allclose(turned.values, ensemble[base].values)


class TestInvarianceCriterion:
    def test_constant_is_symmetric(self, rng):
        report = check_invariance_criterion(constant_field(GridSpec((64,)), 2), trials=2, rng=rng)
        assert report.verdict is Verdict.SYMMETRIC
        assert report.verdicts_agree
        assert report.criterion_b_residual <= 1e-10
        assert max(report.criterion_c_residuals.values()) <= 1e-10
        assert report.max_leakage <= 1e-10

    def test_rotating_is_not_symmetric(self, rotating_p, rng):
        report = check_invariance_criterion(rotating_p, trials=2, rng=rng)
        assert report.verdict is Verdict.NOT_SYMMETRIC
        assert report.verdicts_agree
        assert report.criterion_b_residual >= 1e-3
        assert report.criterion_c_residuals[math.pi] >= 1e-3
        assert report.max_leakage >= 1e-3

    def test_step_is_not_symmetric(self, step_p, rng):
        report = check_invariance_criterion(step_p, trials=2, rng=rng)
        assert report.verdict is Verdict.NOT_SYMMETRIC
        assert report.verdicts_agree

    def test_pi_is_always_sampled(self, constant_p, rng):
        report = check_invariance_criterion(constant_p, trials=1, rng=rng, s_samples=[0.5])
        assert set(report.criterion_c_residuals) == {0.5, math.pi}

    def test_report_dict(self, constant_p, rng):
        data = check_invariance_criterion(constant_p, trials=1, rng=rng).to_dict()
        assert data["verdict"] == "symmetric"
        assert data["regularity"] == [0.0]

    def test_inconclusive_logs_warning(self, rng, caplog):
        p = rotating_field(GridSpec((16,)), 2)
        report = check_invariance_criterion(p, trials=1, rng=rng, thresholds=Thresholds(1e-12, 1e6))
        assert report.verdict is Verdict.INCONCLUSIVE
        assert "inconclusive" in caplog.text

    def test_trials_must_be_positive(self, constant_p):
        with pytest.raises(ValueError):
            check_invariance_criterion(constant_p, trials=0)

    def test_global_symmetry(self, constant_p, rotating_p, rng):
        assert check_global_symmetry(constant_p, trials=2, rng=rng)
        assert not check_global_symmetry(rotating_p, trials=2, rng=rng)


    def test_criteria_agree_on_random_smooth_fields(self, fine_grid):
        rng = np.random.default_rng(2024)
        ratios = []
        for _ in range(50):
            p = random_smooth_field(fine_grid, 2, rng)
            report = check_invariance_criterion(p, trials=4, rng=rng)
            assert report.verdicts_agree, report.to_dict()
            ratios.append(report.criterion_b_residual / report.criterion_c_residuals[math.pi])
        assert 0.1 <= min(ratios) and max(ratios) <= 10.0


class TestFormExpansion:
    def test_matches_direct_evaluation(self, rotating_p, rng):
        psi = Field.random(rotating_p.grid, 2, rng)
        for s in (0.3, math.pi / 2, math.pi):
            direct = form_a(apply_exp_group(rotating_p, s, psi))
            assert form_group_expansion(rotating_p, s, psi) == pytest.approx(direct, rel=1e-11)


class TestGaugeField:
    def test_vanishes_at_zero(self, rotating_p):
        assert gauge_field(rotating_p, 0.0).sup_norm() == 0.0

    def test_vanishes_for_constant(self, constant_p):
        assert gauge_field(constant_p, math.pi).sup_norm() == 0.0
        assert gauge_field(constant_p, math.pi).support() == []

    def test_rotating_closed_form(self, rotating_p):
        h = rotating_p.grid.h
        expected = 2 * math.sin(2 * math.pi * h) / h
        assert gauge_field(rotating_p, math.pi).sup_norm() == pytest.approx(expected, rel=1e-10)

    def test_step_concentrates_on_interfaces(self):
        p = step_field(GridSpec((16,)), 2)
        gauge = gauge_field(p, math.pi)
        assert gauge.support() == [(7,), (15,)]
        assert gauge.sup_norm() == pytest.approx(2 * 16)

    def test_alternative_form_agrees(self, rotating_p):
        for s in (0.4, math.pi):
            for a, b in zip(gauge_field(rotating_p, s).components, gauge_field_alternative(rotating_p, s).components):
                assert np.allclose(a, b, atol=1e-12)

    def test_split_form_within_bound(self, rotating_p):
        for deviation, bound in split_form_residuals(rotating_p, 1.3):
            assert np.all(deviation <= bound + 1e-12)

    def test_split_form_differs_on_step_interfaces(self):
        p = step_field(GridSpec((16,)), 2)
        (full,), (split,) = gauge_field(p, 2.0).components, gauge_field_split(p, 2.0).components
        deviation = np.linalg.norm(full - split, ord=2, axis=(-2, -1))
        assert np.flatnonzero(deviation > 1e-12).tolist() == [7, 15]
        for bounded, bound in split_form_residuals(p, 2.0):
            assert np.all(bounded <= bound + 1e-12)


class TestCovariantForms:
    def test_s0_is_plain_form(self, rotating_p, rng):
        f = Field.random(rotating_p.grid, 2, rng)
        assert form_a_s(rotating_p, 0.0, f) == pytest.approx(form_a(f), rel=1e-12)

    def test_exact_variant_matches_group_action(self, rng):
        p = rotating_field(GridSpec((32,)), 2)
        for _ in range(10):
            f = Field.random(p.grid, 2, rng)
            s = 2 * math.pi * rng.random()
            assert form_a_s_exact(p, s, f) == pytest.approx(form_a(apply_exp_group(p, s, f)), rel=1e-11)

    def test_continuum_variant_converges(self):
        errors = []
        for size in (16, 32, 64):
            grid = GridSpec((size,))
            p = rotating_field(grid, 2)
            x = grid.coordinates()[0]
            values = np.zeros((size, 2), dtype=complex)
            values[:, 0] = np.exp(2j * np.pi * x)
            values[:, 1] = 0.5 * np.exp(-4j * np.pi * x)
            f = Field(grid, values)
            errors.append(abs(form_a_s(p, math.pi / 2, f) - form_a(apply_exp_group(p, math.pi / 2, f))))
        assert errors[0] > errors[1] > errors[2]

    def test_covariant_derivative_grid_mismatch(self, rotating_p, line_grid):
        with pytest.raises(GridMismatchError):
            covariant_derivative(rotating_p, 1.0, Field.zeros(line_grid, 2))


class TestInteractionLagrangian:
    def make_trajectory(self, p, rng):
        f = Field.random(p.grid, p.d, rng)
        times = np.linspace(0.0, 0.01, 5)
        return Trajectory(times, tuple(evolve_schrodinger(f, t) for t in times))

    def test_needs_two_samples(self, rotating_p, rng):
        f = Field.random(rotating_p.grid, 2, rng)
        with pytest.raises(TrajectoryError):
            interaction_lagrangian(rotating_p, 1.0, Trajectory([0.0], (f,)))

    def test_vanishes_for_constant(self, constant_p, rng):
        assert interaction_lagrangian(constant_p, math.pi, self.make_trajectory(constant_p, rng)) == 0.0

    def test_positive_and_periodic(self, rotating_p, rng):
        traj = self.make_trajectory(rotating_p, rng)
        value = interaction_lagrangian(rotating_p, 1.0, traj)
        assert value > 0.0
        assert interaction_lagrangian(rotating_p, 1.0 + 2 * math.pi, traj) == pytest.approx(value, rel=1e-12)


class TestLocalConstancy:
    def test_constant_single_component(self, constant_p):
        partition = detect_locally_constant(constant_p)
        assert partition.num_components == 1
        assert partition.labels == (PartitionLabel.COORDINATE_IDEAL,)
        assert partition.residual == 0.0

    def test_step_two_components(self, step_p):
        partition = detect_locally_constant(step_p)
        assert partition.num_components == 2
        assert partition.component_sizes() == [32, 32]
        assert all(label is PartitionLabel.COORDINATE_IDEAL for label in partition.labels)

    def test_rotating_every_cell_apart(self, rotating_p):
        assert detect_locally_constant(rotating_p, eps=1e-8).num_components == 64

    def test_adjacent_distance_rotating(self, rotating_p):
        (distances,) = adjacent_distances(rotating_p)
        assert np.allclose(distances, math.sin(2 * math.pi / 64))

    def test_identity_and_zero_labels(self, line_grid):
        assert detect_locally_constant(identity_field(line_grid, 2)).labels == (PartitionLabel.IDENTITY,)
        assert detect_locally_constant(zero_field(line_grid, 2)).labels == (PartitionLabel.ZERO,)

    def test_plane_step(self):
        partition = detect_locally_constant(step_field(GridSpec((8, 8)), 2, axis=1))
        assert partition.num_components == 2

    def test_eps_must_be_positive(self, constant_p):
        with pytest.raises(ValueError):
            detect_locally_constant(constant_p, eps=0.0)


class TestNecessaryCondition:
    def test_constant(self, constant_p, rng):
        report = necessary_condition_experiment(constant_p, trials=2, rng=rng)
        assert report.gauge_vanishes and report.single_component and report.constant
        assert report.consistent
        assert report.criterion_verdict is Verdict.SYMMETRIC

    def test_rotating(self, rotating_p, rng):
        report = necessary_condition_experiment(rotating_p, trials=2, rng=rng)
        assert report.consistent
        assert not report.gauge_vanishes
        assert report.partition.num_components == 64
        assert report.criterion_verdict is Verdict.NOT_SYMMETRIC

    def test_step(self, rng):
        report = necessary_condition_experiment(step_field(GridSpec((16,)), 2), trials=2, rng=rng)
        assert report.consistent
        assert len(report.gauge_support) == 2
        assert report.to_dict()["partition"]["num_components"] == 2


class TestIrreducibility:
    def test_vector_fiber_is_reducible(self, line_grid, rng):
        report = irreducibility_scan(line_grid, 2, 0.01, rng)
        assert not report.irreducible
        assert report.witnesses == [(1,), (2,)]
        assert report.worst_witness_leakage <= 1e-10
        assert report.schrodinger_leakage <= 1e-10
        assert report.support_complete

    def test_scalar_fiber_is_irreducible(self, rng):
        report = irreducibility_scan(GridSpec((8,)), 1, 0.01, rng)
        assert report.irreducible
        assert report.exhaustive
        assert report.subsets_checked == 2**8 - 2
        assert report.min_outside_mass > 1e-13
        assert report.schrodinger_leakage > 1e-13
        assert report.positivity_min > 0.0

    def test_large_scalar_grid_is_sampled(self, rng):
        report = irreducibility_scan(GridSpec((16,)), 1, 0.01, rng, random_subsets=20)
        assert not report.exhaustive
        assert report.subsets_checked == 16 + 20
        assert report.irreducible

    def test_report_dict(self, line_grid, rng):
        data = irreducibility_scan(line_grid, 3, 0.01, rng).to_dict()
        assert data["verdict"] == "not irreducible"
        assert data["subsets_checked"] == 6
        assert data["schrodinger_leakage"] <= 1e-10

    def test_rejects_bad_arguments(self, line_grid):
        with pytest.raises(ValueError):
            irreducibility_scan(line_grid, 0, 0.01)
        with pytest.raises(ValueError):
            irreducibility_scan(line_grid, 1, 0.0)

    def test_schrodinger_row_matches_direct_evolution(self, rng):
        grid = GridSpec((6,))
        report = irreducibility_scan(grid, 1, 0.01, rng)
        delta = np.zeros(grid.shape + (1,))
        delta[0] = 1.0
        evolved = evolve_schrodinger(Field(grid, delta), 0.01)
        # a single cell is one of the scanned subsets; its escaped mass bounds the minimum
        single = float(np.sqrt(np.sum(np.abs(evolved.values[1:]) ** 2)))
        assert 0.0 < report.schrodinger_leakage <= single + 1e-12

    def test_heat_kernel_conserves_mass(self):
        kernel = heat_kernel_matrix(GridSpec((8,)), 0.01)
        assert np.allclose(kernel.sum(axis=0), 1.0)
        assert np.allclose(kernel, kernel.T)
