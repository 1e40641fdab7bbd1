# experiments/suites/invariance.py
"""Invariance of range 𝒫 under the heat semigroup and the locally-constant necessary condition."""
import logging
import math

from gflab.core.symmetry import (
    Verdict,
    check_global_symmetry,
    check_invariance_criterion,
    necessary_condition_experiment,
)
from gflab.experiments.base_experiment import BaseSuite

logger = logging.getLogger(__name__)

AGREEMENT_FACTOR = 10.0
AGREEMENT_FLOOR = 1e-10


class InvarianceSuite(BaseSuite):
    """Criteria (a), (b), (c) on the scenario preset, global symmetry and local constancy"""

    name = "invariance"

    def execute(self) -> None:
        config = self.config
        thresholds = config.thresholds
        report = check_invariance_criterion(
            self.p_field, config.trials, self.rng, config.s_samples, config.time_grid, thresholds,
        )
        self.result.details["criterion"] = report.to_dict()

        self.classify("criterion_b", report.criterion_b_verdict, report.criterion_b_residual, thresholds)
        residual_c = report.criterion_c_residuals[math.pi]
        self.classify("criterion_c", report.criterion_c_verdict, residual_c, thresholds, s=math.pi)
        self.classify("leakage", report.leakage_verdict, report.max_leakage, thresholds, times=list(config.time_grid))
        self.check_flag(
            "verdicts_agree",
            report.verdicts_agree,
            leakage=report.leakage_verdict.value,
            criterion_b=report.criterion_b_verdict.value,
            criterion_c=report.criterion_c_verdict.value,
        )

        b, c = report.criterion_b_residual, residual_c
        both_small = b <= AGREEMENT_FLOOR and c <= AGREEMENT_FLOOR
        ratio = max(b, c) / min(b, c) if min(b, c) > 0 else math.inf
        self.check_flag("criterion_b_c_within_factor", both_small or ratio <= AGREEMENT_FACTOR, ratio=ratio)

        global_symmetry = check_global_symmetry(
            self.p_field, config.trials, self.rng, config.s_samples, thresholds.passing
        )
        consistent = global_symmetry.symmetric == (report.criterion_c_verdict is Verdict.SYMMETRIC)
        self.check_flag("global_symmetry_consistent", consistent or report.criterion_c_verdict is Verdict.INCONCLUSIVE,
                        symmetric=global_symmetry.symmetric, residual=global_symmetry.residual)

        necessary = necessary_condition_experiment(
            self.p_field, config.trials, self.rng, eps=config.tol_const, thresholds=thresholds,
        )
        self.result.details["necessary_condition"] = necessary.to_dict()
        self.check_flag(
            "locally_constant_consistent",
            necessary.consistent,
            gauge_sup_norm=necessary.gauge_sup_norm,
            components=necessary.partition.num_components,
        )
        if necessary.criterion_verdict is Verdict.SYMMETRIC:
            self.check_flag("symmetric_implies_constant", necessary.gauge_vanishes and necessary.single_component)
