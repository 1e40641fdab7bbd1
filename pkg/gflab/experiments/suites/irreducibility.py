# experiments/suites/irreducibility.py
"""The heat semigroup is irreducible iff the fiber is one-dimensional."""
import logging

from gflab.core.evolution import SUPPORT_THRESHOLD
from gflab.core.grid import GridSpec
from gflab.core.symmetry import GAUGE_TOL, irreducibility_scan
from gflab.experiments.base_experiment import BaseSuite

logger = logging.getLogger(__name__)

SCAN_TIME = 0.01
EXHAUSTIVE_GRID = (12,)
VECTOR_GRID = (16,)


class IrreducibilitySuite(BaseSuite):
    """Invariant ideals for d ≥ 2, mass escaping every cell subset for d = 1"""

    name = "irreducibility"

    def execute(self) -> None:
        positive_times = [t for t in self.config.time_grid if t > 0]
        t = min(positive_times) if positive_times else SCAN_TIME

        scenario = irreducibility_scan(self.config.grid, self.config.d, t, self.rng, trials=self.config.trials)
        self.result.details["scenario"] = scenario.to_dict()
        self.check_flag(
            "scenario_verdict",
            scenario.irreducible == (self.config.d == 1),
            d=self.config.d,
            verdict="irreducible" if scenario.irreducible else "not irreducible",
        )

        vector = irreducibility_scan(GridSpec(VECTOR_GRID), 2, SCAN_TIME, self.rng, trials=self.config.trials)
        self.result.details["vector"] = vector.to_dict()
        self.check_flag("vector.reducible", not vector.irreducible and (1,) in vector.witnesses,
                        witnesses=[list(w) for w in vector.witnesses])
        self.check("vector.witness_leakage", vector.worst_witness_leakage, GAUGE_TOL)
        self.check("vector.schrodinger_witness_leakage", vector.schrodinger_leakage, GAUGE_TOL)
        self.check_flag("vector.full_support", bool(vector.support_complete))

        scalar = irreducibility_scan(GridSpec(EXHAUSTIVE_GRID), 1, SCAN_TIME, self.rng)
        self.result.details["scalar"] = scalar.to_dict()
        self.check_flag("scalar.irreducible", scalar.irreducible and scalar.exhaustive,
                        subsets=scalar.subsets_checked)
        self.check_at_least("scalar.outside_mass", scalar.min_outside_mass, SUPPORT_THRESHOLD)
        self.check_at_least("scalar.schrodinger_outside_mass", scalar.schrodinger_leakage, SUPPORT_THRESHOLD)
        self.check_flag("scalar.positivity", scalar.positivity_min > 0.0, min_value=scalar.positivity_min)
