# experiments/base_experiment.py
import logging
import math
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

import numpy as np

from gflab.core.calculus import measured_order, pairwise_orders
from gflab.core.errors import ConfigError
from gflab.core.grid import ProjectionField
from gflab.core.presets import build_preset
from gflab.core.symmetry import Thresholds, Verdict
from gflab.experiments.config import ScenarioConfig

logger = logging.getLogger(__name__)


class CheckVerdict(Enum):
    """Outcome of a single check"""
    PASS = "pass"
    FAIL = "fail"
    INCONCLUSIVE = "inconclusive"


def json_number(x) -> Optional[float]:
    """Plain float for the report, None for NaN/inf."""
    if x is None:
        return None
    x = float(x)
    return x if math.isfinite(x) else None


def jsonable(value):
    """Recursively turn numpy scalars/arrays and tuples into JSON-ready values."""
    if isinstance(value, dict):
        return {str(k): jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return jsonable(value.tolist())
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        return json_number(value)
    if isinstance(value, (complex, np.complexfloating)):
        return {"real": json_number(value.real), "imag": json_number(value.imag)}
    if isinstance(value, Enum):
        return value.value
    return value


@dataclass
class CheckResult:
    """One named check: the residual, the tolerance it was judged by, and the verdict"""
    name: str
    verdict: CheckVerdict
    residual: Optional[float] = None
    tolerance: Optional[float] = None
    fail_threshold: Optional[float] = None   # set on three-way symmetry verdicts
    symmetry: bool = False                   # exempt from the exit status under expect_failure
    details: Dict[str, Any] = field(default_factory=dict)

    @property
    def failed(self) -> bool:
        return self.verdict is CheckVerdict.FAIL

    def to_dict(self) -> Dict[str, Any]:
        return {
            "name": self.name,
            "verdict": self.verdict.value,
            "residual": json_number(self.residual),
            "tolerance": json_number(self.tolerance),
            "fail_threshold": json_number(self.fail_threshold),
            "symmetry": self.symmetry,
            "details": jsonable(self.details),
        }


@dataclass
class ConvergenceTable:
    """Errors over a refinement sequence and the least-squares order"""
    name: str
    spacings: List[float]
    errors: List[float]
    required_order: float

    @property
    def order(self) -> float:
        return measured_order(self.spacings, self.errors)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "name": self.name,
            "rows": [{"h": float(h), "error": float(e)} for h, e in zip(self.spacings, self.errors)],
            "order": json_number(self.order),
            "pairwise_orders": [json_number(o) for o in pairwise_orders(self.spacings, self.errors)],
            "required_order": self.required_order,
        }


@dataclass
class SuiteResult:
    name: str
    checks: List[CheckResult] = field(default_factory=list)
    convergence: List[ConvergenceTable] = field(default_factory=list)
    details: Dict[str, Any] = field(default_factory=dict)
    artifacts: List[str] = field(default_factory=list)
    error: Optional[str] = None
    refused: bool = False   # suite declined the scenario (size guard); no checks ran
    elapsed: float = 0.0

    def to_dict(self) -> Dict[str, Any]:
        return {
            "checks": [c.to_dict() for c in sorted(self.checks, key=lambda c: c.name)],
            "convergence": [t.to_dict() for t in sorted(self.convergence, key=lambda t: t.name)],
            "details": jsonable(self.details),
            "error": self.error,
            "refused": self.refused,
        }


PRESET_STREAM = 0   # random stream reserved for the scenario preset


def load_preset(config: ScenarioConfig) -> ProjectionField:
    """The scenario's projection field; every suite sees the same one."""
    try:
        return build_preset(
            config.preset,
            config.grid,
            config.d,
            rng=config.rng(PRESET_STREAM),
            axis=config.preset_axis,
            rank=config.preset_rank,
            path=config.preset_file,
        )
    except FileNotFoundError as e:
        raise ConfigError(str(e), "preset.file") from e
    except ValueError as e:
        raise ConfigError(str(e), "preset.name") from e


_SYMMETRY_TO_CHECK = {
    Verdict.SYMMETRIC: CheckVerdict.PASS,
    Verdict.NOT_SYMMETRIC: CheckVerdict.FAIL,
    Verdict.INCONCLUSIVE: CheckVerdict.INCONCLUSIVE,
}


class BaseSuite(ABC):
    """
    Abstract base class for all experiment suites.

    A suite runs its checks against one ScenarioConfig with its own random
    stream and records results; it never decides the process exit status.
    """

    name: str = "base"

    def __init__(
        self,
        config: ScenarioConfig,
        rng: np.random.Generator,
        p_field: Optional[ProjectionField] = None,
        out_dir: Optional[Path] = None,
    ):
        self.config = config
        self.rng = rng
        self.p_field = p_field if p_field is not None else load_preset(config)
        self.out_dir = Path(out_dir) if out_dir is not None else Path(config.output_dir)
        self.result = SuiteResult(self.name)

    # ── Recording ─────────────────────────────────────────────────────────────
    def check(self, name: str, residual: float, tolerance: float, **details) -> CheckResult:
        """Pass iff residual ≤ tolerance."""
        residual = float(residual)
        verdict = CheckVerdict.PASS if residual <= tolerance else CheckVerdict.FAIL
        return self._record(CheckResult(f"{self.name}.{name}", verdict, residual, tolerance, details=details))

    def check_at_least(self, name: str, value: float, minimum: float, **details) -> CheckResult:
        """Pass iff value ≥ minimum (orders, separation margins)."""
        value = float(value)
        verdict = CheckVerdict.PASS if math.isfinite(value) and value >= minimum else CheckVerdict.FAIL
        details = {"bound": "lower", **details}
        return self._record(CheckResult(f"{self.name}.{name}", verdict, value, minimum, details=details))

    def check_flag(self, name: str, ok: bool, **details) -> CheckResult:
        verdict = CheckVerdict.PASS if ok else CheckVerdict.FAIL
        return self._record(CheckResult(f"{self.name}.{name}", verdict, details=details))

    def classify(self, name: str, verdict: Verdict, residual: float, thresholds: Thresholds, **details) -> CheckResult:
        """Three-way symmetry verdict; exempt from the exit status under --expect-failure."""
        result = CheckResult(
            f"{self.name}.{name}",
            _SYMMETRY_TO_CHECK[verdict],
            float(residual),
            thresholds.passing,
            thresholds.failing,
            symmetry=True,
            details={"symmetry_verdict": verdict.value, **details},
        )
        return self._record(result)

    def convergence(
        self, name: str, spacings: Sequence[float], errors: Sequence[float], required_order: float
    ) -> CheckResult:
        table = ConvergenceTable(f"{self.name}.{name}", list(spacings), list(errors), required_order)
        self.result.convergence.append(table)
        return self.check_at_least(f"{name}.order", table.order, required_order)

    def artifact(self, path: Path) -> Path:
        """Register a written file, relative to the output directory."""
        self.result.artifacts.append(Path(path).relative_to(self.out_dir).as_posix())
        return path

    def _record(self, result: CheckResult) -> CheckResult:
        self.result.checks.append(result)
        level = logging.INFO if result.verdict is CheckVerdict.PASS else logging.WARNING
        residual = f" residual={result.residual:.3e}" if result.residual is not None else ""
        logger.log(level, f"[{result.name}] {result.verdict.value}{residual}")
        return result

    # ── Execution ─────────────────────────────────────────────────────────────
    @abstractmethod
    def execute(self) -> None:
        """Run the suite's checks (implemented by subclasses)"""
        pass

    def run(self) -> SuiteResult:
        self.execute()
        return self.result
