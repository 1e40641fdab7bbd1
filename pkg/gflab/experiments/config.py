# experiments/config.py
"""
Scenario configuration.

A scenario file is YAML, written either with flat dotted keys
(``grid.sizes: [64]``) or as the equivalent nested mapping. Every key has a
default; CLI flags override the file. Diagnostics name the offending key and
the line it was found on.
"""
import logging
import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Dict, Optional, Tuple, Union

import numpy as np
import yaml

from gflab.core.errors import ConfigError
from gflab.core.grid import MAX_DIMS, GridSpec
from gflab.core.presets import PRESET_NAMES
from gflab.core.symmetry import Thresholds
from gflab.experiments.schema_validator import get_validator

logger = logging.getLogger(__name__)

DEFAULTS: Dict[str, Any] = {
    "grid.n": None,                      # derived from grid.sizes
    "grid.sizes": [64],
    "fiber.d": 2,
    "preset.name": "constant",
    "preset.file": None,
    "preset.axis": 0,
    "preset.rank": None,
    "symmetry.s_samples": [math.pi / 4, math.pi / 2, math.pi],
    "time.grid": [0.01, 0.1, 1.0],
    "time.simulate": [0.0, 0.0025, 0.005, 0.0075, 0.01],
    "trials": 8,
    "seed": 42,
    "tolerances.algebraic": 1e-12,
    "tolerances.discretization": 1e-11,
    "tolerances.pass": 1e-8,
    "tolerances.fail": 1e-3,
    "tolerances.const": 1e-8,
    "convergence.sizes": [16, 32, 64],
    "convergence.min_order": 0.9,
    "output.dir": "results",
    "output.report": "report.json",
    "expect_failure": False,
}
FLOAT_PREFIXES = ("tolerances.", "convergence.min_order")


@dataclass(frozen=True)
class ScenarioConfig:
    """Typed scenario, one field per config key."""
    sizes: Tuple[int, ...] = (64,)
    d: int = 2
    preset: str = "constant"
    preset_file: Optional[str] = None
    preset_axis: int = 0
    preset_rank: Optional[int] = None
    s_samples: Tuple[float, ...] = (math.pi / 4, math.pi / 2, math.pi)
    time_grid: Tuple[float, ...] = (0.01, 0.1, 1.0)
    time_simulate: Tuple[float, ...] = (0.0, 0.0025, 0.005, 0.0075, 0.01)
    trials: int = 8
    seed: int = 42
    tol_algebraic: float = 1e-12
    tol_discretization: float = 1e-11
    tol_pass: float = 1e-8
    tol_fail: float = 1e-3
    tol_const: float = 1e-8
    convergence_sizes: Tuple[int, ...] = (16, 32, 64)
    min_order: float = 0.9
    output_dir: str = "results"
    report_name: str = "report.json"
    expect_failure: bool = False
    source: Optional[str] = field(default=None, compare=False)

    def __post_init__(self):
        for name in ("sizes", "s_samples", "time_grid", "time_simulate", "convergence_sizes"):
            object.__setattr__(self, name, tuple(getattr(self, name)))
        self._validate()

    def _validate(self):
        try:
            grid = self.grid
        except ValueError as e:
            raise ConfigError(str(e), "grid.sizes") from e
        if self.d < 1:
            raise ConfigError("fiber dimension must be at least 1", "fiber.d")
        if self.preset not in PRESET_NAMES:
            raise ConfigError(f"unknown preset '{self.preset}', expected one of {PRESET_NAMES}", "preset.name")
        if not 0 <= self.preset_axis < grid.n:
            raise ConfigError(f"axis {self.preset_axis} outside a {grid.n}-D grid", "preset.axis")
        if self.preset == "rotating" and self.d < 2:
            raise ConfigError("rotating preset needs fiber.d ≥ 2", "fiber.d")
        if self.preset_rank is not None and not 0 <= self.preset_rank <= self.d:
            raise ConfigError(f"rank {self.preset_rank} outside 0..{self.d}", "preset.rank")
        if self.preset == "from-file":
            if not self.preset_file:
                raise ConfigError("preset 'from-file' needs preset.file", "preset.file")
            if not Path(self.preset_file).exists():
                raise ConfigError(f"projection field file not found: {self.preset_file}", "preset.file")
        if self.trials < 1:
            raise ConfigError("trials must be at least 1", "trials")
        if not self.tol_pass < self.tol_fail:
            raise ConfigError("tolerances.pass must be below tolerances.fail", "tolerances.pass")
        if any(t < 0 for t in self.time_grid):
            raise ConfigError("time grid must be nonnegative", "time.grid")
        if len(self.time_simulate) < 2 or np.any(np.diff(self.time_simulate) <= 0):
            raise ConfigError("simulation times must be at least 2 strictly increasing values", "time.simulate")
        if len(self.convergence_sizes) < 2 or any(s < 2 for s in self.convergence_sizes):
            raise ConfigError("refinement study needs at least 2 grid sizes ≥ 2", "convergence.sizes")

    @property
    def grid(self) -> GridSpec:
        return GridSpec(self.sizes)

    @property
    def thresholds(self) -> Thresholds:
        return Thresholds(self.tol_pass, self.tol_fail)

    @property
    def report_path(self) -> Path:
        return Path(self.output_dir) / self.report_name

    def rng(self, stream: int) -> np.random.Generator:
        """PCG64 stream for one suite; independent of thread scheduling."""
        return np.random.default_rng([self.seed, stream])

    def with_overrides(self, **overrides) -> "ScenarioConfig":
        """CLI flags win over the file; None means 'not given'."""
        given = {k: v for k, v in overrides.items() if v is not None}
        return replace(self, **given) if given else self

    def to_dict(self) -> Dict[str, Any]:
        """Flat dotted-key echo, the same keys a scenario file uses."""
        return {
            "grid.n": len(self.sizes),
            "grid.sizes": list(self.sizes),
            "fiber.d": self.d,
            "preset.name": self.preset,
            "preset.file": self.preset_file,
            "preset.axis": self.preset_axis,
            "preset.rank": self.preset_rank,
            "symmetry.s_samples": list(self.s_samples),
            "time.grid": list(self.time_grid),
            "time.simulate": list(self.time_simulate),
            "trials": self.trials,
            "seed": self.seed,
            "tolerances.algebraic": self.tol_algebraic,
            "tolerances.discretization": self.tol_discretization,
            "tolerances.pass": self.tol_pass,
            "tolerances.fail": self.tol_fail,
            "tolerances.const": self.tol_const,
            "convergence.sizes": list(self.convergence_sizes),
            "convergence.min_order": self.min_order,
            "output.dir": self.output_dir,
            "output.report": self.report_name,
            "expect_failure": self.expect_failure,
        }


# ── YAML loading ──────────────────────────────────────────────────────────────

def _flatten(node: yaml.Node, prefix: str, flat: Dict[str, Any], lines: Dict[str, int]):
    for key_node, value_node in node.value:
        key = f"{prefix}{key_node.value}"
        if isinstance(value_node, yaml.MappingNode):
            _flatten(value_node, f"{key}.", flat, lines)
            continue
        if key in flat:
            raise ConfigError("duplicate key", key, key_node.start_mark.line + 1)
        value = yaml.safe_load(yaml.serialize(value_node))
        if isinstance(value, str) and key.startswith(FLOAT_PREFIXES):
            # YAML 1.1 reads 1e-12 (no dot) as a string
            try:
                value = float(value)
            except ValueError:
                pass
        flat[key] = value
        lines[key] = key_node.start_mark.line + 1


def parse_config_text(text: str) -> Tuple[Dict[str, Any], Dict[str, int]]:
    """Flat key → value and key → 1-based line maps for a YAML scenario."""
    try:
        root = yaml.compose(text, Loader=yaml.SafeLoader)
    except yaml.YAMLError as e:
        mark = getattr(e, "problem_mark", None)
        raise ConfigError(f"malformed YAML: {getattr(e, 'problem', e)}", line=mark.line + 1 if mark else None) from e
    flat: Dict[str, Any] = {}
    lines: Dict[str, int] = {}
    if root is None:
        return flat, lines
    if not isinstance(root, yaml.MappingNode):
        raise ConfigError("scenario file must be a mapping", line=root.start_mark.line + 1)
    _flatten(root, "", flat, lines)
    return flat, lines


def _schema_check(flat: Dict[str, Any], lines: Dict[str, int]):
    errors = get_validator().config_errors(flat)
    if not errors:
        return
    first = errors[0]
    if first.validator == "additionalProperties":
        unknown = sorted(set(flat) - set(DEFAULTS))
        key = unknown[0] if unknown else None
        raise ConfigError("unknown key", key, lines.get(key))
    key = str(first.absolute_path[0]) if first.absolute_path else None
    raise ConfigError(first.message, key, lines.get(key))


def config_from_mapping(
    flat: Dict[str, Any],
    lines: Optional[Dict[str, int]] = None,
    source: Optional[str] = None,
) -> ScenarioConfig:
    lines = lines or {}
    _schema_check(flat, lines)
    merged = {**DEFAULTS, **flat}

    sizes = merged["grid.sizes"]
    sizes = [sizes] if isinstance(sizes, int) else list(sizes)
    n = merged["grid.n"]
    if n is not None:
        if not 1 <= n <= MAX_DIMS:
            raise ConfigError(f"grid dimension must be 1..{MAX_DIMS}", "grid.n", lines.get("grid.n"))
        if len(sizes) == 1:
            sizes = sizes * n
        elif len(sizes) != n:
            raise ConfigError(f"{len(sizes)} sizes for a {n}-D grid", "grid.sizes", lines.get("grid.sizes"))

    try:
        return ScenarioConfig(
            sizes=tuple(sizes),
            d=merged["fiber.d"],
            preset=merged["preset.name"],
            preset_file=merged["preset.file"],
            preset_axis=merged["preset.axis"],
            preset_rank=merged["preset.rank"],
            s_samples=tuple(float(s) for s in merged["symmetry.s_samples"]),
            time_grid=tuple(float(t) for t in merged["time.grid"]),
            time_simulate=tuple(float(t) for t in merged["time.simulate"]),
            trials=merged["trials"],
            seed=merged["seed"],
            tol_algebraic=float(merged["tolerances.algebraic"]),
            tol_discretization=float(merged["tolerances.discretization"]),
            tol_pass=float(merged["tolerances.pass"]),
            tol_fail=float(merged["tolerances.fail"]),
            tol_const=float(merged["tolerances.const"]),
            convergence_sizes=tuple(merged["convergence.sizes"]),
            min_order=float(merged["convergence.min_order"]),
            output_dir=str(merged["output.dir"]),
            report_name=str(merged["output.report"]),
            expect_failure=bool(merged["expect_failure"]),
            source=source,
        )
    except ConfigError as e:
        if e.line is None and e.field in lines:
            raise ConfigError(e.message, e.field, lines[e.field]) from e
        raise


def load_config(path: Union[str, Path, None] = None) -> ScenarioConfig:
    """Load a scenario file; no path means all defaults."""
    if path is None:
        return config_from_mapping({})
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    flat, lines = parse_config_text(path.read_text(encoding="utf-8"))
    config = config_from_mapping(flat, lines, source=str(path))
    logger.info(f"✅ Loaded scenario {path} (preset '{config.preset}', grid {config.sizes}, d={config.d})")
    return config
