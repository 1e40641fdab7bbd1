from .base_experiment import BaseSuite, CheckResult, CheckVerdict, SuiteResult
from .config import ScenarioConfig, load_config
from .schema_validator import get_validator

__all__ = [
    "BaseSuite",
    "CheckResult",
    "CheckVerdict",
    "ScenarioConfig",
    "SuiteResult",
    "get_validator",
    "load_config",
]
