import numpy as np
import pytest
from unittest.mock import MagicMock

from gflab.core.grid import GridSpec
from gflab.core.presets import constant_field, rotating_field, step_field
from gflab.experiments.config import ScenarioConfig


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def line_grid():
    return GridSpec((16,))


@pytest.fixture
def fine_grid():
    return GridSpec((64,))


@pytest.fixture
def plane_grid():
    return GridSpec((8, 8))


@pytest.fixture
def constant_p(line_grid):
    return constant_field(line_grid, 2)


@pytest.fixture
def rotating_p(fine_grid):
    return rotating_field(fine_grid, 2)


@pytest.fixture
def step_p(fine_grid):
    return step_field(fine_grid, 2)


@pytest.fixture
def small_config(tmp_path):
    # Small enough for every suite to run in seconds
    return ScenarioConfig(
        sizes=(16,),
        d=2,
        preset="constant",
        trials=2,
        convergence_sizes=(16, 32, 64),
        output_dir=str(tmp_path / "results"),
    )


@pytest.fixture
def mock_schema_validator(mocker):
    # Report validation always succeeds; config validation finds nothing
    mock_gv = mocker.patch("orchestrator.get_validator")
    mock_instance = MagicMock()
    mock_instance.validate_report.return_value = True
    mock_instance.config_errors.return_value = []
    mock_gv.return_value = mock_instance
    return mock_instance
