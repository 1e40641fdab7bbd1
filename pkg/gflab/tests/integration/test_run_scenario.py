import json
from pathlib import Path

import pytest

import orchestrator
from gflab.experiments.config import load_config
from gflab.experiments.schema_validator import get_validator

pytestmark = pytest.mark.integration

CONFIG_DIR = Path(__file__).resolve().parents[3] / "configs"


def comparable(report):
    """Report without the parts that legitimately differ between runs."""
    report = json.loads(json.dumps(report))
    report.pop("timing")
    report["config"].pop("output.dir")
    return report


class TestConstantScenario:
    def test_everything_passes(self, small_config):
        report = orchestrator.run_scenario(small_config)
        assert report["summary"]["exit_status"] == 0
        assert set(report["suites"]) == set(orchestrator.SUITE_NAMES)
        assert all(s["error"] is None for s in report["suites"].values())

    def test_report_and_artifacts_on_disk(self, small_config):
        report = orchestrator.run_scenario(small_config)
        written = json.loads(small_config.report_path.read_text(encoding="utf-8"))
        assert get_validator().validate_report(written)
        assert written["artifacts"] == report["artifacts"]
        for relative in report["artifacts"]:
            assert (Path(small_config.output_dir) / relative).is_file()

    def test_reproducible(self, small_config, tmp_path):
        first = orchestrator.run_scenario(small_config)
        second = orchestrator.run_scenario(small_config.with_overrides(output_dir=str(tmp_path / "again")))
        assert comparable(first) == comparable(second)


class TestRotatingScenario:
    def test_fails_without_expectation(self, small_config):
        report = orchestrator.run_scenario(small_config.with_overrides(preset="rotating"))
        assert report["summary"]["exit_status"] == 1
        failed = [
            c for s in report["suites"].values() for c in s["checks"] if c["verdict"] == "fail"
        ]
        assert failed and all(c["symmetry"] for c in failed)

    def test_expected_failure_passes(self, small_config):
        config = small_config.with_overrides(preset="rotating", expect_failure=True)
        report = orchestrator.run_scenario(config)
        assert report["summary"]["exit_status"] == 0
        assert report["summary"]["expected_failures"] > 0


class TestCommandLine:
    def test_run_all(self, tmp_path):
        out = tmp_path / "out"
        status = orchestrator.main(["run", "--config", str(CONFIG_DIR / "constant.yaml"), "--out", str(out)])
        assert status == 0
        assert (out / "report.json").exists()
        assert (out / "logs" / "gflab.log").exists()

    def test_rotating_needs_flag(self, tmp_path):
        path = tmp_path / "rotating.yaml"
        path.write_text("grid.sizes: [16]\npreset.name: rotating\ntrials: 2\n", encoding="utf-8")
        assert orchestrator.main(["invariance", "--config", str(path), "--out", str(tmp_path / "a")]) == 1
        assert orchestrator.main(
            ["invariance", "--config", str(path), "--out", str(tmp_path / "b"), "--expect-failure"]
        ) == 0

    @pytest.mark.parametrize("name", ["constant.yaml", "step.yaml", "rotating.yaml", "plane.yaml"])
    def test_shipped_configs_load(self, name):
        config = load_config(CONFIG_DIR / name)
        assert config.source.endswith(name)


class TestOversizedLocality:
    def test_other_suites_still_report(self, tmp_path):
        path = tmp_path / "plane.yaml"
        path.write_text("grid.sizes: [32, 32]\nfiber.d: 4\ntrials: 2\n", encoding="utf-8")
        out = tmp_path / "out"
        assert orchestrator.main(["run", "--config", str(path), "--out", str(out)]) == 2

        report = json.loads((out / "report.json").read_text(encoding="utf-8"))
        assert report["suites"]["locality"]["refused"] is True
        others = {name: s for name, s in report["suites"].items() if name != "locality"}
        assert set(others) == set(orchestrator.SUITE_NAMES) - {"locality"}
        assert all(s["checks"] and s["error"] is None for s in others.values())
