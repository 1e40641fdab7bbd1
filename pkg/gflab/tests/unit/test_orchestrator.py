import json
from pathlib import Path

import pytest

import orchestrator
from gflab.core.errors import ConfigError, LocalityLimitError
from gflab.core.symmetry import Thresholds, Verdict
from gflab.experiments.base_experiment import BaseSuite, CheckResult, CheckVerdict, SuiteResult
from gflab.experiments.config import ScenarioConfig
from gflab.experiments.schema_validator import get_validator
from gflab.experiments.suites import LocalitySuite


class PassingSuite(BaseSuite):
    name = "identities"

    def execute(self):
        self.check("trivial", 0.0, 1e-12)
        self.result.details["first_draw"] = float(self.rng.random())


class FailingSymmetrySuite(BaseSuite):
    name = "invariance"

    def execute(self):
        self.check("algebra", 0.0, 1e-12)
        self.check_flag("flag", True)
        self.classify("criterion_b", Verdict.NOT_SYMMETRIC, 0.5, Thresholds())


class ExplodingSuite(BaseSuite):
    name = "gauge"

    def execute(self):
        raise RuntimeError("boom")


class ArtifactSuite(BaseSuite):
    name = "simulate"

    def execute(self):
        path = self.out_dir / "simulate" / "note.csv"
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text("a\n1\n")
        self.artifact(path)
        self.check("written", 0.0, 0.0)


FAKE_REGISTRY = [
    ("identities", PassingSuite),
    ("invariance", FailingSymmetrySuite),
    ("gauge", ExplodingSuite),
    ("simulate", ArtifactSuite),
]


@pytest.fixture
def fake_registry(mocker):
    mocker.patch.object(orchestrator, "SUITE_REGISTRY", FAKE_REGISTRY)
    mocker.patch.object(orchestrator, "SUITE_NAMES", [name for name, _ in FAKE_REGISTRY])


def make_summary(**counts):
    summary = {"passed": 0, "failed": 0, "inconclusive": 0, "expected_failures": 0, "refused": 0, "exit_status": 0}
    summary.update(counts)
    return summary


def make_result(name, *verdicts, symmetry=False, error=None):
    result = SuiteResult(name, error=error)
    for i, verdict in enumerate(verdicts):
        result.checks.append(CheckResult(f"{name}.c{i}", verdict, 0.0, 0.0, symmetry=symmetry))
    return result


class TestComputeSummary:
    def test_all_pass(self):
        summary = orchestrator.compute_summary([make_result("a", CheckVerdict.PASS)], expect_failure=False)
        assert summary["exit_status"] == 0
        assert summary["passed"] == 1

    def test_failure_sets_exit_status(self):
        results = [make_result("a", CheckVerdict.PASS, CheckVerdict.FAIL)]
        assert orchestrator.compute_summary(results, expect_failure=False)["exit_status"] == 1

    def test_inconclusive_does_not_fail(self):
        summary = orchestrator.compute_summary([make_result("a", CheckVerdict.INCONCLUSIVE)], expect_failure=False)
        assert summary["exit_status"] == 0
        assert summary["inconclusive"] == 1

    def test_expected_symmetry_failure(self):
        results = [make_result("a", CheckVerdict.FAIL, symmetry=True)]
        summary = orchestrator.compute_summary(results, expect_failure=True)
        assert summary["exit_status"] == 0
        assert summary["expected_failures"] == 1
        assert summary["failed"] == 0

    def test_expect_failure_does_not_cover_algebra(self):
        results = [make_result("a", CheckVerdict.FAIL, symmetry=False)]
        assert orchestrator.compute_summary(results, expect_failure=True)["exit_status"] == 1

    def test_suite_error_fails(self):
        results = [make_result("a", CheckVerdict.PASS, error="RuntimeError: boom")]
        assert orchestrator.compute_summary(results, expect_failure=True)["exit_status"] == 1

    def test_refusal_exits_two(self):
        refusal = SuiteResult("locality", error="LocalityLimitError: big", refused=True)
        results = [make_result("a", CheckVerdict.PASS), refusal]
        summary = orchestrator.compute_summary(results, expect_failure=False)
        assert summary["refused"] == 1
        assert summary["exit_status"] == 2

    def test_failure_outranks_refusal(self):
        results = [make_result("a", CheckVerdict.FAIL), SuiteResult("locality", refused=True)]
        assert orchestrator.compute_summary(results, expect_failure=False)["exit_status"] == 1


class TestRunSuite:
    def test_exception_is_recorded(self, small_config, rng):
        suite = ExplodingSuite(small_config, rng)
        result = orchestrator.run_suite(suite)
        assert result.error == "RuntimeError: boom"
        assert result.elapsed >= 0.0

    def test_results_are_returned(self, small_config, rng):
        result = orchestrator.run_suite(PassingSuite(small_config, rng))
        assert result.error is None
        assert [c.name for c in result.checks] == ["identities.trivial"]

    def test_size_limit_marks_refusal(self, small_config, rng, mocker):
        suite = PassingSuite(small_config, rng)
        mocker.patch.object(suite, "execute", side_effect=LocalityLimitError("too big"))
        result = orchestrator.run_suite(suite)
        assert result.refused
        assert result.error == "LocalityLimitError: too big"


class TestScenarioOrchestrator:
    def test_unknown_suite(self, small_config):
        with pytest.raises(ConfigError):
            orchestrator.ScenarioOrchestrator(small_config, ["plotting"])

    def test_streams_follow_registry_position(self, small_config, fake_registry):
        single = orchestrator.ScenarioOrchestrator(small_config, ["invariance"])
        single.build_suites()
        assert single.suites[0].rng.random() == small_config.rng(2).random()

    def test_locality_refusal_is_reported(self, tmp_path):
        config = ScenarioConfig(sizes=(2048,), d=2, output_dir=str(tmp_path))
        report = orchestrator.run_scenario(config, ["locality"])
        locality = report["suites"]["locality"]
        assert locality["refused"] is True
        assert locality["checks"] == []
        assert locality["error"].startswith("LocalityLimitError")
        assert report["summary"]["refused"] == 1
        assert report["summary"]["exit_status"] == 2

    def test_refusal_does_not_stop_other_suites(self, tmp_path, mocker):
        registry = [("identities", PassingSuite), ("locality", LocalitySuite)]
        mocker.patch.object(orchestrator, "SUITE_REGISTRY", registry)
        mocker.patch.object(orchestrator, "SUITE_NAMES", [name for name, _ in registry])
        config = ScenarioConfig(sizes=(32, 32), d=4, output_dir=str(tmp_path))

        report = orchestrator.run_scenario(config)
        assert report["suites"]["locality"]["refused"] is True
        assert [c["name"] for c in report["suites"]["identities"]["checks"]] == ["identities.trivial"]
        assert report["summary"]["exit_status"] == 2
        assert get_validator().validate_report(json.loads(config.report_path.read_text(encoding="utf-8")))

    def test_report_layout(self, small_config, fake_registry):
        report = orchestrator.run_scenario(small_config, threads=2)
        assert list(report["suites"]) == ["gauge", "identities", "invariance", "simulate"]
        assert report["suites"]["gauge"]["error"] == "RuntimeError: boom"
        assert report["artifacts"] == ["simulate/note.csv"]
        assert set(report["timing"]) == {"gauge", "identities", "invariance", "simulate", "total"}
        assert report["summary"]["exit_status"] == 1

        written = json.loads(Path(small_config.report_path).read_text(encoding="utf-8"))
        assert written["summary"] == report["summary"]

    def test_report_is_schema_valid(self, small_config, fake_registry):
        report = orchestrator.run_scenario(small_config, ["identities", "invariance"])
        assert get_validator().validate_report(json.loads(json.dumps(report)))

    def test_expected_failure(self, small_config, fake_registry):
        config = small_config.with_overrides(expect_failure=True)
        report = orchestrator.run_scenario(config, ["identities", "invariance"])
        assert report["summary"]["expected_failures"] == 1
        assert report["summary"]["exit_status"] == 0

    def test_schema_failure_is_only_a_warning(self, small_config, fake_registry, mock_schema_validator):
        mock_schema_validator.validate_report.return_value = False
        report = orchestrator.run_scenario(small_config, ["identities"])
        assert Path(small_config.report_path).exists()
        assert report["summary"]["exit_status"] == 0


class TestMain:
    def test_missing_config_file(self, tmp_path):
        assert orchestrator.main(["run", "--config", str(tmp_path / "missing.yaml")]) == 2

    def test_from_file_without_file(self, tmp_path):
        path = tmp_path / "scenario.yaml"
        path.write_text(f"preset.name: from-file\npreset.file: {tmp_path / 'gone.csv'}\n", encoding="utf-8")
        assert orchestrator.main(["invariance", "--config", str(path), "--out", str(tmp_path / "out")]) == 2

    def test_locality_limit_is_refused(self, tmp_path):
        path = tmp_path / "scenario.yaml"
        path.write_text("grid.sizes: [2048]\nfiber.d: 2\n", encoding="utf-8")
        assert orchestrator.main(["locality", "--config", str(path), "--out", str(tmp_path / "out")]) == 2

    def test_flags_reach_the_config(self, tmp_path, mocker, fake_registry):
        run = mocker.patch.object(orchestrator, "run_scenario")
        run.return_value = {
            "suites": {},
            "summary": make_summary(),
        }
        status = orchestrator.main(
            ["identities", "--seed", "7", "--preset", "step", "--out", str(tmp_path), "--expect-failure"]
        )
        assert status == 0
        config, suites = run.call_args.args
        assert (config.seed, config.preset, config.expect_failure) == (7, "step", True)
        assert config.output_dir == str(tmp_path)
        assert suites == ["identities"]
        assert (tmp_path / "logs" / "gflab.log").exists()

    def test_exit_status_from_summary(self, tmp_path, mocker):
        mocker.patch.object(orchestrator, "run_scenario").return_value = {
            "suites": {},
            "summary": make_summary(failed=1, exit_status=1),
        }
        assert orchestrator.main(["--out", str(tmp_path)]) == 1

    def test_non_integer_threads_is_refused(self, tmp_path, monkeypatch, mocker):
        run = mocker.patch.object(orchestrator, "run_scenario")
        monkeypatch.setenv("GFLAB_THREADS", "many")
        assert orchestrator.main(["--out", str(tmp_path)]) == 2
        run.assert_not_called()

    def test_threads_reach_the_pool(self, tmp_path, monkeypatch, mocker):
        run = mocker.patch.object(orchestrator, "run_scenario")
        run.return_value = {"suites": {}, "summary": make_summary()}
        monkeypatch.setenv("GFLAB_THREADS", "3")
        assert orchestrator.main(["--out", str(tmp_path)]) == 0
        assert run.call_args.kwargs["threads"] == 3


class TestThreadsFromEnv:
    @pytest.mark.parametrize("raw, expected", [("0", None), ("4", 4), (" 2 ", 2)])
    def test_valid(self, raw, expected):
        assert orchestrator.threads_from_env(raw) == expected

    @pytest.mark.parametrize("raw", ["many", "1.5", "-1", ""])
    def test_invalid(self, raw):
        with pytest.raises(ConfigError) as excinfo:
            orchestrator.threads_from_env(raw)
        assert excinfo.value.field == "GFLAB_THREADS"
