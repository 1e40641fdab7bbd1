import argparse
import json
import logging
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Dict, List, Optional, Sequence

from gflab.core.errors import ConfigError, LocalityLimitError
from gflab.experiments.base_experiment import CheckVerdict, SuiteResult, load_preset
from gflab.experiments.config import ScenarioConfig, load_config
from gflab.experiments.schema_validator import get_validator
from gflab.experiments.suites import (
    GaugeSuite,
    IdentitiesSuite,
    InvarianceSuite,
    IrreducibilitySuite,
    LocalitySuite,
    SimulateSuite,
)

logger = logging.getLogger("orchestrator")

# ── Environment Config ────────────────────────────────────────────────────────
LOG_LEVEL = os.getenv("GFLAB_LOG_LEVEL", "INFO").upper()
THREADS   = os.getenv("GFLAB_THREADS", "0")           # parsed by threads_from_env; 0 = one worker per suite

EXIT_OK        = 0
EXIT_FAILED    = 1
EXIT_REFUSED   = 2

# ── Suite Registry ────────────────────────────────────────────────────────────
# (subcommand, SuiteClass); random stream = position + 1, stream 0 is the preset
SUITE_REGISTRY = [
    ("identities",      IdentitiesSuite),
    ("invariance",      InvarianceSuite),
    ("gauge",           GaugeSuite),
    ("locality",        LocalitySuite),
    ("irreducibility",  IrreducibilitySuite),
    ("simulate",        SimulateSuite),
]
SUITE_NAMES = [name for name, _ in SUITE_REGISTRY]


# ── Logging Setup ─────────────────────────────────────────────────────────────
def setup_logging(out_dir: Path, level: str = LOG_LEVEL) -> None:
    log_dir = Path(out_dir) / "logs"
    log_dir.mkdir(parents=True, exist_ok=True)
    logging.basicConfig(
        level=getattr(logging, level, logging.INFO),
        format="%(asctime)s [%(levelname)s] %(name)s — %(message)s",
        handlers=[
            logging.StreamHandler(sys.stdout),
            logging.FileHandler(log_dir / "gflab.log", mode="a", encoding="utf-8"),
        ],
        force=True,
    )


def threads_from_env(raw: str = THREADS) -> Optional[int]:
    """Worker bound from GFLAB_THREADS; None means one worker per suite."""
    try:
        threads = int(raw)
    except ValueError:
        raise ConfigError(f"expected a non-negative integer, got {raw!r}", "GFLAB_THREADS") from None
    if threads < 0:
        raise ConfigError(f"expected a non-negative integer, got {raw!r}", "GFLAB_THREADS")
    return threads or None


# ── Suite Runner ──────────────────────────────────────────────────────────────
def run_suite(suite) -> SuiteResult:
    """Run a single suite — called inside a thread. Never raises."""
    started = time.perf_counter()
    try:
        logger.info(f"[{suite.name}] Starting")
        suite.run()
    except LocalityLimitError as e:
        logger.warning(f"⚠️  [{suite.name}] Refused: {e}")
        suite.result.error = f"{type(e).__name__}: {e}"
        suite.result.refused = True
    except Exception as e:
        logger.error(f"[{suite.name}] Fatal error: {e}")
        suite.result.error = f"{type(e).__name__}: {e}"
    finally:
        suite.result.elapsed = time.perf_counter() - started
        logger.info(f"[{suite.name}] Finished in {suite.result.elapsed:.2f}s")
    return suite.result


def compute_summary(results: Sequence[SuiteResult], expect_failure: bool) -> Dict[str, int]:
    """
    Counts per verdict and the exit status: 1 on any non-expected failure or
    suite error, otherwise 2 if a suite refused the scenario, otherwise 0.
    """
    passed = failed = inconclusive = expected = 0
    refused = sum(1 for r in results if r.refused)
    blocking = any(r.error and not r.refused for r in results)
    for result in results:
        for check in result.checks:
            if check.verdict is CheckVerdict.PASS:
                passed += 1
            elif check.verdict is CheckVerdict.INCONCLUSIVE:
                inconclusive += 1
            elif expect_failure and check.symmetry:
                expected += 1
            else:
                failed += 1
                blocking = True
    return {
        "passed": passed,
        "failed": failed,
        "inconclusive": inconclusive,
        "expected_failures": expected,
        "refused": refused,
        "exit_status": EXIT_FAILED if blocking else EXIT_REFUSED if refused else EXIT_OK,
    }


# ── Orchestrator ──────────────────────────────────────────────────────────────
class ScenarioOrchestrator:
    def __init__(
        self, config: ScenarioConfig, suites: Optional[Sequence[str]] = None, threads: Optional[int] = None
    ):
        unknown = set(suites or ()) - set(SUITE_NAMES)
        if unknown:
            raise ConfigError(f"unknown suite(s): {sorted(unknown)}")
        self.config = config
        self.selected = list(suites) if suites else list(SUITE_NAMES)
        self.threads = threads
        self.out_dir = Path(config.output_dir)
        self.suites: List = []

    def build_suites(self):
        """Instantiate the selected suites; all share one preset field."""
        p_field = load_preset(self.config)
        for index, (name, SuiteClass) in enumerate(SUITE_REGISTRY, start=1):
            if name not in self.selected:
                continue
            suite = SuiteClass(self.config, self.config.rng(index), p_field=p_field, out_dir=self.out_dir)
            self.suites.append(suite)
            logger.info(f"Built suite: {name} (stream {index})")

    def run_all(self) -> List[SuiteResult]:
        if not self.suites:
            self.build_suites()
        workers = min(self.threads or len(self.suites), len(self.suites))
        logger.info(f"Running {len(self.suites)} suite(s) on {workers} thread(s)")
        with ThreadPoolExecutor(max_workers=workers, thread_name_prefix="suite") as executor:
            results = list(executor.map(run_suite, self.suites))
        return results

    def assemble_report(self, results: Sequence[SuiteResult]) -> Dict:
        ordered = sorted(results, key=lambda r: r.name)
        artifacts = sorted(a for r in ordered for a in r.artifacts)
        return {
            "config": self.config.to_dict(),
            "suites": {r.name: r.to_dict() for r in ordered},
            "summary": compute_summary(ordered, self.config.expect_failure),
            "artifacts": artifacts,
            "timing": {r.name: r.elapsed for r in ordered},
        }

    def write_report(self, report: Dict) -> Path:
        path = self.config.report_path
        path.parent.mkdir(parents=True, exist_ok=True)
        if not get_validator().validate_report(report):
            logger.warning("⚠️  Report does not match report.schema.json")
        path.write_text(json.dumps(report, sort_keys=True, indent=2) + "\n", encoding="utf-8")
        logger.info(f"✅ Report written to {path}")
        return path


def print_status(report: Dict):
    """Print one line per suite."""
    print("\n" + "=" * 60)
    print(f"{'SUITE':<18} {'PASS':>6} {'FAIL':>6} {'INCONCL':>8}  ERROR")
    print("=" * 60)
    for name, suite in report["suites"].items():
        verdicts = [c["verdict"] for c in suite["checks"]]
        print(
            f"{name:<18} "
            f"{verdicts.count('pass'):>6} "
            f"{verdicts.count('fail'):>6} "
            f"{verdicts.count('inconclusive'):>8}  "
            f"{'REFUSED ' if suite.get('refused') else ''}{suite['error'] or ''}"
        )
    print("=" * 60 + "\n")


def run_scenario(
    config: ScenarioConfig, suites: Optional[Sequence[str]] = None, threads: Optional[int] = None
) -> Dict:
    """Run the selected suites (all by default), write and return the report."""
    started = time.perf_counter()
    orchestrator = ScenarioOrchestrator(config, suites, threads)
    orchestrator.build_suites()
    report = orchestrator.assemble_report(orchestrator.run_all())
    report["timing"]["total"] = time.perf_counter() - started
    orchestrator.write_report(report)
    return report


# ── CLI ───────────────────────────────────────────────────────────────────────
def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gflab",
        description="Numerical lab for projection symmetries of vector-valued heat and Schrödinger equations",
    )
    parser.add_argument(
        "command",
        nargs="?",
        default="run",
        choices=["run"] + SUITE_NAMES,
        help="suite to run; 'run' runs all of them",
    )
    parser.add_argument("--config", type=Path, default=None, help="YAML scenario file")
    parser.add_argument("--out", type=str, default=None, help="output directory (overrides output.dir)")
    parser.add_argument("--seed", type=int, default=None, help="random seed (overrides seed)")
    parser.add_argument("--preset", type=str, default=None, help="projection field preset (overrides preset.name)")
    parser.add_argument(
        "--expect-failure",
        action="store_true",
        help="symmetry verdicts of 'not symmetric' do not fail the run",
    )
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = load_config(args.config).with_overrides(
            output_dir=args.out,
            seed=args.seed,
            preset=args.preset,
            expect_failure=True if args.expect_failure else None,
        )
        threads = threads_from_env(os.getenv("GFLAB_THREADS", "0"))
    except ConfigError as e:
        logging.basicConfig(level=logging.INFO, format="%(levelname)s %(name)s — %(message)s")
        logger.error(f"❌ Invalid configuration: {e}")
        return EXIT_REFUSED

    setup_logging(Path(config.output_dir))
    logger.info("=" * 60)
    logger.info(f"  gflab — {args.command} (preset '{config.preset}', seed {config.seed})")
    logger.info("=" * 60)

    suites = None if args.command == "run" else [args.command]
    try:
        report = run_scenario(config, suites, threads=threads)
    except ConfigError as e:
        logger.error(f"❌ Invalid configuration: {e}")
        return EXIT_REFUSED

    print_status(report)
    summary = report["summary"]
    logger.info(
        f"Summary: {summary['passed']} passed, {summary['failed']} failed, "
        f"{summary['inconclusive']} inconclusive, {summary['expected_failures']} expected failures, "
        f"{summary['refused']} refused"
    )
    return summary["exit_status"]


# ── Entry Point ───────────────────────────────────────────────────────────────
if __name__ == "__main__":
    sys.exit(main())
