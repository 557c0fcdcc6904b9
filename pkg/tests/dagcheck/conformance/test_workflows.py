from pathlib import Path

import pytest

from dagcheck.config.manager import ConfigManager
from dagcheck.conformance import workflows
from dagcheck.conformance.grid import sim_configs
from dagcheck.conformance.workflows import WORKFLOW_I, WORKFLOW_II, conf_test, workflow_I, workflow_II
from dagcheck.metrics import CampaignMonitor
from dagcheck.trace.store import TraceStore
from dagcheck.violations import Classification


def test_workflow_I_checks_every_combination(harness_cfg, store):
    monitor = CampaignMonitor()
    result = workflow_I(harness_cfg, store, monitor=monitor)
    grid = sim_configs(harness_cfg.sim, harness_cfg.fuzz)
    assert result.workflow == WORKFLOW_I
    assert result.violation is None
    assert len(result.traces) + result.skipped == len(grid)
    assert len(store) == len(result.traces)
    assert monitor.get_summary()["runs"] == len(grid)


def test_workflow_I_runs_the_simulator_once_per_combination(harness_cfg, store, mocker):
    cfg = ConfigManager.with_overrides(harness_cfg, **{"fuzz.k": 3})
    runs = mocker.spy(workflows, "run")
    checks = mocker.spy(workflows, "check_combination")
    result = workflow_I(cfg, store)
    assert runs.call_count == 27
    assert checks.call_count == 27
    assert len({c.args[0].config_id for c in runs.call_args_list}) == 27
    assert result.violation is None
    assert len(result.traces) + result.skipped == 27


def test_workflow_I_skips_known_traces(harness_cfg, store):
    first = workflow_I(harness_cfg, store)
    again = workflow_I(harness_cfg, store)
    assert again.traces == []
    assert again.skipped == len(first.traces) + first.skipped


def test_workflow_I_is_reproducible(harness_cfg, tmp_path):
    with TraceStore(tmp_path / "a.txt") as a, TraceStore(tmp_path / "b.txt") as b:
        assert workflow_I(harness_cfg, a, batch=1).traces == workflow_I(harness_cfg, b, batch=1).traces


def test_workflow_II_rejection_samples_new_traces(harness_cfg, store):
    first = workflow_II(harness_cfg, store)
    assert first.workflow == WORKFLOW_II
    assert first.violation is None
    assert len(first.traces) == harness_cfg.workflow.n

    size = len(store)
    second = workflow_II(harness_cfg, store)
    assert not set(first.traces) & set(second.traces)
    assert len(store) == size + len(second.traces)
    assert second.skipped >= 1


def test_workflow_II_reports_exhaustion(harness_cfg, store):
    cfg = ConfigManager.with_overrides(harness_cfg, **{"workflow.retry_bound": 1})
    workflow_II(cfg, store)
    result = workflow_II(cfg, store)
    assert result.exhausted
    assert result.traces == []


def test_workflow_II_with_no_walks(harness_cfg, store):
    cfg = ConfigManager.with_overrides(harness_cfg, **{"workflow.n": 0})
    result = workflow_II(cfg, store)
    assert result.traces == [] and not result.exhausted


def test_zero_budget_checks_nothing(harness_cfg, store):
    report = conf_test(harness_cfg, store, budget=0)
    assert report.batches == []
    assert report.violations == []
    assert report.stopped == "budget"
    assert len(store) == 0


def test_pristine_build_conforms(harness_cfg, store):
    report = conf_test(harness_cfg, store)
    assert report.violations == []
    assert report.stopped == "budget"
    assert [b.workflow for b in report.batches] == [WORKFLOW_I, WORKFLOW_II, WORKFLOW_I, WORKFLOW_II]
    assert report.traces_checked == len(store)


def test_seeded_violation_stops_the_campaign(harness_cfg, store):
    cfg = ConfigManager.with_overrides(harness_cfg, seeded_violation="V7")
    out = Path(cfg.workflow.output_dir)
    report = conf_test(cfg, store, output_dir=out)
    assert report.stopped == "violation"
    assert len(report.batches) == 1
    violation = report.violations[0]
    assert violation.classification is Classification.TYPE_I
    assert violation.seeded_violation == "V7"
    assert violation.trigger["workflow"] == WORKFLOW_I
    assert Path(violation.counterexample).exists()
    # a violating trace is not remembered as checked
    assert violation.trace_hash not in store


def test_all_violations_mode_keeps_going(harness_cfg, store):
    cfg = ConfigManager.with_overrides(harness_cfg, seeded_violation="V7", **{"workflow.all_violations": True})
    report = conf_test(cfg, store, budget=2)
    assert report.stopped != "violation"
    assert report.violations
    assert report.violations[0].classification is Classification.TYPE_I
    assert report.violations[0].trace_hash in store


@pytest.mark.parametrize("workers", [2])
def test_parallel_grid_matches_sequential(harness_cfg, tmp_path, workers):
    parallel = ConfigManager.with_overrides(
        harness_cfg, **{"workflow.workers": workers, "fuzz.k": 2, "sim.max_rounds": 6}
    )
    sequential = ConfigManager.with_overrides(parallel, **{"workflow.workers": 1})
    with TraceStore(tmp_path / "p.txt") as a, TraceStore(tmp_path / "s.txt") as b:
        assert workflow_I(parallel, a).traces == workflow_I(sequential, b).traces
