import json

import pytest

from dagcheck.metrics import METRIC_FIELDS, CampaignMonitor, compute_metrics, metrics_from_trace, write_metrics
from dagcheck.sim.concrete import load_concrete, save_concrete
from dagcheck.sim.engine import SimConfig, run


@pytest.fixture
def sim_run(sim_cfg):
    return run(sim_cfg)


def test_metrics_of_a_fault_free_run(sim_run, sim_cfg):
    record = compute_metrics(sim_run)
    assert record.round_reached == sim_cfg.max_rounds
    assert record.committed_vertices > 0
    assert record.committed_transactions == record.committed_vertices * sim_cfg.transactions_per_vertex
    assert record.tps > 0
    assert 0 < record.ttf_p50_ms <= record.ttf_p99_ms
    assert record.crashes == 0 and record.equivocations_seen == 0
    assert record.vertex_count >= record.committed_vertices


def test_metrics_are_reproducible_from_the_trace_file(sim_run, tmp_path):
    path = save_concrete(sim_run.trace, tmp_path / "trace.jsonl")
    assert metrics_from_trace(load_concrete(path)) == compute_metrics(sim_run)


def test_faults_show_up_in_metrics():
    crashed = compute_metrics(run(SimConfig(failure_chance=1.0, max_rounds=8, reconfigure=False, seed=5)))
    assert crashed.crashes == 1
    equivocating = compute_metrics(
        run(SimConfig(max_rounds=14, reconfigure_round=5, equivocation_rounds=(3,), seed=6, max_virtual_time=2000.0))
    )
    assert equivocating.equivocations_seen >= 1


def test_enabled_metrics_filter_the_document(sim_run, tmp_path):
    path = write_metrics(compute_metrics(sim_run), tmp_path / "metrics.json", ["ttf", "crashes"])
    data = json.loads(path.read_text(encoding="utf-8"))
    assert set(data) == set(METRIC_FIELDS["ttf"]) | {"crashes"}


def test_campaign_summary(sim_run):
    monitor = CampaignMonitor()
    assert monitor.get_summary() == {"runs": 0}
    monitor.record_run(sim_run.config.config_id, compute_metrics(sim_run))
    monitor.record_run("idle", compute_metrics(run(SimConfig(vertex_production_rate=0, max_virtual_time=300.0))))
    summary = monitor.get_summary()
    assert summary["runs"] == 2
    assert summary["max_round_reached"] == sim_run.round_reached
    assert summary["median_ttf_ms"] is not None


def test_zero_commits_give_zero_throughput():
    record = compute_metrics(run(SimConfig(vertex_production_rate=0, max_virtual_time=300.0)))
    assert record.tps == 0
    assert record.committed_vertices == 0
    assert record.ttf_mean_ms is None and record.ttf_p99_ms is None


def test_higher_production_rate_commits_more():
    base = dict(max_rounds=500, max_virtual_time=2000.0, reconfigure=False, seed=8)
    slow = compute_metrics(run(SimConfig(vertex_production_rate=10, **base)))
    fast = compute_metrics(run(SimConfig(vertex_production_rate=20, **base)))
    assert fast.committed_vertices >= slow.committed_vertices
    assert fast.round_reached > slow.round_reached
