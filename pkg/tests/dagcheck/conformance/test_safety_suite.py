"""Bulk runs of the pristine build: safety properties and reproducibility."""

import pytest

from dagcheck.mapping.abstraction import abstract_trace
from dagcheck.metrics import compute_metrics
from dagcheck.model.checker import accept_trace, check_invariants
from dagcheck.sim.engine import SimConfig, run
from dagcheck.sim.rng import SeededRandom

pytestmark = pytest.mark.slow


def _random_config(rng: SeededRandom, failure_chance: float) -> SimConfig:
    return SimConfig(
        num_nodes=rng.uniform_int(4, 10),
        failure_chance=failure_chance,
        iteration_duration=round(rng.uniform_float(10.0, 30.0), 3),
        message_send_delay=round(rng.uniform_float(1.0, 8.0), 3),
        max_rounds=rng.uniform_int(8, 16),
        seed=rng.uniform_int(0, 2**32),
    )


@pytest.mark.parametrize("failure_chance", [0.0, 0.6], ids=["fault-free", "crashing"])
def test_safety_holds_on_every_run(failure_chance, mapping_table):
    rng = SeededRandom(99)
    for _ in range(100):
        cfg = _random_config(rng, failure_chance)
        trace = abstract_trace(run(cfg).trace, mapping_table)
        report = check_invariants(trace, cfg.model_config())
        assert report.ok, (cfg.config_id, report.first_violation)
        verdict = accept_trace(trace, cfg.model_config())
        assert verdict, (cfg.config_id, verdict.step, verdict.detail)


def test_runs_are_reproducible():
    rng = SeededRandom(7)
    for _ in range(20):
        cfg = _random_config(rng, rng.uniform_float(0.0, 1.0))
        first, second = run(cfg), run(cfg)
        assert first.digest == second.digest, cfg.config_id
        assert compute_metrics(first) == compute_metrics(second)
