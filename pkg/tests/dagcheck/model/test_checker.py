from dagcheck.model.checker import RejectReason, accept_trace, check_invariants
from dagcheck.model.config import ModelConfig
from dagcheck.model.lts import model_init
from dagcheck.trace.actions import commit_leader, next_round
from dagcheck.trace.state import vertex_ref
from dagcheck.trace.trace import Trace, TraceStep


def _synthetic(cfg, states):
    """A trace whose post states are given directly (actions are placeholders)."""
    init = model_init(cfg).abstract
    steps = tuple(TraceStep(next_round("n01"), s.digest, s) for s in states)
    return Trace(init.digest, steps, init_state=init)


def test_model_walk_is_accepted(walk_trace, model_cfg):
    assert accept_trace(walk_trace, model_cfg)


def test_wrong_config_rejects_at_init(walk_trace):
    verdict = accept_trace(walk_trace, ModelConfig.uniform(5, num_byzantine=1, round_bound=12))
    assert not verdict
    assert verdict.reason is RejectReason.INIT and verdict.step == 0


def test_tampered_digest_is_rejected(walk_trace, model_cfg):
    steps = list(walk_trace.steps)
    steps[5] = TraceStep(steps[5].action, "0" * 64)
    verdict = accept_trace(Trace(walk_trace.init_digest, tuple(steps)), model_cfg)
    assert verdict.reason is RejectReason.DIGEST
    assert verdict.step == 5


def test_unguarded_action_is_rejected(walk_trace, model_cfg):
    bogus = TraceStep(commit_leader("n01", 7, "ff" * 32), walk_trace.steps[0].post_digest)
    trace = Trace(walk_trace.init_digest, (bogus,) + walk_trace.steps[1:])
    verdict = accept_trace(trace, model_cfg)
    assert verdict.reason is RejectReason.GUARD
    assert verdict.step == 0
    assert "no committable leader" in verdict.detail


def test_model_walk_satisfies_invariants(walk_trace, model_cfg):
    report = check_invariants(walk_trace, model_cfg)
    assert report.ok
    assert report.first_violation is None


def test_invariants_replay_traces_without_states(walk_trace, model_cfg):
    bare = Trace(walk_trace.init_digest, tuple(TraceStep(s.action, s.post_digest) for s in walk_trace.steps))
    assert check_invariants(bare, model_cfg).ok


def test_different_blocks_break_block_consistency(model_cfg):
    init = model_init(model_cfg).abstract
    a = init.replace("n01", init.views["n01"].with_commit(1, "aa" * 32, "11" * 32))
    b = a.replace("n02", a.views["n02"].with_commit(1, "aa" * 32, "22" * 32))
    report = check_invariants(_synthetic(model_cfg, [a, b]), model_cfg)
    assert not report.block_consistency
    assert report.leader_consistency
    assert report.first_violation[0] == 1


def test_different_leaders_break_leader_consistency(model_cfg):
    init = model_init(model_cfg).abstract
    a = init.replace("n01", init.views["n01"].with_commit(1, "aa" * 32, "11" * 32))
    b = a.replace("n02", a.views["n02"].with_commit(1, "bb" * 32, "11" * 32))
    report = check_invariants(_synthetic(model_cfg, [a, b]), model_cfg)
    assert not report.leader_consistency
    assert report.block_consistency


def test_byzantine_nodes_are_not_held_to_invariants(model_cfg):
    init = model_init(model_cfg).abstract
    a = init.replace("n01", init.views["n01"].with_commit(1, "aa" * 32, "11" * 32))
    b = a.replace("n00", a.views["n00"].with_commit(1, "bb" * 32, "22" * 32))
    assert check_invariants(_synthetic(model_cfg, [a, b]), model_cfg).ok


def test_diverging_honest_vertex_breaks_dag_consistency(model_cfg):
    init = model_init(model_cfg).abstract
    a = init.replace("n01", init.views["n01"].with_vertex(1, "n02", "cc" * 32))
    b = a.replace("n03", a.views["n03"].with_vertex(1, "n02", vertex_ref("n02", 1, ())))
    report = check_invariants(_synthetic(model_cfg, [a, b]), model_cfg)
    assert not report.dag_consistency
    assert report.first_violation[0] == 1
    assert "honest n02" in report.first_violation[1]


def test_leader_waves_must_increase(model_cfg):
    init = model_init(model_cfg).abstract
    view = init.views["n01"].with_commit(2, "aa" * 32, "11" * 32).with_commit(1, "bb" * 32, "22" * 32)
    report = check_invariants(_synthetic(model_cfg, [init.replace("n01", view)]), model_cfg)
    assert not report.leader_monotonicity
