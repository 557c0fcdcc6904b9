import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dagcheck.errors import PreconditionViolation
from dagcheck.model.config import ModelConfig
from dagcheck.model.lts import all_at_bound, apply_action, enabled_actions, guard, model_init
from dagcheck.sim.rng import SeededRandom
from dagcheck.trace.actions import ActionKind, commit_leader, create_vertex, equivocate, next_round, reconfigure
from dagcheck.trace.state import vertex_ref


def _deliver_all(s, cfg):
    while True:
        receives = sorted(a for a in enabled_actions(s, cfg) if a.kind is ActionKind.RECEIVE_VERTEX)
        if not receives:
            return s
        s = apply_action(s, receives[0], cfg)


def _round(s, cfg):
    """Everyone receives, advances and creates."""
    s = _deliver_all(s, cfg)
    for p in s.members:
        s = apply_action(s, next_round(p), cfg)
        s = apply_action(s, create_vertex(p), cfg)
    return _deliver_all(s, cfg)


def test_init_holds_only_own_genesis(model_cfg):
    s = model_init(model_cfg)
    for p in model_cfg.node_set:
        assert s.view(p).round == 1
        assert s.view(p).row(1).entries == ((p, vertex_ref(p, 1, ())),)
    assert not s.abstract.faulty


def test_init_enables_only_receives_and_equivocation(model_cfg):
    kinds = {a.kind for a in enabled_actions(model_init(model_cfg), model_cfg)}
    assert kinds == {ActionKind.RECEIVE_VERTEX, ActionKind.EQUIVOCATE}


def test_next_round_needs_quorum(model_cfg):
    s = model_init(model_cfg)
    assert "below quorum" in guard(s, next_round("n01"), model_cfg)
    with pytest.raises(PreconditionViolation):
        apply_action(s, next_round("n01"), model_cfg)
    s = _deliver_all(s, model_cfg)
    assert guard(s, next_round("n01"), model_cfg) is None


def test_create_once_per_round(model_cfg):
    s = _deliver_all(model_init(model_cfg), model_cfg)
    s = apply_action(s, next_round("n01"), model_cfg)
    s = apply_action(s, create_vertex("n01"), model_cfg)
    assert guard(s, create_vertex("n01"), model_cfg) is not None
    parents = s.view("n01").row(1).refs()
    assert s.view("n01").get(2, "n01") == vertex_ref("n01", 2, parents)


def test_leader_committed_after_support(model_cfg):
    s = model_init(model_cfg)
    s = _round(s, model_cfg)  # round 2 supports the wave-1 leader
    commit = commit_leader("n02", 1, vertex_ref("n00", 1, ()))
    assert guard(s, commit, model_cfg) is None
    s = apply_action(s, commit, model_cfg)
    view = s.view("n02")
    assert view.leaders == ((1, vertex_ref("n00", 1, ())),)
    assert len(view.blocks) == 1 and view.blocks[0][0] == 1
    assert guard(s, commit, model_cfg) is not None


def test_equivocation_marks_faulty(model_cfg):
    s = model_init(model_cfg)
    assert guard(s, equivocate("n01", 1), model_cfg) == "n01 is not byzantine"
    s = apply_action(s, equivocate("n00", 1), model_cfg)
    assert s.abstract.faulty == frozenset({"n00"})
    assert guard(s, equivocate("n00", 1), model_cfg) is not None
    copy = vertex_ref("n00", 1, (), salt=1)
    assert ("n00", 1, copy) in s.buffered["n01"]


def test_first_received_copy_wins(model_cfg):
    s = apply_action(model_init(model_cfg), equivocate("n00", 1), model_cfg)
    s = _deliver_all(s, model_cfg)
    held = {s.view(p).get(1, "n00") for p in ("n01", "n02", "n03")}
    assert held <= {vertex_ref("n00", 1, ()), vertex_ref("n00", 1, (), salt=1)}
    assert not any(e[0] == "n00" and e[1] == 1 for p in ("n01", "n02", "n03") for e in s.buffered[p])


def test_reconfigure_after_quorum_passes_round():
    cfg = ModelConfig.uniform(4, round_bound=12, reconfigure_round=3)
    s = model_init(cfg)
    assert guard(s, reconfigure("n04"), cfg) is not None
    s = _round(_round(s, cfg), cfg)
    assert guard(s, reconfigure("n05"), cfg) == "new node must be n04"
    s = apply_action(s, reconfigure("n04"), cfg)
    assert s.members[-1] == "n04"
    assert s.view("n04").round == 1
    assert s.stakes["n04"] == 1
    assert guard(s, reconfigure("n05"), cfg) == "already reconfigured"


def test_reconfigure_disabled():
    cfg = ModelConfig.uniform(4, reconfigure_round=None)
    assert guard(model_init(cfg), reconfigure("n04"), cfg) == "reconfiguration disabled"


@settings(max_examples=25, deadline=None)
@given(st.integers(min_value=0, max_value=2**32), st.integers(min_value=4, max_value=6))
def test_enabled_actions_are_exactly_the_guarded_ones(seed, n):
    """Every enabled action applies; a sampled non-enabled action is refused."""
    cfg = ModelConfig.uniform(n, num_byzantine=(n - 1) // 3, round_bound=6)
    rng = SeededRandom(seed)
    s = model_init(cfg)
    for _ in range(60):
        enabled = sorted(enabled_actions(s, cfg))
        if not enabled or all_at_bound(s, cfg):
            break
        for a in enabled:
            assert guard(s, a, cfg) is None
        for p in s.members:
            for a in (next_round(p), create_vertex(p)):
                if a not in enabled:
                    with pytest.raises(PreconditionViolation):
                        apply_action(s, a, cfg)
        s = apply_action(s, rng.choice(enabled), cfg)
