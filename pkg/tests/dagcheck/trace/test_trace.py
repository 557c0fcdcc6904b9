import io

import pytest

from dagcheck.errors import TraceParseError
from dagcheck.trace.actions import AbstractAction, ActionKind, next_round, receive_vertex
from dagcheck.trace.trace import (
    Trace,
    TraceMeta,
    TraceStep,
    deserialize_trace,
    hash_trace,
    load_trace,
    read_trace,
    save_trace,
    serialize_trace,
)


def test_action_params_are_validated():
    with pytest.raises(ValueError):
        AbstractAction.of(ActionKind.NEXT_ROUND)
    with pytest.raises(ValueError):
        AbstractAction.of(ActionKind.RECEIVE_VERTEX, p="n00", q="n01", r="1", v="x")


def test_actions_order_canonically():
    a = receive_vertex("n00", "n01", 1, "aa")
    b = next_round("n00")
    assert sorted([b, a]) == sorted([a, b])
    assert str(b) == "NextRound(p=n00)"


def test_hash_ignores_meta_and_states(walk_trace):
    other = walk_trace.with_meta(TraceMeta(source="simulator", seed=99, config_id="x"))
    assert hash_trace(other) == hash_trace(walk_trace)
    stripped = Trace(walk_trace.init_digest, tuple(TraceStep(s.action, s.post_digest) for s in walk_trace.steps))
    assert hash_trace(stripped) == hash_trace(walk_trace)


def test_hash_depends_on_order(walk_trace):
    assert hash_trace(walk_trace.prefix(len(walk_trace) - 1)) != hash_trace(walk_trace)
    assert len(hash_trace(walk_trace)) == 64


def test_file_round_trip_keeps_hash(tmp_path, walk_trace):
    path = save_trace(walk_trace, tmp_path / "t.jsonl", include_states=True)
    loaded = load_trace(path)
    assert hash_trace(loaded) == hash_trace(walk_trace)
    assert loaded.steps[-1].post_state.digest == walk_trace.steps[-1].post_digest
    assert loaded.meta.source == "model"


def test_serialization_is_byte_stable(walk_trace):
    assert serialize_trace(walk_trace) == serialize_trace(deserialize_trace(serialize_trace(walk_trace)))


def test_truncated_record_reports_line(walk_trace):
    text = serialize_trace(walk_trace).decode("utf-8")
    truncated = text[: len(text) - 5]
    with pytest.raises(TraceParseError) as info:
        read_trace(io.StringIO(truncated))
    assert info.value.line == len(walk_trace) + 1


def test_bad_json_reports_offset():
    lines = ['{"version": 1, "source": "model", "init_digest": "ab"}\n', '{"action": oops}\n']
    with pytest.raises(TraceParseError) as info:
        read_trace(lines)
    assert info.value.line == 2
    assert info.value.offset is not None


def test_header_only_file_is_rejected():
    with pytest.raises(TraceParseError):
        read_trace(['{"version": 1, "source": "model", "init_digest": "ab"}\n'])


def test_post_state_must_match_digest(walk_trace):
    step = walk_trace.steps[0]
    with pytest.raises(ValueError):
        TraceStep(step.action, "0" * 64, step.post_state)
