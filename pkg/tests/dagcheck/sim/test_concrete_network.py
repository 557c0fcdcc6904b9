import io

import pytest

from dagcheck.consensus.vertex import Vertex
from dagcheck.errors import TraceParseError
from dagcheck.sim.clock import VirtualClock
from dagcheck.sim.concrete import load_concrete, read_concrete, save_concrete, write_concrete
from dagcheck.sim.engine import run
from dagcheck.sim.events import EventQueue
from dagcheck.sim.network import Network
from dagcheck.sim.rng import SeededRandom
from dagcheck.violations import inject_seeded_violation


@pytest.fixture
def sim_run(sim_cfg):
    return run(sim_cfg)


def test_concrete_trace_file_keeps_snapshots(sim_run, tmp_path):
    path = save_concrete(sim_run.trace, tmp_path / "trace.jsonl")
    loaded = load_concrete(path)
    assert loaded.kinds == sim_run.trace.kinds
    assert loaded.seed == sim_run.trace.seed
    assert loaded.config_id == sim_run.trace.config_id
    assert loaded.actions[-1].snapshot == sim_run.trace.actions[-1].snapshot
    assert loaded.init_state == sim_run.trace.init_state


def test_concrete_encoding_is_byte_stable(sim_run, tmp_path):
    first = save_concrete(sim_run.trace, tmp_path / "a.jsonl").read_bytes()
    second = save_concrete(load_concrete(tmp_path / "a.jsonl"), tmp_path / "b.jsonl").read_bytes()
    assert first == second


def test_truncated_concrete_trace_is_rejected(sim_run):
    buffer = io.StringIO()
    write_concrete(sim_run.trace, buffer)
    text = buffer.getvalue()
    with pytest.raises(TraceParseError, match="truncated"):
        read_concrete(io.StringIO(text[:-7]))


def test_concrete_header_is_required():
    with pytest.raises(TraceParseError):
        read_concrete(io.StringIO('{"version": 99}\n'))
    with pytest.raises(TraceParseError) as e:
        read_concrete(io.StringIO("not json\n"))
    assert e.value.line == 1


def _network(flags=None):
    queue = EventQueue(VirtualClock())
    rng = SeededRandom(1)
    kwargs = {} if flags is None else {"flags": flags}
    return Network(queue, rng, 4000, 4000, **kwargs), queue, rng


def test_broadcast_reaches_every_other_member():
    network, queue, _ = _network()
    v = Vertex("n00", 1)
    assert network.broadcast("n00", v, ["n00", "n01", "n02", "n03"]) == 3
    assert len(queue) == 3
    assert queue.peek_time() == network.latency == 8000
    assert [s.receiver for s in network.sends_of(v.id)] == ["n01", "n02", "n03"]


def test_pristine_network_never_duplicates():
    network, queue, rng = _network()
    for i in range(200):
        network.send("n00", "n01", Vertex("n00", 1, salt=i))
    assert len(queue) == 200
    assert rng.draws == 0


def test_duplicate_delivery_only_under_v3():
    network, queue, _ = _network(inject_seeded_violation("V3"))
    for i in range(400):
        network.send("n00", "n01", Vertex("n00", 1, salt=i))
    duplicates = [s for s in network.log if s.duplicate]
    assert duplicates
    assert len(queue) == 400 + len(duplicates)


def test_negative_delay_is_rejected():
    with pytest.raises(ValueError):
        Network(EventQueue(VirtualClock()), SeededRandom(0), -1, 0)
