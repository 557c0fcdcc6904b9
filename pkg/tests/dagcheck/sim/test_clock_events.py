import pytest

from dagcheck.errors import SchedulingError
from dagcheck.sim.clock import VirtualClock, ms_to_micros
from dagcheck.sim.events import Crash, EventQueue, TimerFire


@pytest.mark.parametrize(
    "ms, micros",
    [(25.3105, 25311), (25.3104, 25310), (20, 20000), ("0.0005", 1), (0.0004, 0), (4.0, 4000)],
)
def test_ms_to_micros_rounds_half_up(ms, micros):
    assert ms_to_micros(ms) == micros


def test_clock_never_moves_backwards():
    clock = VirtualClock()
    clock.advance_to(10)
    clock.advance_to(10)
    with pytest.raises(ValueError):
        clock.advance_to(9)
    assert clock.now == 10


def test_negative_start_is_rejected():
    with pytest.raises(ValueError):
        VirtualClock(-1)


def test_queue_orders_by_time_then_insertion():
    queue = EventQueue(VirtualClock())
    queue.schedule(50, "n01", TimerFire("n01"))
    queue.schedule(10, "n02", TimerFire("n02"))
    queue.schedule(50, "n00", Crash("n00"))
    queue.schedule(10, "n03", TimerFire("n03"))

    popped = [queue.pop() for _ in range(len(queue))]
    assert [e.target for e in popped] == ["n02", "n03", "n01", "n00"]
    assert queue.clock.now == 50
    assert not queue


def test_events_cannot_be_scheduled_in_the_past():
    queue = EventQueue(VirtualClock())
    queue.schedule(100, "n00", TimerFire("n00"))
    queue.pop()
    with pytest.raises(SchedulingError):
        queue.schedule(99, "n00", TimerFire("n00"))
    # same instant is fine
    queue.schedule(100, "n00", TimerFire("n00"))
    assert queue.peek_time() == 100
