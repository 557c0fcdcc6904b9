"""Events and the (time, seq)-ordered event queue of the simulator."""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field
from typing import Any, List, Optional, Union

from dagcheck.errors import SchedulingError
from dagcheck.sim.clock import VirtualClock

NETWORK = "network"


@dataclass(frozen=True)
class TimerFire:
    node: str
    # None: a regular iteration. Driven replay sets one of advance/create/commit.
    step: Optional[str] = None


@dataclass(frozen=True)
class Deliver:
    vertex: Any
    sender: str
    receiver: str


@dataclass(frozen=True)
class Crash:
    node: str


@dataclass(frozen=True)
class ReviveNever:
    """Marks that a crash is permanent; never schedules a revival."""

    node: str


@dataclass(frozen=True)
class EquivocationInject:
    node: str
    round: int


@dataclass(frozen=True)
class ReconfigureAdd:
    node: str


Payload = Union[TimerFire, Deliver, Crash, ReviveNever, EquivocationInject, ReconfigureAdd]


@dataclass(frozen=True, order=True)
class Event:
    time: int
    seq: int
    target: str = field(compare=False)
    payload: Payload = field(compare=False)


class EventQueue:
    """Min-heap on (time, seq); seq comes from one counter per run."""

    def __init__(self, clock: VirtualClock):
        self.clock = clock
        self._heap: List[Event] = []
        self._seq = 0

    def schedule(self, time: int, target: str, payload: Payload) -> Event:
        if time < self.clock.now:
            raise SchedulingError(f"event {payload} at {time}us is before now ({self.clock.now}us)")
        event = Event(time, self._seq, target, payload)
        self._seq += 1
        heapq.heappush(self._heap, event)
        return event

    def pop(self) -> Event:
        event = heapq.heappop(self._heap)
        self.clock.advance_to(event.time)
        return event

    def peek_time(self) -> Optional[int]:
        return self._heap[0].time if self._heap else None

    def __len__(self) -> int:
        return len(self._heap)

    def __bool__(self) -> bool:
        return bool(self._heap)
