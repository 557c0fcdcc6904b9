"""Fully connected simulated network with uniform delays."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, List

import structlog

from dagcheck.sim.events import NETWORK, Deliver, EventQueue
from dagcheck.sim.rng import SeededRandom
from dagcheck.violations import NO_VIOLATION, ViolationFlags

logger = structlog.getLogger(__name__)

# probability that a send is delivered twice when duplicate delivery is seeded
DUPLICATE_CHANCE = 0.05


@dataclass(frozen=True)
class SendRecord:
    time: int
    sender: str
    receiver: str
    vertex: str
    duplicate: bool = False


class Network:
    def __init__(
        self,
        queue: EventQueue,
        rng: SeededRandom,
        send_delay: int,
        receive_delay: int,
        flags: ViolationFlags = NO_VIOLATION,
        deliver: bool = True,
    ):
        if send_delay < 0 or receive_delay < 0:
            raise ValueError("delays must be non-negative")
        self.queue = queue
        self.rng = rng
        self.send_delay = send_delay
        self.receive_delay = receive_delay
        self.flags = flags
        # driven replays record sends but schedule no deliveries
        self.deliver = deliver
        self.log: List[SendRecord] = []

    @property
    def latency(self) -> int:
        return self.send_delay + self.receive_delay

    def send(self, sender: str, receiver: str, vertex) -> None:
        now = self.queue.clock.now
        self.log.append(SendRecord(now, sender, receiver, vertex.id))
        if not self.deliver:
            return
        payload = Deliver(vertex, sender, receiver)
        self.queue.schedule(now + self.latency, NETWORK, payload)
        # the draw is only taken when the defect is active so pristine runs keep their stream
        if self.flags.has("V3") and self.rng.chance(DUPLICATE_CHANCE):
            self.log.append(SendRecord(now, sender, receiver, vertex.id, duplicate=True))
            self.queue.schedule(now + self.latency, NETWORK, payload)
            logger.debug("Duplicated a delivery.", sender=sender, receiver=receiver, vertex=vertex.id[:12])

    def broadcast(self, sender: str, vertex, members: Iterable[str]) -> int:
        count = 0
        for receiver in members:
            if receiver != sender:
                self.send(sender, receiver, vertex)
                count += 1
        return count

    def sends_of(self, vertex_id: str) -> List[SendRecord]:
        return [s for s in self.log if s.vertex == vertex_id]
