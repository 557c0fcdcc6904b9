"""
Deterministic discrete-event simulator hosting the consensus nodes.

Two modes share one engine. A free run (``run``) is driven by node timers,
network deliveries and the seeded fault plan. A driven simulator
(``driven=True``) schedules nothing on its own; the replay layer feeds it one
event per model step through ``execute``.
"""

from __future__ import annotations

import hashlib
import io
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Dict, List, Optional, Sequence, Set, Tuple

import structlog

from dagcheck.consensus.node import Node, NodeSnapshot
from dagcheck.consensus.vertex import Vertex
from dagcheck.errors import ConfigError
from dagcheck.model.config import DEFAULT_RECONFIGURE_ROUND, ModelConfig, threshold
from dagcheck.sim.clock import MICROS_PER_SECOND, VirtualClock, ms_to_micros
from dagcheck.sim.concrete import ConcreteAction, ConcreteTrace, write_concrete
from dagcheck.sim.events import (
    NETWORK,
    Crash,
    Deliver,
    EquivocationInject,
    Event,
    EventQueue,
    Payload,
    ReconfigureAdd,
    ReviveNever,
    TimerFire,
)
from dagcheck.sim.network import Network
from dagcheck.sim.rng import SeededRandom
from dagcheck.trace.state import node_id
from dagcheck.violations import NO_VIOLATION, ViolationFlags

logger = structlog.getLogger(__name__)


@dataclass(frozen=True)
class SimConfig:
    num_nodes: int = 4
    # None: the largest count with number_faulty * 3 < num_nodes
    number_faulty: Optional[int] = None
    failure_chance: float = 0.0
    vertex_production_rate: int = 100
    message_send_delay: float = 4.0  # ms
    message_receive_delay: float = 4.0  # ms
    iteration_duration: float = 20.0  # ms
    seed: int = 0
    max_rounds: int = 30
    max_virtual_time: float = 60_000.0  # ms
    transactions_per_vertex: int = 10
    stakes: Optional[Dict[str, int]] = None
    reconfigure: bool = True
    reconfigure_round: int = DEFAULT_RECONFIGURE_ROUND
    equivocation_rounds: Tuple[int, ...] = ()
    flags: ViolationFlags = field(default=NO_VIOLATION, compare=False)

    def __post_init__(self):
        if self.num_nodes < 1:
            raise ConfigError("num_nodes must be positive")
        if self.faulty_count < 0 or self.faulty_count * 3 >= self.num_nodes:
            raise ConfigError(f"number_faulty={self.faulty_count} needs number_faulty * 3 < num_nodes")
        if not 0.0 <= self.failure_chance <= 1.0:
            raise ConfigError("failure_chance must be in [0, 1]")
        if not 0 <= self.vertex_production_rate <= 100:
            raise ConfigError("vertex_production_rate must be in [0, 100]")
        if self.message_send_delay < 0 or self.message_receive_delay < 0:
            raise ConfigError("delays must be non-negative")
        if self.iteration_duration <= 0 or ms_to_micros(self.iteration_duration) < 1:
            raise ConfigError("iteration_duration must be positive")
        if self.max_rounds < 2:
            raise ConfigError("max_rounds must be at least 2")
        if self.max_virtual_time <= 0:
            raise ConfigError("max_virtual_time must be positive")
        if self.stakes is not None and set(self.stakes) != set(self.node_ids):
            raise ConfigError("stakes must name exactly the simulated nodes")
        if self.reconfigure_round < 1:
            raise ConfigError("reconfigure_round must be positive")

    @property
    def node_ids(self) -> Tuple[str, ...]:
        return tuple(node_id(i) for i in range(self.num_nodes))

    @property
    def faulty_count(self) -> int:
        if self.number_faulty is None:
            return (self.num_nodes - 1) // 3
        return self.number_faulty

    @property
    def faulty(self) -> Tuple[str, ...]:
        return self.node_ids[: self.faulty_count]

    def stake_of(self, node: str) -> int:
        return 1 if self.stakes is None else self.stakes[node]

    @property
    def config_id(self) -> str:
        return (
            f"sim[n={self.num_nodes},f={self.faulty_count},fc={self.failure_chance:g},"
            f"it={self.iteration_duration:g}ms,d={self.message_send_delay:g}+{self.message_receive_delay:g}ms,"
            f"rate={self.vertex_production_rate},R={self.max_rounds},seed={self.seed}]"
        )

    def model_config(self) -> ModelConfig:
        return ModelConfig(
            node_set=self.node_ids,
            stakes={p: self.stake_of(p) for p in self.node_ids},
            round_bound=self.max_rounds,
            byzantine_set=self.faulty,
            reconfigure_round=self.reconfigure_round if self.reconfigure else None,
            flags=self.flags,
        )

    @classmethod
    def for_model(cls, model: ModelConfig, base: Optional["SimConfig"] = None, **overrides) -> "SimConfig":
        """Simulator configuration hosting exactly the nodes of a model configuration."""
        ids = tuple(node_id(i) for i in range(len(model.node_set)))
        if model.node_set != ids:
            raise ConfigError(f"model nodes must be named {ids[0]}..{ids[-1]} in order")
        if model.byzantine_set != ids[: len(model.byzantine_set)]:
            raise ConfigError("byzantine nodes must be the first node ids")
        values = dict(
            num_nodes=len(ids),
            number_faulty=len(model.byzantine_set),
            stakes=dict(model.stakes),
            max_rounds=model.round_bound,
            reconfigure=model.reconfigure_round is not None,
            reconfigure_round=model.reconfigure_round or DEFAULT_RECONFIGURE_ROUND,
            flags=model.flags,
        )
        if base is not None:
            values = {**{k: getattr(base, k) for k in base.__dataclass_fields__}, **values}
        values.update(overrides)
        return cls(**values)


@dataclass(frozen=True)
class FaultPlan:
    faulty: Tuple[str, ...] = ()
    failure_chance: float = 0.0
    # rounds at which every live faulty node emits a second vertex
    equivocation_rounds: Tuple[int, ...] = ()
    reconfigure_round: Optional[int] = None


def derive_fault_plan(cfg: SimConfig) -> FaultPlan:
    return FaultPlan(
        faulty=cfg.faulty,
        failure_chance=cfg.failure_chance,
        equivocation_rounds=tuple(cfg.equivocation_rounds),
        reconfigure_round=cfg.reconfigure_round if cfg.reconfigure else None,
    )


@dataclass
class SimRun:
    config: SimConfig
    trace: ConcreteTrace
    final_states: Dict[str, NodeSnapshot]
    created_at: Dict[str, int]
    duration: int  # us
    crashes: int = 0
    crashed: Tuple[str, ...] = ()

    @property
    def seed(self) -> int:
        return self.config.seed

    @property
    def round_reached(self) -> int:
        return max((s.current_round for s in self.final_states.values()), default=0)

    @cached_property
    def digest(self) -> str:
        buffer = io.StringIO()
        write_concrete(self.trace, buffer)
        return hashlib.sha256(buffer.getvalue().encode("utf-8")).hexdigest()


class Simulator:
    def __init__(
        self,
        cfg: SimConfig,
        plan: Optional[FaultPlan] = None,
        *,
        driven: bool = False,
        on_event: Optional[Callable[[Event], None]] = None,
    ):
        self.cfg = cfg
        self.plan = plan if plan is not None else derive_fault_plan(cfg)
        self.driven = driven
        self.on_event = on_event
        self.flags = cfg.flags

        self.clock = VirtualClock()
        self.queue = EventQueue(self.clock)
        self.rng = SeededRandom(cfg.seed)
        self.network = Network(
            self.queue,
            self.rng,
            ms_to_micros(cfg.message_send_delay),
            ms_to_micros(cfg.message_receive_delay),
            flags=cfg.flags,
            deliver=not driven,
        )
        self.iteration = ms_to_micros(cfg.iteration_duration)
        self.max_time = ms_to_micros(cfg.max_virtual_time)

        self.members: List[str] = list(cfg.node_ids)
        self.stakes: Dict[str, int] = {p: cfg.stake_of(p) for p in self.members}
        self.actions: List[ConcreteAction] = []
        self._seq = -1  # seq of the event being processed; -1 during setup
        self.nodes: Dict[str, Node] = {p: self._make_node(p) for p in self.members}

        self.registry: Dict[str, Vertex] = {}
        self.created_at: Dict[str, int] = {}
        self._produced: Dict[str, Tuple[int, int]] = {}
        self._equivocated: Set[Tuple[str, int]] = set()
        self.crashes = 0
        self.reconfigured = False
        self._equivocate_at: Set[Tuple[str, int]] = set()
        # node waiting to be added, and whether its ReconfigureAdd is already queued
        self._reconfigure_pending: Optional[str] = None
        self._reconfigure_queued = False

        for p in self.members:
            self._register(self.nodes[p].genesis)
        self.init_state = {p: self.nodes[p].snapshot() for p in self.members}

        if not driven:
            for p in self.members:
                self.network.broadcast(p, self.nodes[p].genesis, self.members)
            for p in self.members:
                self._start_timer(p)

    # --- setup -------------------------------------------------------------------

    def _make_node(self, p: str) -> Node:
        return Node(
            p,
            self.cfg.node_ids,
            self.stakes,
            max_rounds=self.cfg.max_rounds,
            seed=self.cfg.seed,
            transactions_per_vertex=self.cfg.transactions_per_vertex,
            flags=self.flags,
            emit=self._record,
        )

    def _start_timer(self, p: str) -> None:
        phase = self.rng.uniform_int(0, self.iteration - 1)
        self.queue.schedule(self.clock.now + phase, p, TimerFire(p))

    def _record(self, node: Node, kind: str, params: Dict) -> None:
        self.actions.append(ConcreteAction(self.clock.now, self._seq, kind, node.id, params, node.snapshot()))

    def _register(self, v: Vertex) -> None:
        self.registry.setdefault(v.id, v)
        self.created_at.setdefault(v.id, self.clock.now)

    def _send(self, node: Node, v: Vertex, receivers: Optional[Sequence[str]] = None) -> None:
        self._register(v)
        self._record(node, "impl.broadcast", {"vertex": v.id})
        self.network.broadcast(node.id, v, self.members if receivers is None else receivers)

    # --- public API --------------------------------------------------------------

    @property
    def live(self) -> List[str]:
        return [p for p in self.members if not self.nodes[p].crashed]

    def done(self) -> bool:
        return all(self.nodes[p].current_round >= self.cfg.max_rounds for p in self.live)

    def inject_fault(self, payload: Payload, at: Optional[int] = None) -> Event:
        if isinstance(payload, (Crash, EquivocationInject)) and payload.node not in self.nodes:
            raise ConfigError(f"unknown node {payload.node}")
        if isinstance(payload, ReconfigureAdd) and payload.node != self.next_member():
            raise ConfigError(f"new node must be {self.next_member()}, got {payload.node}")
        time = self.clock.now if at is None else at
        return self.queue.schedule(time, getattr(payload, "node", NETWORK), payload)

    def run(self) -> SimRun:
        """Process events until every live node reaches max_rounds or time runs out."""
        processed = 0
        while self.queue and not self.done():
            if self.queue.peek_time() > self.max_time:
                break
            self._process(self.queue.pop())
            processed += 1
        logger.info(
            "Simulation finished.",
            config_id=self.cfg.config_id,
            events=processed,
            actions=len(self.actions),
            virtual_ms=self.clock.now / 1000,
            crashes=self.crashes,
        )
        return self.result()

    def execute(self, target: str, payload: Payload, at: Optional[int] = None) -> bool:
        """Driven mode: schedule one event, process it, report whether it took effect."""
        event = self.queue.schedule(self.clock.now if at is None else max(at, self.clock.now), target, payload)
        executed = False
        while self.queue:
            current = self.queue.pop()
            took_effect = self._process(current)
            if current is event:
                executed = took_effect
        return executed

    def trace(self) -> ConcreteTrace:
        return ConcreteTrace(self.init_state, tuple(self.actions), self.cfg.seed, self.cfg.config_id)

    def result(self) -> SimRun:
        return SimRun(
            config=self.cfg,
            trace=self.trace(),
            final_states={p: self.nodes[p].snapshot() for p in self.members},
            created_at=dict(self.created_at),
            duration=self.clock.now,
            crashes=self.crashes,
            crashed=tuple(p for p in self.members if self.nodes[p].crashed),
        )

    # --- event handling ----------------------------------------------------------

    def _process(self, event: Event) -> bool:
        self._seq = event.seq
        payload = event.payload
        if isinstance(payload, TimerFire):
            done = self._on_step(payload) if payload.step else self._on_timer(payload.node)
        elif isinstance(payload, Deliver):
            done = self._on_deliver(payload)
        elif isinstance(payload, Crash):
            done = self._crash(payload.node)
        elif isinstance(payload, EquivocationInject):
            done = self._on_equivocation(payload)
        elif isinstance(payload, ReconfigureAdd):
            done = self._on_reconfigure(payload.node)
        elif isinstance(payload, ReviveNever):
            done = True
        else:
            raise TypeError(f"unknown event payload {payload!r}")
        if self.on_event is not None:
            self.on_event(event)
        return done

    def _budget_ok(self, p: str) -> bool:
        window = self.clock.now // MICROS_PER_SECOND
        current, count = self._produced.get(p, (window, 0))
        if current != window:
            count = 0
        return count < self.cfg.vertex_production_rate

    def _count_production(self, p: str) -> None:
        window = self.clock.now // MICROS_PER_SECOND
        current, count = self._produced.get(p, (window, 0))
        self._produced[p] = (window, (count if current == window else 0) + 1)

    def _on_timer(self, p: str) -> bool:
        node = self.nodes[p]
        if node.crashed:
            return False
        if p in self.plan.faulty and self.rng.chance(self.plan.failure_chance):
            return self._crash(p)
        created = node.on_timer(self._budget_ok(p))
        if created is not None:
            self._count_production(p)
            if self._equivocates(p, created.round):
                self._equivocate(node, created)
            else:
                self._send(node, created)
        self._after_step()
        self.queue.schedule(self.clock.now + self.iteration, p, TimerFire(p))
        return True

    def _on_step(self, fire: TimerFire) -> bool:
        node = self.nodes.get(fire.node)
        if node is None or node.crashed:
            return False
        if fire.step == "advance":
            done = node.advance_round()
        elif fire.step == "create":
            created = node.create_vertex()
            if created is not None:
                self._send(node, created)
            done = created is not None
        elif fire.step == "commit":
            done = node.commit_next() is not None
        else:
            raise ValueError(f"unknown timer step {fire.step!r}")
        self._after_step()
        return done

    def _on_deliver(self, d: Deliver) -> bool:
        node = self.nodes.get(d.receiver)
        if node is None or node.crashed:
            return False
        inserted = node.on_receive(d.vertex, d.sender, settle=not self.driven)
        self._after_step()
        return inserted

    def _crash(self, p: str) -> bool:
        node = self.nodes[p]
        if node.crashed:
            return False
        node.crash()
        self.crashes += 1
        logger.debug("Node crashed.", node=p, time=self.clock.now)
        return True

    def _on_equivocation(self, e: EquivocationInject) -> bool:
        node = self.nodes[e.node]
        if node.crashed or (e.node, e.round) in self._equivocated:
            return False
        original = node.own(e.round)
        if original is None:
            if self.driven:
                return False
            # the split is decided when the round's vertex is created
            self._equivocate_at.add((e.node, e.round))
            return False
        return self._equivocate(node, original, sent=True)

    def _equivocates(self, p: str, r: int) -> bool:
        if (p, r) in self._equivocated:
            return False
        return (p in self.plan.faulty and r in self.plan.equivocation_rounds) or (p, r) in self._equivocate_at

    def _split_peers(self, p: str) -> Tuple[List[str], List[str]]:
        peers = self.rng.shuffled([q for q in self.members if q != p])
        cut = (len(peers) + 1) // 2
        return sorted(peers[:cut]), sorted(peers[cut:])

    def _equivocate(self, node: Node, original: Vertex, sent: bool = False) -> bool:
        """Original and copy go to disjoint peer subsets; a copy of an already sent vertex goes to one side."""
        copy = node.equivocate(original.round)
        if copy is None:
            if not sent:
                self._send(node, original)
            return False
        self._equivocated.add((node.id, original.round))
        self._equivocate_at.discard((node.id, original.round))
        ours, theirs = self._split_peers(node.id)
        if not sent:
            self._send(node, original, ours)
        self._send(node, copy, theirs)
        logger.debug("Equivocated.", node=node.id, round=original.round, original_to=ours, copy_to=theirs)
        return True

    def _after_step(self) -> None:
        if not self.driven:
            self._maybe_reconfigure()

    # --- reconfiguration ---------------------------------------------------------

    def next_member(self) -> str:
        i = len(self.members)
        while node_id(i) in self.members:
            i += 1
        return node_id(i)

    def _reconfigure_round(self) -> Optional[int]:
        if self.plan.reconfigure_round is not None:
            return self.plan.reconfigure_round
        # an injected addition without a planned round waits for the default one
        return DEFAULT_RECONFIGURE_ROUND if self._reconfigure_pending is not None else None

    def reconfigure_ready(self) -> bool:
        r0 = self._reconfigure_round()
        if r0 is None or self.reconfigured:
            return False
        passed = sum(self.stakes[p] for p in self.members if self.nodes[p].current_round >= r0)
        return passed >= threshold(sum(self.stakes.values()))

    def _maybe_reconfigure(self) -> None:
        if self.reconfigured or self._reconfigure_queued:
            return
        if self._reconfigure_pending is None and self.plan.reconfigure_round is not None:
            self._reconfigure_pending = self.next_member()
        if self._reconfigure_pending is not None and self.reconfigure_ready():
            self._reconfigure_queued = True
            self.inject_fault(ReconfigureAdd(self._reconfigure_pending))

    def _on_reconfigure(self, n: str) -> bool:
        if self.reconfigured or n != self.next_member():
            return False
        if not self.reconfigure_ready():
            if not self.driven:
                # deferred; _maybe_reconfigure queues it again once the stake has passed R0
                self._reconfigure_pending = n
                self._reconfigure_queued = False
            return False
        if self.flags.has("V5"):
            logger.debug("Reconfiguration unsupported; node not added.", node=n)
            return False
        for p in self.members:
            self.nodes[p].add_member(n, 1)
        self.stakes[n] = 1
        existing = sorted(self.registry.values(), key=lambda v: (v.round, v.creator, v.id))
        self.members.append(n)
        node = self._make_node(n)
        self.nodes[n] = node
        self.reconfigured = True
        self._record(node, "impl.reconfigure", {"stake": 1})
        self._register(node.genesis)
        logger.info("Node added.", node=n, time=self.clock.now, members=len(self.members))
        # the joining node receives every vertex created so far
        for v in existing:
            self.network.send(NETWORK, n, v)
        for p in self.members[:-1]:
            self.network.send(n, p, node.genesis)
        if not self.driven:
            self._start_timer(n)
        return True


def run(cfg: SimConfig, faults: Optional[FaultPlan] = None, **kwargs) -> SimRun:
    return Simulator(cfg, faults, **kwargs).run()
