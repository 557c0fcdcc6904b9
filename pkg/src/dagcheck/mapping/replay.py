"""
Replay of model traces on a driven simulator.

Every abstract action is concretized into one event scheduled at the earliest
virtual time it can happen (deliveries wait for the network latency after the
vertex was created). After the event the projected state of the simulator must
have the digest the model recorded for that step.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Optional, Tuple

import structlog

from dagcheck.mapping.abstraction import advance_state, project_state
from dagcheck.mapping.table import MappingTable
from dagcheck.model.config import ModelConfig
from dagcheck.sim.concrete import ConcreteTrace
from dagcheck.sim.engine import SimConfig, Simulator
from dagcheck.sim.events import (
    NETWORK,
    Deliver,
    EquivocationInject,
    Payload,
    ReconfigureAdd,
    TimerFire,
)
from dagcheck.trace.actions import AbstractAction, ActionKind
from dagcheck.trace.state import state_diff
from dagcheck.trace.trace import Trace

logger = structlog.getLogger(__name__)


class DivergenceKind(str, Enum):
    INIT = "init"
    NOT_EXECUTABLE = "not-executable"
    DIGEST = "digest"


@dataclass(frozen=True)
class Divergence:
    step: int
    kind: DivergenceKind
    action: Optional[AbstractAction]
    expected_digest: str
    actual_digest: str
    diff: Tuple[str, ...] = ()

    @property
    def reason(self) -> str:
        where = f"step {self.step}" + (f" ({self.action})" if self.action else "")
        if self.kind is DivergenceKind.NOT_EXECUTABLE:
            return f"{where}: implementation cannot execute the model action"
        if self.kind is DivergenceKind.INIT:
            return "initial states differ"
        return f"{where}: implementation state differs from the model's"


@dataclass(frozen=True)
class ReplayOutcome:
    divergence: Optional[Divergence]
    concrete: ConcreteTrace = field(repr=False)
    steps_executed: int = 0

    @property
    def passed(self) -> bool:
        return self.divergence is None

    def __bool__(self) -> bool:
        return self.passed


def concretize(action: AbstractAction, sim: Simulator) -> Optional[Tuple[str, Payload, Optional[int]]]:
    """One canonical (target, payload, earliest time) for an abstract action."""
    kind = action.kind
    if kind is ActionKind.NEXT_ROUND:
        return action["p"], TimerFire(action["p"], "advance"), None
    if kind is ActionKind.CREATE_VERTEX:
        return action["p"], TimerFire(action["p"], "create"), None
    if kind is ActionKind.COMMIT_LEADER:
        return action["p"], TimerFire(action["p"], "commit"), None
    if kind is ActionKind.RECEIVE_VERTEX:
        vertex = sim.registry.get(action["v"])
        if vertex is None:
            return None
        at = sim.created_at[vertex.id] + sim.network.latency
        return NETWORK, Deliver(vertex, action["q"], action["p"]), at
    if kind is ActionKind.EQUIVOCATE:
        return action["b"], EquivocationInject(action["b"], action["r"]), None
    if kind is ActionKind.RECONFIGURE:
        return NETWORK, ReconfigureAdd(action["n"]), None
    return None


def _touched(sim: Simulator, since: int) -> Tuple[str, ...]:
    return tuple(dict.fromkeys(a.node for a in sim.actions[since:] if a.node in sim.nodes))


def replay_check(
    trace: Trace,
    table: MappingTable,
    model_cfg: ModelConfig,
    sim_cfg: Optional[SimConfig] = None,
    verbose: bool = True,
) -> ReplayOutcome:
    """Drive the implementation through the model trace, step by step."""
    sim = Simulator(SimConfig.for_model(model_cfg, base=sim_cfg), driven=True)
    state = project_state(sim.init_state, table)
    if state.digest != trace.init_digest:
        diff = tuple(state_diff(trace.init_state, state)) if verbose and trace.init_state else ()
        divergence = Divergence(0, DivergenceKind.INIT, None, trace.init_digest, state.digest, diff)
        return ReplayOutcome(divergence, sim.trace())

    for i, step in enumerate(trace.steps):
        cursor = len(sim.actions)
        concrete = concretize(step.action, sim)
        executed = concrete is not None and sim.execute(*concrete)
        for p in _touched(sim, cursor):
            state = advance_state(state, p, sim.nodes[p].snapshot(), table)
        if not executed:
            divergence = Divergence(i, DivergenceKind.NOT_EXECUTABLE, step.action, step.post_digest, state.digest)
            logger.info("Replay diverged.", step=i, action=str(step.action), kind=divergence.kind.value)
            return ReplayOutcome(divergence, sim.trace(), i)
        if state.digest != step.post_digest:
            diff = tuple(state_diff(step.post_state, state)) if verbose and step.post_state else ()
            divergence = Divergence(i, DivergenceKind.DIGEST, step.action, step.post_digest, state.digest, diff)
            logger.info("Replay diverged.", step=i, action=str(step.action), kind=divergence.kind.value)
            return ReplayOutcome(divergence, sim.trace(), i)

    return ReplayOutcome(None, sim.trace(), len(trace))
