"""Abstraction of concrete simulator traces into model traces."""

from __future__ import annotations

from typing import Any, Dict, List, Mapping

import structlog

from dagcheck.errors import EmptyTraceError, HarnessError, MappingCoverageError
from dagcheck.mapping.table import NODE_PARAM, MappingTable
from dagcheck.sim.concrete import ConcreteAction, ConcreteTrace
from dagcheck.trace.actions import AbstractAction
from dagcheck.trace.state import AbstractState, DagRow, NodeView
from dagcheck.trace.trace import Trace, TraceMeta, TraceStep

logger = structlog.getLogger(__name__)


def project_view(snapshot: Any, table: MappingTable) -> NodeView:
    """Select and rename the concrete fields of one node into its abstract view."""
    proj = table.state_projection
    dag = getattr(snapshot, proj["dag"])
    return NodeView(
        round=getattr(snapshot, proj["round"]),
        rows={r: DagRow.of(tuple(row)) for r, row in dag.items() if row},
        leaders=tuple(getattr(snapshot, proj["leaders"])),
        blocks=tuple(getattr(snapshot, proj["blocks"])),
    )


def project_state(snapshots: Mapping[str, Any], table: MappingTable) -> AbstractState:
    views = {p: project_view(s, table) for p, s in snapshots.items()}
    faulty = frozenset(p for p, s in snapshots.items() if getattr(s, table.state_projection["faulty"]))
    return AbstractState(views, faulty)


def advance_state(state: AbstractState, node: str, snapshot: Any, table: MappingTable) -> AbstractState:
    state = state.replace(node, project_view(snapshot, table))
    if getattr(snapshot, table.state_projection["faulty"]) and node not in state.faulty:
        state = state.with_faulty(node)
    return state


def _param(group_actions: List[ConcreteAction], source: str) -> Any:
    if source == NODE_PARAM:
        return group_actions[0].node
    for a in group_actions:
        if source in a.params:
            return a.params[source]
    raise KeyError(source)


def abstract_trace(concrete: ConcreteTrace, table: MappingTable) -> Trace:
    """Drop internal actions, collapse groups, keep only group post-states."""
    actions = concrete.actions
    if not actions:
        raise EmptyTraceError("cannot abstract an empty concrete trace")
    state = project_state(concrete.init_state, table)
    init = state
    steps: List[TraceStep] = []
    i = 0
    while i < len(actions):
        head = actions[i]
        if table.is_internal(head.kind):
            i += 1
            continue
        group = table.group_for(head.kind)
        if group is None:
            raise MappingCoverageError(head.kind, i)
        members = [head]
        for expected in group.pattern[1:]:
            j = i + len(members)
            if j >= len(actions) or actions[j].kind != expected or actions[j].node != head.node:
                raise MappingCoverageError(head.kind, i)
            members.append(actions[j])
        try:
            params: Dict[str, Any] = {name: _param(members, src) for name, src in group.params.items()}
        except KeyError as e:
            raise HarnessError(f"{head.kind} at index {i} lacks parameter {e.args[0]!r}") from e
        last = members[-1]
        if last.snapshot is None:
            raise HarnessError(f"{last.kind} at index {i + len(members) - 1} carries no snapshot")
        state = advance_state(state, last.node, last.snapshot, table)
        steps.append(TraceStep(AbstractAction.of(group.kind, **params), state.digest, state))
        i += len(members)
    if not steps:
        raise EmptyTraceError("concrete trace has no observable actions")
    logger.debug("Abstracted trace.", concrete=len(actions), abstract=len(steps))
    return Trace(
        init.digest,
        tuple(steps),
        TraceMeta(source="simulator", seed=concrete.seed, config_id=concrete.config_id),
        init_state=init,
    )
