"""
Trace acceptance (is this trace a behaviour of the model?) and safety
invariant checking over traces.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, Iterator, Optional, Tuple

import structlog

from dagcheck.errors import PreconditionViolation
from dagcheck.model.config import ModelConfig
from dagcheck.model.lts import ModelState, apply_action, model_init
from dagcheck.trace.state import SENTINEL, AbstractState, NodeView
from dagcheck.trace.trace import Trace

logger = structlog.getLogger(__name__)


class RejectReason(str, Enum):
    INIT = "init"  # initial digests differ
    GUARD = "guard"  # action not enabled
    DIGEST = "digest"  # successor digest differs from the recorded one


@dataclass(frozen=True)
class Verdict:
    accepted: bool
    step: Optional[int] = None
    reason: Optional[RejectReason] = None
    detail: str = ""
    expected_state: Optional[AbstractState] = field(default=None, compare=False, repr=False)

    def __bool__(self) -> bool:
        return self.accepted


ACCEPT = Verdict(True)


def accept_trace(trace: Trace, cfg: ModelConfig) -> Verdict:
    """Replay the trace through the model, checking guards and digests."""
    state = model_init(cfg)
    if state.digest != trace.init_digest:
        return Verdict(False, 0, RejectReason.INIT, "initial state differs from the model's", state.abstract)
    for i, step in enumerate(trace.steps):
        try:
            state = apply_action(state, step.action, cfg)
        except PreconditionViolation as e:
            return Verdict(False, i, RejectReason.GUARD, f"{step.action}: {e.reason}", state.abstract)
        if state.digest != step.post_digest:
            return Verdict(
                False, i, RejectReason.DIGEST, f"{step.action}: successor digest differs", state.abstract
            )
    return ACCEPT


@dataclass
class InvariantReport:
    leader_consistency: bool = True
    leader_monotonicity: bool = True
    dag_consistency: bool = True
    block_consistency: bool = True
    first_violation: Optional[Tuple[int, str]] = None

    @property
    def ok(self) -> bool:
        return self.first_violation is None

    def _fail(self, flag: str, step: int, description: str) -> None:
        if getattr(self, flag):
            setattr(self, flag, False)
        if self.first_violation is None:
            self.first_violation = (step, description)


def _states(trace: Trace, cfg: ModelConfig) -> Iterator[Tuple[int, AbstractState]]:
    replay: Optional[ModelState] = None
    for i, step in enumerate(trace.steps):
        if step.post_state is not None:
            yield i, step.post_state
            continue
        if replay is None:
            replay = model_init(cfg)
            for earlier in trace.steps[:i]:
                replay = apply_action(replay, earlier.action, cfg)
        try:
            replay = apply_action(replay, step.action, cfg)
        except PreconditionViolation:
            logger.warning("Invariant check stopped at an unreplayable step.", step=i)
            return
        yield i, replay.abstract


def check_invariants(trace: Trace, cfg: ModelConfig) -> InvariantReport:
    """Leader consistency/monotonicity, DAG and block consistency at every step.

    Only nodes outside the byzantine set count as honest. Work is incremental:
    a node is re-examined only when its view digest changes.
    """
    report = InvariantReport()
    byzantine = set(cfg.byzantine_set)
    initial = trace.init_state or model_init(cfg).abstract
    previous: Dict[str, NodeView] = dict(initial.views)
    seen_leader: Dict[int, Tuple[str, str]] = {}
    seen_block: Dict[int, Tuple[str, str]] = {}
    seen_slot: Dict[Tuple[int, str], Tuple[str, str]] = {}

    for i, state in _states(trace, cfg):
        for p, view in state.views.items():
            before = previous.get(p)
            if before is not None and before.digest == view.digest:
                continue
            previous[p] = view

            for r, row in view.rows.items():
                if before is not None and before.row(r) == row:
                    continue
                for q, ref in row.entries:
                    if q in byzantine:
                        continue
                    holder = seen_slot.setdefault((r, q), (ref, p))
                    if holder[0] != ref and report.dag_consistency:
                        report._fail(
                            "dag_consistency", i,
                            f"{p} and {holder[1]} hold different round-{r} vertices of honest {q}",
                        )

            if p in byzantine:
                continue
            waves = [w for w, ref in view.leaders if ref is not None and ref != SENTINEL]
            if any(b <= a for a, b in zip(waves, waves[1:])) and report.leader_monotonicity:
                report._fail("leader_monotonicity", i, f"{p} committed waves {waves}")
            for w, ref in view.leaders:
                if ref is None or ref == SENTINEL:
                    continue
                holder = seen_leader.setdefault(w, (ref, p))
                if holder[0] != ref and report.leader_consistency:
                    report._fail("leader_consistency", i, f"{p} and {holder[1]} committed different wave-{w} leaders")
            for w, digest in view.blocks:
                holder = seen_block.setdefault(w, (digest, p))
                if holder[0] != digest and report.block_consistency:
                    report._fail("block_consistency", i, f"{p} and {holder[1]} formed different wave-{w} blocks")

    if not report.ok:
        logger.info("Invariant violated.", step=report.first_violation[0], reason=report.first_violation[1])
    return report
