"""
Violation classification and the conformance report.

A failed check is evidence: an invariant report of an abstracted simulator
trace (Prop), a model rejection of a simulator trace (TypeI) or a replay
divergence of a model trace (TypeII).
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple, Union

import structlog

from dagcheck.mapping.replay import Divergence
from dagcheck.model.checker import InvariantReport, RejectReason, Verdict
from dagcheck.trace.state import state_diff
from dagcheck.trace.trace import Trace, save_trace
from dagcheck.violations import Classification, ViolationFlags

logger = structlog.getLogger(__name__)

REPORT_NAME = "report.json"
Evidence = Union[InvariantReport, Verdict, Divergence]


def classify(evidence: Evidence) -> Classification:
    if isinstance(evidence, InvariantReport):
        if evidence.ok:
            raise ValueError("an intact invariant report is not evidence of a violation")
        return Classification.PROP
    if isinstance(evidence, Verdict):
        if evidence.accepted:
            raise ValueError("an accepting verdict is not evidence of a violation")
        return Classification.TYPE_I
    if isinstance(evidence, Divergence):
        return Classification.TYPE_II
    raise TypeError(f"unsupported evidence {type(evidence).__name__}")


@dataclass
class ViolationReport:
    classification: Classification
    # fuzzed values + simulator seed (Workflow I) or walk seed + trace hash (Workflow II)
    trigger: Dict[str, Any]
    step: int
    reason: str
    trace_hash: str
    counterexample: Optional[str] = None
    expected_digest: Optional[str] = None
    actual_digest: Optional[str] = None
    diff: Tuple[str, ...] = ()
    seeded_violation: Optional[str] = None
    fix_site: Optional[str] = None

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        data["classification"] = self.classification.value
        data["diff"] = list(self.diff)
        return data


def report_violation(
    evidence: Evidence,
    trace: Trace,
    trace_hash: str,
    trigger: Dict[str, Any],
    flags: ViolationFlags,
) -> Tuple[ViolationReport, Trace]:
    """ViolationReport plus the counterexample prefix (up to and including the failing step)."""
    classification = classify(evidence)
    expected = actual = None
    diff: Tuple[str, ...] = ()
    if isinstance(evidence, InvariantReport):
        step, reason = evidence.first_violation
    elif isinstance(evidence, Verdict):
        step, reason = evidence.step or 0, f"{evidence.reason.value}: {evidence.detail}"
        if evidence.reason is RejectReason.INIT:
            actual, observed = trace.init_digest, trace.init_state
        else:
            actual, observed = trace.steps[step].post_digest, trace.steps[step].post_state
        if evidence.expected_state is not None:
            # on a guard rejection this is the state the action was refused in
            expected = evidence.expected_state.digest
            if observed is not None:
                diff = tuple(state_diff(evidence.expected_state, observed))
    else:
        step, reason = evidence.step, evidence.reason
        expected, actual, diff = evidence.expected_digest, evidence.actual_digest, evidence.diff

    violation = flags.violation
    report = ViolationReport(
        classification=classification,
        trigger=trigger,
        step=step,
        reason=reason,
        trace_hash=trace_hash,
        expected_digest=expected,
        actual_digest=actual,
        diff=diff,
        seeded_violation=violation.id if violation else None,
        fix_site=violation.fix_site if violation else None,
    )
    logger.info(
        "Violation found.", classification=classification.value, step=step, reason=reason, violation=report.seeded_violation
    )
    return report, trace.prefix(min(step + 1, len(trace)))


@dataclass
class BatchRecord:
    iteration: int
    workflow: str
    traces: int
    skipped: int = 0
    violation: Optional[int] = None  # index into ConformanceReport.violations
    exhausted: bool = False


@dataclass
class ConformanceReport:
    seeded_violation: Optional[str] = None
    batches: List[BatchRecord] = field(default_factory=list)
    violations: List[ViolationReport] = field(default_factory=list)
    stopped: str = "budget"

    @property
    def traces_checked(self) -> int:
        return sum(b.traces for b in self.batches)

    def add_violation(self, report: ViolationReport, prefix: Trace, output_dir: Optional[Path]) -> int:
        index = len(self.violations)
        if output_dir is not None:
            path = save_trace(prefix, Path(output_dir) / f"counterexample-{index:03d}.jsonl", include_states=True)
            report.counterexample = str(path)
        self.violations.append(report)
        return index

    def to_dict(self) -> Dict[str, Any]:
        return {
            "seeded_violation": self.seeded_violation,
            "stopped": self.stopped,
            "traces_checked": self.traces_checked,
            "batches": [asdict(b) for b in self.batches],
            "violations": [v.to_dict() for v in self.violations],
        }

    def write(self, output_dir: Union[str, Path]) -> Path:
        path = Path(output_dir) / REPORT_NAME
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(json.dumps(self.to_dict(), sort_keys=True, indent=2) + "\n", encoding="utf-8")
        return path
