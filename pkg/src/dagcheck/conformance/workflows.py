"""
Model-guided conformance testing.

Workflow I fuzzes the simulator over a parameter grid and checks every
abstracted trace against the model; Workflow II random-walks the model and
replays every trace on the simulator. ``conf_test`` alternates the two,
starting with Workflow I, and uses the trace store to only ever check traces
it has not seen before.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import TYPE_CHECKING, Any, Dict, List, Optional, Tuple

import structlog

from dagcheck.conformance.grid import map_ordered, sim_configs
from dagcheck.conformance.report import BatchRecord, ConformanceReport, ViolationReport, report_violation
from dagcheck.errors import EmptyTraceError
from dagcheck.mapping.abstraction import abstract_trace
from dagcheck.mapping.replay import replay_check
from dagcheck.mapping.table import MappingTable
from dagcheck.metrics import CampaignMonitor, MetricsRecord, compute_metrics
from dagcheck.model.checker import InvariantReport, Verdict, accept_trace, check_invariants
from dagcheck.model.walk import model_random_walk, random_walk
from dagcheck.sim.engine import SimConfig, run
from dagcheck.sim.rng import derive_seed
from dagcheck.trace.store import TraceStore
from dagcheck.trace.trace import Trace, hash_trace

if TYPE_CHECKING:
    from dagcheck.config.manager import HarnessConfig

logger = structlog.getLogger(__name__)

WORKFLOW_I = "I"
WORKFLOW_II = "II"


@dataclass
class WorkflowResult:
    workflow: str
    # hashes of the new traces that passed, in check order
    traces: List[str] = field(default_factory=list)
    # the passed traces themselves, parallel to `traces`
    passed: List[Trace] = field(default_factory=list, repr=False)
    skipped: int = 0
    violations: List[Tuple[ViolationReport, Trace]] = field(default_factory=list)
    exhausted: bool = False

    @property
    def violation(self) -> Optional[ViolationReport]:
        return self.violations[0][0] if self.violations else None


@dataclass
class CombinationOutcome:
    index: int
    values: Dict[str, Any]
    config: SimConfig
    trace: Optional[Trace] = None
    trace_hash: Optional[str] = None
    invariants: Optional[InvariantReport] = None
    verdict: Optional[Verdict] = None
    metrics: Optional[MetricsRecord] = None


def check_combination(job: Tuple[int, Dict[str, Any], SimConfig, MappingTable, frozenset]) -> CombinationOutcome:
    """Run, abstract and check one grid combination; picklable for process pools."""
    index, values, sim_cfg, table, seen = job
    outcome = CombinationOutcome(index, values, sim_cfg)
    sim_run = run(sim_cfg)
    outcome.metrics = compute_metrics(sim_run)
    try:
        outcome.trace = abstract_trace(sim_run.trace, table)
    except EmptyTraceError:
        logger.warning("Simulator run produced no observable actions.", config_id=sim_cfg.config_id)
        return outcome
    outcome.trace_hash = hash_trace(outcome.trace)
    if outcome.trace_hash in seen:
        return outcome
    model_cfg = sim_cfg.model_config()
    outcome.invariants = check_invariants(outcome.trace, model_cfg)
    # a trace breaking an invariant is reported as such, whatever the model says
    if outcome.invariants.ok:
        outcome.verdict = accept_trace(outcome.trace, model_cfg)
    return outcome


def workflow_I(
    cfg: "HarnessConfig",
    store: TraceStore,
    batch: int = 0,
    monitor: Optional[CampaignMonitor] = None,
) -> WorkflowResult:
    """Grid-fuzz the simulator and check each new abstracted trace against the model."""
    result = WorkflowResult(WORKFLOW_I)
    grid = sim_configs(cfg.sim, cfg.fuzz, batch)
    seen = frozenset(store)
    jobs = [(i, values, sim_cfg, cfg.mapping, seen) for i, (values, sim_cfg) in enumerate(grid)]
    outcomes = map_ordered(check_combination, jobs, cfg.workflow.workers)

    for outcome in outcomes:
        if monitor is not None and outcome.metrics is not None:
            monitor.record_run(outcome.config.config_id, outcome.metrics)
        if outcome.trace is None:
            result.skipped += 1
            continue
        # seen before this batch, or produced by an earlier combination of it
        if outcome.trace_hash in store:
            result.skipped += 1
            continue
        evidence = None
        if not outcome.invariants.ok:
            evidence = outcome.invariants
        elif not outcome.verdict:
            evidence = outcome.verdict
        if evidence is None:
            store.insert(outcome.trace_hash)
            result.traces.append(outcome.trace_hash)
            result.passed.append(outcome.trace)
            continue
        trigger = {
            "workflow": WORKFLOW_I,
            "batch": batch,
            "combination": outcome.index,
            "values": outcome.values,
            "seed": outcome.config.seed,
            "config_id": outcome.config.config_id,
        }
        result.violations.append(report_violation(evidence, outcome.trace, outcome.trace_hash, trigger, cfg.flags))
        if not cfg.workflow.all_violations:
            break
        store.insert(outcome.trace_hash)

    logger.info(
        "Workflow I finished.",
        batch=batch,
        runs=len(grid),
        new=len(result.traces),
        skipped=result.skipped,
        violations=len(result.violations),
    )
    return result


def _fresh_walk(cfg: "HarnessConfig", store: TraceStore, first: Trace, batch: int, i: int) -> Optional[Tuple[Trace, int]]:
    """First trace not in the store: the batch's i-th walk, then re-draws; None once the bound is hit."""
    trace = first
    for attempt in range(cfg.workflow.retry_bound):
        if attempt:
            seed = derive_seed(cfg.workflow.seed, "retry", batch, i, attempt)
            trace = random_walk(cfg.model_config(), cfg.workflow.depth, seed)
        if hash_trace(trace) not in store:
            return trace, attempt
    return None


def workflow_II(cfg: "HarnessConfig", store: TraceStore, batch: int = 0) -> WorkflowResult:
    """Random-walk the model and replay each new trace on the simulator."""
    result = WorkflowResult(WORKFLOW_II)
    wf = cfg.workflow
    if wf.n == 0:
        return result
    model_cfg = cfg.model_config()
    walks = model_random_walk(model_cfg, wf.n, wf.depth, derive_seed(wf.seed, "walks", batch))

    for i, walk in enumerate(walks):
        fresh = _fresh_walk(cfg, store, walk, batch, i)
        if fresh is None:
            logger.warning("No new model trace within the retry bound.", batch=batch, index=i, bound=wf.retry_bound)
            result.exhausted = True
            break
        trace, retries = fresh
        result.skipped += retries
        digest = hash_trace(trace)
        outcome = replay_check(trace, cfg.mapping, model_cfg, cfg.sim)
        if outcome.passed:
            store.insert(digest)
            result.traces.append(digest)
            result.passed.append(trace)
            continue
        trigger = {
            "workflow": WORKFLOW_II,
            "batch": batch,
            "index": i,
            "seed": trace.meta.seed,
            "depth": wf.depth,
            "config_id": model_cfg.config_id,
        }
        result.violations.append(report_violation(outcome.divergence, trace, digest, trigger, cfg.flags))
        if not wf.all_violations:
            break
        store.insert(digest)

    logger.info(
        "Workflow II finished.",
        batch=batch,
        new=len(result.traces),
        skipped=result.skipped,
        violations=len(result.violations),
        exhausted=result.exhausted,
    )
    return result


def conf_test(
    cfg: "HarnessConfig",
    store: TraceStore,
    budget: Optional[int] = None,
    output_dir: Optional[Path] = None,
    monitor: Optional[CampaignMonitor] = None,
) -> ConformanceReport:
    """Alternate Workflow I and II for at most ``budget`` iterations."""
    budget = cfg.workflow.budget if budget is None else budget
    report = ConformanceReport(seeded_violation=cfg.seeded_violation)
    batches = {WORKFLOW_I: 0, WORKFLOW_II: 0}

    for iteration in range(budget):
        name = WORKFLOW_I if iteration % 2 == 0 else WORKFLOW_II
        if name == WORKFLOW_I:
            result = workflow_I(cfg, store, batches[name], monitor)
        else:
            result = workflow_II(cfg, store, batches[name])
        batches[name] += 1

        record = BatchRecord(iteration, name, len(result.traces), result.skipped, exhausted=result.exhausted)
        for violation, prefix in result.violations:
            index = report.add_violation(violation, prefix, output_dir)
            if record.violation is None:
                record.violation = index
        report.batches.append(record)

        if result.violations and not cfg.workflow.all_violations:
            report.stopped = "violation"
            break
        if result.exhausted:
            report.stopped = "exhausted"
            break
        if not result.traces and not result.violations:
            report.stopped = "no-new-traces"
            break

    store.flush()
    logger.info(
        "Conformance test finished.",
        iterations=len(report.batches),
        traces=report.traces_checked,
        violations=len(report.violations),
        stopped=report.stopped,
        violation=cfg.seeded_violation,
    )
    return report
