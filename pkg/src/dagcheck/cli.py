"""
dagcheck command line.

Exit codes: 0 no violation, 1 violation found, 2 harness defect (bad config,
unmapped concrete action, malformed trace file, store I/O).
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional

import structlog

from dagcheck.config.manager import STORE_ENV, ConfigManager, HarnessConfig
from dagcheck.conformance.report import BatchRecord, ConformanceReport
from dagcheck.conformance.workflows import WorkflowResult, conf_test, workflow_I, workflow_II
from dagcheck.errors import HarnessError
from dagcheck.logger.slogger import configure_structlog
from dagcheck.mapping.abstraction import abstract_trace
from dagcheck.mapping.replay import replay_check
from dagcheck.metrics import CampaignMonitor, compute_metrics, metrics_from_trace, write_metrics
from dagcheck.sim.concrete import load_concrete, save_concrete
from dagcheck.sim.engine import run
from dagcheck.trace.store import TraceStore
from dagcheck.trace.trace import load_trace, save_trace

logger = structlog.getLogger(__name__)

EXIT_OK = 0
EXIT_VIOLATION = 1

TRACE_FILE = "trace.jsonl"
ABSTRACT_FILE = "abstract.jsonl"
METRICS_FILE = "metrics.json"
# passed traces of a single fuzz-impl / fuzz-model batch
TRACES_DIR = "traces"


def _overrides(args: argparse.Namespace) -> Dict[str, Any]:
    store = getattr(args, "store", None) or os.environ.get(STORE_ENV)
    seed = getattr(args, "seed", None)
    return {
        "seeded_violation": getattr(args, "seeded_violation", None),
        "sim.seed": seed,
        "fuzz.seed": seed,
        "workflow.seed": seed,
        "fuzz.k": getattr(args, "k", None),
        "workflow.budget": getattr(args, "budget", None),
        "workflow.n": getattr(args, "n", None),
        "workflow.depth": getattr(args, "depth", None),
        "workflow.store_path": store,
        "workflow.workers": getattr(args, "workers", None),
        "workflow.output_dir": getattr(args, "output_dir", None),
        "workflow.all_violations": True if getattr(args, "all_violations", False) else None,
    }


def load_config(args: argparse.Namespace) -> HarnessConfig:
    config = getattr(args, "config", None)
    if config:
        cfg = ConfigManager.load_from_yaml(config)
    else:
        cfg = ConfigManager.from_dict({})
    return ConfigManager.with_overrides(cfg, **_overrides(args))


def _output_dir(cfg: HarnessConfig) -> Path:
    path = Path(cfg.workflow.output_dir)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _finish(report: ConformanceReport, cfg: HarnessConfig) -> int:
    path = report.write(_output_dir(cfg))
    print(f"report: {path}")
    for v in report.violations:
        print(f"{v.classification.value} at step {v.step}: {v.reason} ({v.counterexample})")
    return EXIT_VIOLATION if report.violations else EXIT_OK


def _single_batch(result: WorkflowResult, cfg: HarnessConfig) -> int:
    traces = _output_dir(cfg) / TRACES_DIR
    for i, trace in enumerate(result.passed):
        save_trace(trace, traces / f"trace-{i:03d}.jsonl")
    report = ConformanceReport(seeded_violation=cfg.seeded_violation, stopped="single-batch")
    record = BatchRecord(0, result.workflow, len(result.traces), result.skipped, exhausted=result.exhausted)
    for violation, prefix in result.violations:
        index = report.add_violation(violation, prefix, _output_dir(cfg))
        if record.violation is None:
            record.violation = index
    report.batches.append(record)
    return _finish(report, cfg)


def cmd_sim_run(args: argparse.Namespace, cfg: HarnessConfig) -> int:
    sim_run = run(cfg.sim)
    out = _output_dir(cfg)
    save_concrete(sim_run.trace, out / TRACE_FILE)
    write_metrics(compute_metrics(sim_run), out / METRICS_FILE, cfg.metrics.enabled)
    if args.abstract:
        save_trace(abstract_trace(sim_run.trace, cfg.mapping), out / ABSTRACT_FILE, include_states=args.states)
    print(f"trace: {out / TRACE_FILE} digest={sim_run.digest} rounds={sim_run.round_reached}")
    return EXIT_OK


def cmd_fuzz_impl(args: argparse.Namespace, cfg: HarnessConfig) -> int:
    monitor = CampaignMonitor()
    with TraceStore(cfg.workflow.store_path) as store:
        result = workflow_I(cfg, store, batch=args.batch, monitor=monitor)
    logger.info("Campaign metrics.", **monitor.get_summary())
    return _single_batch(result, cfg)


def cmd_fuzz_model(args: argparse.Namespace, cfg: HarnessConfig) -> int:
    with TraceStore(cfg.workflow.store_path) as store:
        result = workflow_II(cfg, store, batch=args.batch)
    return _single_batch(result, cfg)


def cmd_conftest(args: argparse.Namespace, cfg: HarnessConfig) -> int:
    monitor = CampaignMonitor()
    with TraceStore(cfg.workflow.store_path) as store:
        report = conf_test(cfg, store, output_dir=_output_dir(cfg), monitor=monitor)
    logger.info("Campaign metrics.", **monitor.get_summary())
    return _finish(report, cfg)


def cmd_replay(args: argparse.Namespace, cfg: HarnessConfig) -> int:
    trace = load_trace(args.trace)
    outcome = replay_check(trace, cfg.mapping, cfg.model_config(), cfg.sim)
    if outcome.passed:
        print(f"replayed {outcome.steps_executed} steps without divergence")
        return EXIT_OK
    d = outcome.divergence
    print(d.reason)
    print(f"expected {d.expected_digest}")
    print(f"actual   {d.actual_digest}")
    for line in d.diff:
        print(f"  {line}")
    return EXIT_VIOLATION


def cmd_abstract(args: argparse.Namespace, cfg: HarnessConfig) -> int:
    trace = abstract_trace(load_concrete(args.concrete), cfg.mapping)
    out = Path(args.out) if args.out else _output_dir(cfg) / ABSTRACT_FILE
    save_trace(trace, out, include_states=args.states)
    print(f"abstract trace: {out} ({len(trace)} steps)")
    return EXIT_OK


def cmd_metrics(args: argparse.Namespace, cfg: HarnessConfig) -> int:
    record = metrics_from_trace(load_concrete(args.concrete), cfg.sim.transactions_per_vertex)
    out = Path(args.out) if args.out else _output_dir(cfg) / METRICS_FILE
    write_metrics(record, out, cfg.metrics.enabled)
    print(f"metrics: {out}")
    return EXIT_OK


def _common_options() -> argparse.ArgumentParser:
    # accepted before and after the subcommand; unset options stay off the namespace
    common = argparse.ArgumentParser(add_help=False, argument_default=argparse.SUPPRESS)
    common.add_argument("--config", help="YAML config file (defaults to the packaged configuration)")
    common.add_argument("--log-level", help="overrides logging.level")
    common.add_argument("--seeded-violation", help="re-inject one of V1..V10")
    common.add_argument("--workers", type=int, help="processes for grid runs")
    common.add_argument("--output-dir", help="where traces, metrics and reports are written")
    return common


def build_parser() -> argparse.ArgumentParser:
    common = _common_options()
    parser = argparse.ArgumentParser(
        prog="dagcheck", description="Model-guided conformance testing of a DAG-BFT build.", parents=[common]
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sim-run", parents=[common], help="one simulator run: concrete trace + metrics")
    p.add_argument("--seed", type=int)
    p.add_argument("--abstract", action="store_true", help="also write the abstracted trace")
    p.add_argument("--states", action="store_true", help="include post states in written abstract traces")
    p.set_defaults(func=cmd_sim_run)

    p = sub.add_parser("fuzz-impl", parents=[common], help="one Workflow I batch (simulator grid checked by the model)")
    p.add_argument("--seed", type=int)
    p.add_argument("--k", type=int, help="values drawn per fuzzed parameter")
    p.add_argument("--batch", type=int, default=0)
    p.add_argument("--store")
    p.set_defaults(func=cmd_fuzz_impl)

    p = sub.add_parser("fuzz-model", parents=[common], help="one Workflow II batch (model walks replayed on the simulator)")
    p.add_argument("--seed", type=int)
    p.add_argument("--n", type=int, help="traces per batch")
    p.add_argument("--depth", type=int, help="random walk depth")
    p.add_argument("--batch", type=int, default=0)
    p.add_argument("--store")
    p.set_defaults(func=cmd_fuzz_model)

    p = sub.add_parser("conftest", parents=[common], help="alternate Workflow I and II")
    p.add_argument("--seed", type=int)
    p.add_argument("--budget", type=int, help="alternation iterations")
    p.add_argument("--k", type=int)
    p.add_argument("--n", type=int)
    p.add_argument("--depth", type=int)
    p.add_argument("--store")
    p.add_argument("--all-violations", action="store_true", help="record violations and keep going")
    p.set_defaults(func=cmd_conftest)

    p = sub.add_parser("replay", parents=[common], help="replay an abstract trace file on the simulator")
    p.add_argument("trace")
    p.set_defaults(func=cmd_replay)

    p = sub.add_parser("abstract", parents=[common], help="abstract a concrete trace file")
    p.add_argument("concrete")
    p.add_argument("--out")
    p.add_argument("--states", action="store_true")
    p.set_defaults(func=cmd_abstract)

    p = sub.add_parser("metrics", parents=[common], help="recompute metrics from a concrete trace file")
    p.add_argument("concrete")
    p.add_argument("--out")
    p.set_defaults(func=cmd_metrics)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args)
        configure_structlog(
            log_level=getattr(args, "log_level", None) or cfg.logging.level,
            log_file_path=cfg.logging.file_path,
            key_blacklist=cfg.logging.blacklist or None,
        )
        return args.func(args, cfg)
    except HarnessError as e:
        logger.error("Harness error.", error=str(e), error_type=type(e).__name__)
        print(f"error: {e}", file=sys.stderr)
        return e.exit_code
    except ValueError as e:
        # malformed log level and similar argument errors
        print(f"error: {e}", file=sys.stderr)
        return HarnessError.exit_code


if __name__ == "__main__":
    sys.exit(main())
