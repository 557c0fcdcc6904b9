"""
Performance metrics of a simulation run (time to finality, throughput).

All values are computed from the concrete trace and virtual time only, so a
metrics file is reproducible from its trace file.
"""

import json
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

import pandas as pd
import structlog

from dagcheck.sim.clock import MICROS_PER_MS, MICROS_PER_SECOND
from dagcheck.sim.concrete import ConcreteTrace

logger = structlog.getLogger(__name__)

# enabled metric name -> fields it contributes to the metrics document
METRIC_FIELDS = {
    "ttf": ("ttf_mean_ms", "ttf_p50_ms", "ttf_p99_ms"),
    "tps": (
        "tps",
        "vertices_per_second",
        "committed_vertices",
        "committed_transactions",
        "committed_per_node",
        "duration_ms",
    ),
    "vertex_count": ("vertex_count",),
    "round_reached": ("round_reached",),
    "equivocations_seen": ("equivocations_seen",),
    "crashes": ("crashes",),
}


@dataclass
class MetricsRecord:
    """
    Field reference (one flat document):
      ttf_mean_ms / ttf_p50_ms / ttf_p99_ms: creation -> first block inclusion,
        over committed vertices only; None when nothing was committed
      tps: committed transactions per virtual second
      vertices_per_second: committed vertices per virtual second
      committed_vertices: distinct vertices included in some block
      committed_transactions: committed_vertices * transactions per vertex
      committed_per_node: vertices in each node's blocks
      vertex_count: vertices created, genesis and equivocating copies included
      round_reached: highest round of any node
      equivocations_seen: conflicting vertices flagged by receivers
      crashes: nodes that crashed
      duration_ms: virtual time of the last action
    """

    ttf_mean_ms: Optional[float] = None
    ttf_p50_ms: Optional[float] = None
    ttf_p99_ms: Optional[float] = None
    tps: float = 0.0
    vertices_per_second: float = 0.0
    committed_vertices: int = 0
    committed_transactions: int = 0
    committed_per_node: Dict[str, int] = field(default_factory=dict)
    vertex_count: int = 0
    round_reached: int = 0
    equivocations_seen: int = 0
    crashes: int = 0
    duration_ms: float = 0.0

    def to_dict(self, enabled: Optional[List[str]] = None) -> Dict[str, Any]:
        data = asdict(self)
        if enabled is None:
            return data
        keep = {name for metric in enabled for name in METRIC_FIELDS[metric]}
        return {k: v for k, v in data.items() if k in keep}


def metrics_from_trace(trace: ConcreteTrace, transactions_per_vertex: int = 10) -> MetricsRecord:
    created: Dict[str, int] = {}
    for snapshot in trace.init_state.values():
        for row in snapshot.local_dag.values():
            for _, vid in row:
                created.setdefault(vid, 0)
    first_commit: Dict[str, int] = {}
    per_node: Dict[str, int] = {p: 0 for p in trace.init_state}
    round_reached = max((s.current_round for s in trace.init_state.values()), default=0)
    conflicts = crashes = 0

    for a in trace.actions:
        if a.kind in ("impl.create_vertex", "impl.equivocate"):
            created.setdefault(a.params["vertex"], a.time)
        elif a.kind == "impl.reconfigure" and a.snapshot is not None:
            per_node.setdefault(a.node, 0)
            for row in a.snapshot.local_dag.values():
                for _, vid in row:
                    created.setdefault(vid, a.time)
        elif a.kind == "impl.emit_block":
            vertices = a.params.get("vertices", [])
            per_node[a.node] = per_node.get(a.node, 0) + len(vertices)
            for vid in vertices:
                first_commit.setdefault(vid, a.time)
        elif a.kind == "impl.advance_round":
            round_reached = max(round_reached, a.params["round"])
        elif a.kind == "impl.flag_equivocation":
            conflicts += 1
        elif a.kind == "impl.crash":
            crashes += 1

    duration = trace.actions[-1].time if trace.actions else 0
    record = MetricsRecord(
        committed_vertices=len(first_commit),
        committed_transactions=len(first_commit) * transactions_per_vertex,
        committed_per_node=per_node,
        vertex_count=len(created),
        round_reached=round_reached,
        equivocations_seen=conflicts,
        crashes=crashes,
        duration_ms=duration / MICROS_PER_MS,
    )
    if duration > 0:
        seconds = duration / MICROS_PER_SECOND
        record.tps = record.committed_transactions / seconds
        record.vertices_per_second = record.committed_vertices / seconds
    if first_commit:
        ttf = pd.Series(
            [(first_commit[v] - created.get(v, 0)) / MICROS_PER_MS for v in sorted(first_commit)],
            dtype="float64",
        )
        record.ttf_mean_ms = round(float(ttf.mean()), 6)
        record.ttf_p50_ms = round(float(ttf.quantile(0.5)), 6)
        record.ttf_p99_ms = round(float(ttf.quantile(0.99)), 6)
    return record


def compute_metrics(run) -> MetricsRecord:
    """MetricsRecord of a completed SimRun."""
    return metrics_from_trace(run.trace, run.config.transactions_per_vertex)


def write_metrics(record: MetricsRecord, path: Union[str, Path], enabled: Optional[List[str]] = None) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(record.to_dict(enabled), sort_keys=True, indent=2) + "\n", encoding="utf-8")
    return path


class CampaignMonitor:
    """Aggregates the metrics of every run of a fuzzing campaign."""

    def __init__(self):
        self.metrics: Dict[str, MetricsRecord] = {}

    def record_run(self, config_id: str, record: MetricsRecord) -> None:
        self.metrics[config_id] = record

    def frame(self) -> pd.DataFrame:
        rows = []
        for config_id, record in self.metrics.items():
            row = asdict(record)
            row.pop("committed_per_node")
            row["config_id"] = config_id
            rows.append(row)
        return pd.DataFrame(rows)

    def get_summary(self) -> Dict[str, Any]:
        if not self.metrics:
            return {"runs": 0}
        df = self.frame()
        ttf = pd.to_numeric(df["ttf_p50_ms"], errors="coerce")
        return {
            "runs": len(df),
            "mean_tps": round(float(df["tps"].mean()), 3),
            "max_round_reached": int(df["round_reached"].max()),
            "total_crashes": int(df["crashes"].sum()),
            "median_ttf_ms": None if ttf.isna().all() else round(float(ttf.median()), 3),
        }
