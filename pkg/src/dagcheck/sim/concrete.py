"""
Concrete (implementation-level) traces and their JSON Lines encoding.

Line 1 is a header ``{version, source, seed, config_id, init_state}`` where
``init_state`` holds every node's snapshot. Each following line is
``{time, seq, kind, node, params, delta}``; ``delta`` carries only the snapshot
fields of ``node`` that the action changed, so files stay small while every
action keeps its full post-snapshot once loaded.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import IO, Any, Dict, List, Mapping, Optional, Tuple, Union

from dagcheck.consensus.node import NodeSnapshot
from dagcheck.errors import TraceParseError

CONCRETE_FORMAT_VERSION = 1


@dataclass(frozen=True)
class ConcreteAction:
    time: int
    seq: int
    kind: str
    node: str
    params: Mapping[str, Any] = field(default_factory=dict)
    snapshot: Optional[NodeSnapshot] = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class ConcreteTrace:
    init_state: Mapping[str, NodeSnapshot]
    actions: Tuple[ConcreteAction, ...]
    seed: Optional[int] = None
    config_id: Optional[str] = None

    def __len__(self) -> int:
        return len(self.actions)

    @property
    def kinds(self) -> List[str]:
        return [a.kind for a in self.actions]


def _delta(before: Optional[NodeSnapshot], after: NodeSnapshot) -> Dict[str, Any]:
    if before is None:
        full = after.to_dict()
        full.pop("node")
        return full
    delta: Dict[str, Any] = {}
    if after.current_round != before.current_round:
        delta["current_round"] = after.current_round
    rows = {
        str(r): dict(row)
        for r, row in after.local_dag.items()
        if before.local_dag.get(r) != row
    }
    if rows:
        delta["local_dag"] = rows
    if after.committed != before.committed:
        delta["committed"] = [list(c) for c in after.committed]
    if after.blocks != before.blocks:
        delta["blocks"] = [list(b) for b in after.blocks]
    if after.equivocated != before.equivocated:
        delta["equivocated"] = after.equivocated
    return delta


def _apply_delta(node: str, before: Optional[NodeSnapshot], delta: Mapping[str, Any]) -> NodeSnapshot:
    if before is None:
        return NodeSnapshot.from_dict({"node": node, **delta})
    local_dag = dict(before.local_dag)
    for r, row in delta.get("local_dag", {}).items():
        local_dag[int(r)] = tuple(sorted(row.items()))
    return NodeSnapshot(
        node=node,
        current_round=int(delta.get("current_round", before.current_round)),
        local_dag=local_dag,
        committed=tuple((int(w), v) for w, v in delta["committed"]) if "committed" in delta else before.committed,
        blocks=tuple((int(w), b) for w, b in delta["blocks"]) if "blocks" in delta else before.blocks,
        equivocated=bool(delta.get("equivocated", before.equivocated)),
    )


def _dumps(obj: Any) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def write_concrete(trace: ConcreteTrace, stream: IO[str]) -> None:
    header = {
        "version": CONCRETE_FORMAT_VERSION,
        "source": "simulator",
        "seed": trace.seed,
        "config_id": trace.config_id,
        "init_state": {p: trace.init_state[p].to_dict() for p in sorted(trace.init_state)},
    }
    stream.write(_dumps(header) + "\n")
    current: Dict[str, NodeSnapshot] = dict(trace.init_state)
    for a in trace.actions:
        line: Dict[str, Any] = {
            "time": a.time,
            "seq": a.seq,
            "kind": a.kind,
            "node": a.node,
            "params": dict(a.params),
        }
        if a.snapshot is not None:
            line["delta"] = _delta(current.get(a.node), a.snapshot)
            current[a.node] = a.snapshot
        stream.write(_dumps(line) + "\n")


def read_concrete(stream: IO[str]) -> ConcreteTrace:
    lines = stream.read().split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    else:
        raise TraceParseError("truncated record", len(lines))
    if not lines:
        raise TraceParseError("missing header", 1)
    try:
        header = json.loads(lines[0])
    except json.JSONDecodeError as e:
        raise TraceParseError(f"invalid JSON: {e.msg}", 1, e.pos) from e
    if header.get("version") != CONCRETE_FORMAT_VERSION or "init_state" not in header:
        raise TraceParseError("not a concrete trace header", 1)
    init = {p: NodeSnapshot.from_dict(s) for p, s in header["init_state"].items()}
    current: Dict[str, NodeSnapshot] = dict(init)
    actions: List[ConcreteAction] = []
    for number, text in enumerate(lines[1:], start=2):
        try:
            record = json.loads(text)
            node = record["node"]
            snapshot = None
            if "delta" in record:
                snapshot = _apply_delta(node, current.get(node), record["delta"])
                current[node] = snapshot
            actions.append(
                ConcreteAction(
                    int(record["time"]), int(record["seq"]), record["kind"], node, record.get("params", {}), snapshot
                )
            )
        except json.JSONDecodeError as e:
            raise TraceParseError(f"invalid JSON: {e.msg}", number, e.pos) from e
        except (KeyError, TypeError, ValueError) as e:
            raise TraceParseError(f"malformed action record: {e}", number) from e
    return ConcreteTrace(init, tuple(actions), header.get("seed"), header.get("config_id"))


def save_concrete(trace: ConcreteTrace, path: Union[str, Path]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8", newline="\n") as f:
        write_concrete(trace, f)
    return path


def load_concrete(path: Union[str, Path]) -> ConcreteTrace:
    with Path(path).open("r", encoding="utf-8", newline="") as f:
        return read_concrete(f)
