"""
Traces and their JSON Lines encoding.

Line 1 is a header object ``{version, source, seed, config_id, init_digest}``;
every following line is ``{action: {kind, params}, post_digest, post_state?}``.
"""

from __future__ import annotations

import hashlib
import io
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import IO, Any, Dict, Iterable, List, Optional, Tuple, Union

from dagcheck.errors import TraceParseError
from dagcheck.trace.actions import AbstractAction
from dagcheck.trace.state import DIGEST_ALGORITHM, AbstractState

TRACE_FORMAT_VERSION = 1


@dataclass(frozen=True)
class TraceMeta:
    """Provenance; never part of the trace hash."""

    source: str = "model"  # model | simulator
    seed: Optional[int] = None
    config_id: Optional[str] = None


@dataclass(frozen=True)
class TraceStep:
    action: AbstractAction
    post_digest: str
    post_state: Optional[AbstractState] = field(default=None, compare=False)

    def __post_init__(self):
        if self.post_state is not None and self.post_state.digest != self.post_digest:
            raise ValueError(f"post_digest does not match post_state for {self.action}")


@dataclass(frozen=True)
class Trace:
    init_digest: str
    steps: Tuple[TraceStep, ...]
    meta: TraceMeta = field(default_factory=TraceMeta, compare=False)
    init_state: Optional[AbstractState] = field(default=None, compare=False)

    def __post_init__(self):
        if not self.steps:
            raise ValueError("a trace has at least one step")

    def __len__(self) -> int:
        return len(self.steps)

    @property
    def actions(self) -> List[AbstractAction]:
        return [s.action for s in self.steps]

    def with_meta(self, meta: TraceMeta) -> "Trace":
        return Trace(self.init_digest, self.steps, meta, self.init_state)

    def prefix(self, length: int) -> "Trace":
        return Trace(self.init_digest, self.steps[:length], self.meta, self.init_state)


def hash_trace(trace: Trace) -> str:
    """256-bit digest over init_digest and the ordered (action, post_digest) pairs."""
    h = hashlib.new(DIGEST_ALGORITHM)
    h.update(trace.init_digest.encode("ascii"))
    for step in trace.steps:
        h.update(b"\n")
        h.update(json.dumps(step.action.to_dict(), sort_keys=True, separators=(",", ":")).encode("utf-8"))
        h.update(b"|")
        h.update(step.post_digest.encode("ascii"))
    return h.hexdigest()


def write_trace(trace: Trace, stream: IO[str], include_states: bool = False) -> None:
    header = {
        "version": TRACE_FORMAT_VERSION,
        "source": trace.meta.source,
        "seed": trace.meta.seed,
        "config_id": trace.meta.config_id,
        "init_digest": trace.init_digest,
    }
    stream.write(json.dumps(header, sort_keys=True) + "\n")
    for step in trace.steps:
        line: Dict[str, Any] = {"action": step.action.to_dict(), "post_digest": step.post_digest}
        if include_states and step.post_state is not None:
            line["post_state"] = step.post_state.to_dict()
        stream.write(json.dumps(line, sort_keys=True) + "\n")


def serialize_trace(trace: Trace, include_states: bool = False) -> bytes:
    buffer = io.StringIO()
    write_trace(trace, buffer, include_states=include_states)
    return buffer.getvalue().encode("utf-8")


def _parse_line(raw: str, lineno: int) -> Dict[str, Any]:
    try:
        obj = json.loads(raw)
    except json.JSONDecodeError as e:
        raise TraceParseError(f"invalid JSON: {e.msg}", line=lineno, offset=e.pos) from e
    if not isinstance(obj, dict):
        raise TraceParseError("expected a JSON object", line=lineno, offset=0)
    return obj


def read_trace(lines: Iterable[str]) -> Trace:
    header: Optional[Dict[str, Any]] = None
    steps: List[TraceStep] = []
    lineno = 0
    for lineno, raw in enumerate(lines, start=1):
        if not raw.strip():
            continue
        if not raw.endswith("\n"):
            # every record is newline-terminated; a missing terminator means truncation
            raise TraceParseError("truncated record", line=lineno, offset=len(raw))
        obj = _parse_line(raw, lineno)
        if header is None:
            missing = {"version", "source", "init_digest"} - set(obj)
            if missing:
                raise TraceParseError(f"header lacks {sorted(missing)}", line=lineno)
            if obj["version"] != TRACE_FORMAT_VERSION:
                raise TraceParseError(f"unsupported version {obj['version']}", line=lineno)
            header = obj
            continue
        try:
            action = AbstractAction.from_dict(obj["action"])
            state = AbstractState.from_dict(obj["post_state"]) if "post_state" in obj else None
            steps.append(TraceStep(action, obj["post_digest"], state))
        except (KeyError, TypeError, ValueError) as e:
            raise TraceParseError(f"bad step: {e}", line=lineno) from e
    if header is None:
        raise TraceParseError("empty trace file", line=lineno)
    if not steps:
        raise TraceParseError("trace has no steps", line=lineno)
    meta = TraceMeta(source=header["source"], seed=header.get("seed"), config_id=header.get("config_id"))
    return Trace(header["init_digest"], tuple(steps), meta)


def deserialize_trace(data: bytes) -> Trace:
    try:
        text = data.decode("utf-8")
    except UnicodeDecodeError as e:
        raise TraceParseError("not UTF-8", line=text_line(data, e.start), offset=e.start) from e
    return read_trace(io.StringIO(text))


def text_line(data: bytes, offset: int) -> int:
    return data[:offset].count(b"\n") + 1


def save_trace(trace: Trace, path: Union[str, Path], include_states: bool = False) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        write_trace(trace, f, include_states=include_states)
    return path


def load_trace(path: Union[str, Path]) -> Trace:
    with open(path, "r", encoding="utf-8", newline="") as f:
        return read_trace(f)
