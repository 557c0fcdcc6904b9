from .actions import AbstractAction, ActionKind
from .state import AbstractState, DagRow, NodeView, block_digest, node_id, vertex_ref
from .store import TraceStore, store_insert
from .trace import (
    Trace,
    TraceMeta,
    TraceStep,
    deserialize_trace,
    hash_trace,
    load_trace,
    save_trace,
    serialize_trace,
)

__all__ = [
    "AbstractAction",
    "ActionKind",
    "AbstractState",
    "DagRow",
    "NodeView",
    "block_digest",
    "node_id",
    "vertex_ref",
    "TraceStore",
    "store_insert",
    "Trace",
    "TraceMeta",
    "TraceStep",
    "deserialize_trace",
    "hash_trace",
    "load_trace",
    "save_trace",
    "serialize_trace",
]
