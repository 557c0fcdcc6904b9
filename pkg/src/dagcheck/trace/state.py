"""
Abstract (network-centric) DAG state and its canonical digest.

The state is indexed first by node (whose local view), then by round, then by
creator, like the protocol's formal model. Digests are two-level: every row and
every node view hashes its own canonical JSON, and the state hashes the sorted
list of view digests. All maps are iterated in ascending key order.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from functools import cached_property, lru_cache
from typing import Any, Dict, FrozenSet, Iterable, List, Mapping, Optional, Sequence, Tuple

DIGEST_ALGORITHM = "sha256"

# Undecided-leader placeholder; only ever produced by a seeded model defect.
SENTINEL = "-"


def digest_bytes(payload: bytes) -> str:
    return hashlib.new(DIGEST_ALGORITHM, payload).hexdigest()


def canonical_json(obj: Any) -> bytes:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), ensure_ascii=True).encode("ascii")


def node_id(index: int) -> str:
    return f"n{index:02d}"


def vertex_ref(creator: str, round_number: int, parents: Iterable[str], salt: int = 0) -> str:
    """Content digest of a vertex; identical in model and implementation."""
    body = {"creator": creator, "round": round_number, "parents": sorted(parents), "salt": salt}
    return digest_bytes(canonical_json(body))


def block_digest(wave: int, vertices: Sequence[str]) -> str:
    return digest_bytes(canonical_json({"wave": wave, "vertices": list(vertices)}))


@dataclass(frozen=True)
class DagRow:
    """One round of one local view: creator -> vertex ref, sorted by creator."""

    entries: Tuple[Tuple[str, str], ...] = ()

    @staticmethod
    @lru_cache(maxsize=1 << 16)
    def of(entries: Tuple[Tuple[str, str], ...]) -> "DagRow":
        return DagRow(tuple(sorted(entries)))

    def get(self, creator: str) -> Optional[str]:
        for key, ref in self.entries:
            if key == creator:
                return ref
        return None

    def with_entry(self, creator: str, ref: str) -> "DagRow":
        kept = tuple(e for e in self.entries if e[0] != creator)
        return DagRow.of(kept + ((creator, ref),))

    def creators(self) -> List[str]:
        return [c for c, _ in self.entries]

    def refs(self) -> List[str]:
        return [v for _, v in self.entries]

    def __len__(self) -> int:
        return len(self.entries)

    @cached_property
    def digest(self) -> str:
        return digest_bytes(canonical_json([list(e) for e in self.entries]))


EMPTY_ROW = DagRow()


@dataclass(frozen=True)
class NodeView:
    """A single node's local view."""

    round: int
    rows: Mapping[int, DagRow] = field(default_factory=dict)
    leaders: Tuple[Tuple[int, Optional[str]], ...] = ()
    blocks: Tuple[Tuple[int, str], ...] = ()

    def row(self, r: int) -> DagRow:
        return self.rows.get(r, EMPTY_ROW)

    def get(self, r: int, creator: str) -> Optional[str]:
        return self.row(r).get(creator)

    def with_vertex(self, r: int, creator: str, ref: str) -> "NodeView":
        rows = dict(self.rows)
        rows[r] = self.row(r).with_entry(creator, ref)
        return NodeView(self.round, rows, self.leaders, self.blocks)

    def with_round(self, r: int) -> "NodeView":
        return NodeView(r, self.rows, self.leaders, self.blocks)

    def with_commit(self, wave: int, leader: Optional[str], block: Optional[str]) -> "NodeView":
        blocks = self.blocks if block is None else self.blocks + ((wave, block),)
        return NodeView(self.round, self.rows, self.leaders + ((wave, leader),), blocks)

    def committed_waves(self) -> List[int]:
        return [w for w, ref in self.leaders if ref is not None and ref != SENTINEL]

    def last_committed_wave(self) -> int:
        waves = self.committed_waves()
        return waves[-1] if waves else 0

    def to_dict(self) -> Dict[str, Any]:
        return {
            "round": self.round,
            "dag": {str(r): dict(self.rows[r].entries) for r in sorted(self.rows) if len(self.rows[r])},
            "leaders": [[w, ref] for w, ref in self.leaders],
            "blocks": [[w, b] for w, b in self.blocks],
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "NodeView":
        rows = {int(r): DagRow.of(tuple(entries.items())) for r, entries in data.get("dag", {}).items()}
        return cls(
            round=int(data["round"]),
            rows=rows,
            leaders=tuple((int(w), ref) for w, ref in data.get("leaders", [])),
            blocks=tuple((int(w), b) for w, b in data.get("blocks", [])),
        )

    @cached_property
    def digest(self) -> str:
        body = {
            "round": self.round,
            "rows": [[r, self.rows[r].digest] for r in sorted(self.rows) if len(self.rows[r])],
            "leaders": [[w, ref] for w, ref in self.leaders],
            "blocks": [[w, b] for w, b in self.blocks],
        }
        return digest_bytes(canonical_json(body))


@dataclass(frozen=True)
class AbstractState:
    """Network-centric state: every node's view plus the set of equivocators."""

    views: Mapping[str, NodeView]
    faulty: FrozenSet[str] = frozenset()

    @property
    def nodes(self) -> List[str]:
        return sorted(self.views)

    @property
    def round(self) -> Dict[str, int]:
        return {p: v.round for p, v in self.views.items()}

    @property
    def dag(self) -> Dict[str, Dict[int, Dict[str, str]]]:
        return {p: {r: dict(row.entries) for r, row in v.rows.items()} for p, v in self.views.items()}

    @property
    def leaders(self) -> Dict[str, Tuple[Tuple[int, Optional[str]], ...]]:
        return {p: v.leaders for p, v in self.views.items()}

    @property
    def blocks(self) -> Dict[str, Tuple[Tuple[int, str], ...]]:
        return {p: v.blocks for p, v in self.views.items()}

    def replace(self, node: str, view: NodeView) -> "AbstractState":
        views = dict(self.views)
        views[node] = view
        return AbstractState(views, self.faulty)

    def with_faulty(self, node: str) -> "AbstractState":
        return AbstractState(self.views, self.faulty | {node})

    @cached_property
    def digest(self) -> str:
        body = {
            "faulty": sorted(self.faulty),
            "views": [[p, self.views[p].digest] for p in sorted(self.views)],
        }
        return digest_bytes(canonical_json(body))

    def to_dict(self) -> Dict[str, Any]:
        return {
            "faulty": sorted(self.faulty),
            "views": {p: self.views[p].to_dict() for p in sorted(self.views)},
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "AbstractState":
        views = {p: NodeView.from_dict(v) for p, v in data["views"].items()}
        return cls(views, frozenset(data.get("faulty", [])))


def state_diff(expected: AbstractState, actual: AbstractState) -> List[str]:
    """Field-level differences, used for verbose counterexample reports."""
    lines: List[str] = []
    if expected.faulty != actual.faulty:
        lines.append(f"faulty: {sorted(expected.faulty)} != {sorted(actual.faulty)}")
    for p in sorted(set(expected.views) | set(actual.views)):
        a, b = expected.views.get(p), actual.views.get(p)
        if a is None or b is None:
            lines.append(f"{p}: view present only on one side")
            continue
        if a.digest == b.digest:
            continue
        if a.round != b.round:
            lines.append(f"{p}.round: {a.round} != {b.round}")
        for r in sorted(set(a.rows) | set(b.rows)):
            if a.row(r) != b.row(r):
                lines.append(f"{p}.dag[{r}]: {dict(a.row(r).entries)} != {dict(b.row(r).entries)}")
        if a.leaders != b.leaders:
            lines.append(f"{p}.leaders: {list(a.leaders)} != {list(b.leaders)}")
        if a.blocks != b.blocks:
            lines.append(f"{p}.blocks: {list(a.blocks)} != {list(b.blocks)}")
    return lines
