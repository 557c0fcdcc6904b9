"""
Concrete per-node protocol state machine.

A node only reacts to calls from its host (the simulator): ``on_timer``,
``on_receive`` and, for driven replays, the single-step methods. Every state
change is reported through the ``emit`` callback as a concrete action
(``impl.*``), which the host records together with a snapshot of the node.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Any, Callable, Dict, FrozenSet, List, Mapping, Optional, Set, Tuple

import structlog

from dagcheck.consensus.vertex import Block, Vertex
from dagcheck.model.config import threshold
from dagcheck.violations import NO_VIOLATION, ViolationFlags

logger = structlog.getLogger(__name__)

Row = Tuple[Tuple[str, str], ...]
Emit = Callable[["Node", str, Dict[str, Any]], None]

# unsigned 32-bit counter used by the wrapping leader election defect
_U32 = 0xFFFFFFFF


@dataclass(frozen=True)
class NodeSnapshot:
    """Concrete state of one node, as exposed to the abstraction layer."""

    node: str
    current_round: int
    local_dag: Mapping[int, Row]
    committed: Tuple[Tuple[int, str], ...]
    blocks: Tuple[Tuple[int, str], ...]
    equivocated: bool

    def to_dict(self) -> Dict[str, Any]:
        return {
            "node": self.node,
            "current_round": self.current_round,
            "local_dag": {str(r): dict(self.local_dag[r]) for r in sorted(self.local_dag)},
            "committed": [list(c) for c in self.committed],
            "blocks": [list(b) for b in self.blocks],
            "equivocated": self.equivocated,
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "NodeSnapshot":
        return cls(
            node=data["node"],
            current_round=int(data["current_round"]),
            local_dag={int(r): tuple(sorted(row.items())) for r, row in data["local_dag"].items()},
            committed=tuple((int(w), ref) for w, ref in data["committed"]),
            blocks=tuple((int(w), digest) for w, digest in data["blocks"]),
            equivocated=bool(data["equivocated"]),
        )


class Node:
    def __init__(
        self,
        node_id: str,
        node_set: Tuple[str, ...],
        stakes: Mapping[str, int],
        *,
        max_rounds: int,
        seed: int = 0,
        transactions_per_vertex: int = 10,
        flags: ViolationFlags = NO_VIOLATION,
        emit: Optional[Emit] = None,
    ):
        self.id = node_id
        # leader election always uses the configured order, even after reconfiguration
        self.node_set = tuple(node_set)
        self.stakes: Dict[str, int] = dict(stakes)
        self.max_rounds = max_rounds
        self.transactions_per_vertex = transactions_per_vertex
        self.flags = flags
        self._emit = emit

        self.first_round = 0 if flags.has("V1") else 1
        self.current_round = self.first_round
        self.local_dag: Dict[int, Dict[str, Vertex]] = {}
        # every vertex ever incorporated, by id
        self.vertices: Dict[str, Vertex] = {}
        self.buffer: Dict[str, Vertex] = {}
        self.committed: List[Tuple[int, str]] = []
        self.blocks: List[Block] = []
        self.covered: Set[str] = set()
        self.equivocated = False
        self.crashed = False

        self.conflicts = 0
        self.duplicates = 0
        self.malformed = 0

        self._pending_increment = False
        self._linearize_rng = random.Random(f"{seed}:{node_id}")
        self._ancestry: Dict[str, FrozenSet[str]] = {}
        self._rows: Dict[int, Row] = {}

        self.genesis = Vertex(node_id, self.first_round, (), payload_count=transactions_per_vertex)
        self._insert(self.genesis)

    def __repr__(self) -> str:
        return f"Node({self.id}, round={self.current_round})"

    # --- helpers -------------------------------------------------------------

    def _report(self, kind: str, **params: Any) -> None:
        if self._emit is not None:
            self._emit(self, kind, params)

    def own(self, r: int) -> Optional[Vertex]:
        return self.local_dag.get(r, {}).get(self.id)

    def quorum(self) -> int:
        return threshold(sum(self.stakes.values()))

    def holds_quorum(self, r: int) -> bool:
        held = sum(self.stakes.get(creator, 0) for creator in self.local_dag.get(r, {}))
        return held >= self.quorum()

    def add_member(self, node: str, stake: int) -> None:
        self.stakes[node] = stake

    def _insert(self, v: Vertex) -> None:
        self.local_dag.setdefault(v.round, {})[v.creator] = v
        self.vertices[v.id] = v
        self._rows.pop(v.round, None)

    def _holds(self, vertex_id: str) -> bool:
        v = self.vertices.get(vertex_id)
        return v is not None and self.local_dag.get(v.round, {}).get(v.creator) is v

    # --- round advancement and vertex creation --------------------------------

    def can_advance(self) -> bool:
        r = self.current_round
        return self.own(r) is not None and self.holds_quorum(r) and r < self.max_rounds

    def advance_round(self) -> bool:
        if not self.can_advance():
            return False
        self.current_round += 1
        self._report("impl.advance_round", round=self.current_round)
        return True

    def create_vertex(self) -> Optional[Vertex]:
        r = self.current_round
        if r <= self.first_round or self.own(r) is not None:
            return None
        return self._create_at(r)

    def _create_at(self, r: int) -> Vertex:
        parents = tuple(v.id for v in self.local_dag.get(r - 1, {}).values())
        v = Vertex(self.id, r, parents, payload_count=self.transactions_per_vertex)
        self._insert(v)
        self._report("impl.create_vertex", round=r, vertex=v.id)
        return v

    def on_timer(self, budget_ok: bool = True) -> Optional[Vertex]:
        """One timer iteration; returns the vertex to broadcast, if any."""
        self._report("impl.timer")
        created = None
        if self.flags.has("V9"):
            if self._pending_increment:
                self.current_round += 1
                self._pending_increment = False
                self._report("impl.advance_round", round=self.current_round)
            elif budget_ok and self.can_advance():
                created = self._create_at(self.current_round + 1)
                self._pending_increment = True
        elif budget_ok and self.advance_round():
            created = self.create_vertex()
        self.settle()
        return created

    # --- receiving -------------------------------------------------------------

    def insertable(self, v: Vertex) -> bool:
        if v.round > self.first_round and not self.flags.has("V8") and self.own(v.round - 1) is None:
            return False
        return all(self._holds(parent) for parent in v.parents)

    def on_receive(self, v: Vertex, sender: str, settle: bool = True) -> bool:
        """Returns whether v itself was incorporated into the local DAG."""
        self._report("impl.deliver", sender=sender, vertex=v.id)
        if not v.is_well_formed(self.first_round):
            self.malformed += 1
            self._report("impl.reject_vertex", vertex=v.id)
            return False
        inserted = self._accept(v)
        if settle:
            self.settle()
        return inserted

    def _accept(self, v: Vertex) -> bool:
        held = self.local_dag.get(v.round, {}).get(v.creator)
        if held is not None:
            self._conflict_or_duplicate(held, v)
            return False
        if v.id in self.buffer:
            self.duplicates += 1
            self._report("impl.drop_duplicate", vertex=v.id)
            return False
        if self.insertable(v):
            self._incorporate(v)
            return True
        self.buffer[v.id] = v
        self._report("impl.buffer_vertex", creator=v.creator, round=v.round, vertex=v.id)
        return False

    def _incorporate(self, v: Vertex) -> None:
        self._insert(v)
        self._report("impl.insert_vertex", creator=v.creator, round=v.round, vertex=v.id)

    def _conflict_or_duplicate(self, held: Vertex, v: Vertex) -> None:
        if held.id == v.id:
            self.duplicates += 1
            self._report("impl.drop_duplicate", vertex=v.id)
            if self.flags.has("V3"):
                self._report("impl.insert_vertex", creator=v.creator, round=v.round, vertex=v.id)
            return
        self.conflicts += 1
        self._report("impl.flag_equivocation", creator=v.creator, round=v.round, vertex=v.id)
        if self.flags.has("V10"):
            self._incorporate(v)

    def drain(self) -> int:
        """Incorporate buffered vertices that became insertable, by round then arrival; returns how many."""
        inserted = 0
        progressed = True
        while progressed and self.buffer:
            progressed = False
            for v in sorted(self.buffer.values(), key=lambda x: x.round):
                if v.id not in self.buffer:
                    continue
                held = self.local_dag.get(v.round, {}).get(v.creator)
                if held is not None:
                    del self.buffer[v.id]
                    self._conflict_or_duplicate(held, v)
                elif self.insertable(v):
                    del self.buffer[v.id]
                    self._incorporate(v)
                    inserted += 1
                    progressed = True
        return inserted

    def settle(self) -> None:
        self.drain()
        self.try_commit()

    def try_commit(self) -> List[Block]:
        blocks = []
        while (block := self.commit_next()) is not None:
            blocks.append(block)
        return blocks

    # --- commit ------------------------------------------------------------------

    def elect_leader(self, w: int) -> str:
        if self.flags.has("V7"):
            return self.node_set[((w - 2) & _U32) % len(self.node_set)]
        return self.node_set[(w - 1) % len(self.node_set)]

    def leader_vertex(self, w: int) -> Optional[Vertex]:
        return self.local_dag.get(2 * w - 1, {}).get(self.elect_leader(w))

    def _directly_supported(self, w: int) -> Optional[Vertex]:
        leader = self.leader_vertex(w)
        if leader is None:
            return None
        support = sum(
            self.stakes.get(creator, 0)
            for creator, v in self.local_dag.get(2 * w, {}).items()
            if leader.id in v.parents
        )
        return leader if support >= self.quorum() else None

    def history(self, vertex_id: str) -> FrozenSet[str]:
        memo = self._ancestry
        stack = [vertex_id]
        while stack:
            top = stack[-1]
            if top in memo:
                stack.pop()
                continue
            parents = self.vertices[top].parents
            missing = [p for p in parents if p not in memo]
            if missing:
                stack.extend(missing)
                continue
            acc = {top}
            for p in parents:
                acc |= memo[p]
            memo[top] = frozenset(acc)
            stack.pop()
        return memo[vertex_id]

    def commit_candidate(self) -> Optional[Tuple[int, Vertex]]:
        """Lowest directly supported wave, then earlier leaders reachable from it."""
        if not self.local_dag:
            return None
        last = self.committed[-1][0] if self.committed else 0
        top = max(self.local_dag)
        w = last + 1
        anchor: Optional[Tuple[int, Vertex]] = None
        while 2 * w <= top:
            leader = self._directly_supported(w)
            if leader is not None:
                anchor = (w, leader)
                break
            w += 1
        if anchor is None:
            return None
        chain = [anchor]
        current = anchor[1]
        for earlier in range(anchor[0] - 1, last, -1):
            leader = self.leader_vertex(earlier)
            if leader is not None and leader.id in self.history(current.id):
                chain.append((earlier, leader))
                current = leader
        return chain[-1]

    def commit_next(self) -> Optional[Block]:
        candidate = self.commit_candidate()
        if candidate is None:
            return None
        w, leader = candidate
        self.committed.append((w, leader.id))
        self._report("impl.commit", wave=w, leader=leader.id)
        block = self.linearize(w, leader.id)
        self.blocks.append(block)
        self.covered.update(block.vertices)
        self._report("impl.emit_block", wave=w, block=block.digest, vertices=list(block.vertices))
        logger.debug("Block committed.", node=self.id, wave=w, size=len(block))
        return block

    def linearize(self, w: int, leader_id: str) -> Block:
        """Uncovered causal history of the leader in (round, creator, id) order."""
        fresh = self.history(leader_id) - self.covered
        if self.flags.has("V6"):
            return Block(w, tuple(self._shuffled_walk(leader_id, fresh)))
        return Block(w, tuple(sorted(fresh, key=lambda i: (self.vertices[i].round, self.vertices[i].creator, i))))

    def _shuffled_walk(self, leader_id: str, fresh: FrozenSet[str]) -> List[str]:
        # post-order DFS: a topological order, but parent order is per-node random
        order: List[str] = []
        seen: Set[str] = set()
        stack: List[Tuple[str, bool]] = [(leader_id, False)]
        while stack:
            vid, expanded = stack.pop()
            if expanded:
                order.append(vid)
                continue
            if vid in seen:
                continue
            seen.add(vid)
            stack.append((vid, True))
            parents = [p for p in self.vertices[vid].parents if p in fresh and p not in seen]
            self._linearize_rng.shuffle(parents)
            stack.extend((p, False) for p in parents)
        return order

    # --- faults ----------------------------------------------------------------

    def equivocate(self, r: int) -> Optional[Vertex]:
        """A second, distinct vertex for round r with the same parents."""
        if self.flags.has("V10"):
            return None
        original = self.own(r)
        if original is None:
            return None
        copy = Vertex(self.id, r, original.parents, salt=1, payload_count=original.payload_count)
        self.equivocated = True
        self._report("impl.equivocate", round=r, vertex=copy.id)
        return copy

    def crash(self) -> None:
        if not self.crashed:
            self.crashed = True
            self._report("impl.crash")

    # --- observation -------------------------------------------------------------

    def _row(self, r: int) -> Row:
        row = self._rows.get(r)
        if row is None:
            row = tuple(sorted((creator, v.id) for creator, v in self.local_dag[r].items()))
            self._rows[r] = row
        return row

    def snapshot(self) -> NodeSnapshot:
        return NodeSnapshot(
            node=self.id,
            current_round=self.current_round,
            local_dag={r: self._row(r) for r in sorted(self.local_dag)},
            committed=tuple(self.committed),
            blocks=tuple((b.wave, b.digest) for b in self.blocks),
            equivocated=self.equivocated,
        )
