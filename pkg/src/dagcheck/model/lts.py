"""
Executable abstract model of the DAG protocol as a labelled transition system.

States are immutable; ``apply_action`` returns a successor that shares every
untouched part with its predecessor.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, FrozenSet, List, Mapping, Optional, Set, Tuple

from dagcheck.errors import PreconditionViolation
from dagcheck.model.config import (
    ModelConfig,
    elect_leader,
    leader_round,
    support_round,
    threshold,
)
from dagcheck.trace import actions as act
from dagcheck.trace.actions import AbstractAction, ActionKind
from dagcheck.trace.state import (
    SENTINEL,
    AbstractState,
    DagRow,
    NodeView,
    block_digest,
    node_id,
    vertex_ref,
)

Pending = Tuple[str, int, str]  # (creator, round, vertex ref)


@dataclass(frozen=True)
class VertexInfo:
    creator: str
    round: int
    parents: Tuple[str, ...]
    salt: int = 0


@dataclass(frozen=True)
class ModelState:
    abstract: AbstractState
    # vertices sent to a node and not yet incorporated by it
    buffered: Mapping[str, FrozenSet[Pending]]
    registry: Mapping[str, VertexInfo]
    slots: Mapping[Tuple[str, int], Tuple[str, ...]]
    covered: Mapping[str, FrozenSet[str]]
    members: Tuple[str, ...]
    stakes: Mapping[str, int]
    reconfigured: bool = False
    # causal-history memo; valid for every state since refs are content digests
    ancestry: Dict[str, FrozenSet[str]] = field(default_factory=dict, compare=False, repr=False)

    @property
    def digest(self) -> str:
        return self.abstract.digest

    def view(self, p: str) -> NodeView:
        return self.abstract.views[p]

    def history(self, ref: str) -> FrozenSet[str]:
        """The vertex and all of its ancestors."""
        memo = self.ancestry
        if ref in memo:
            return memo[ref]
        # iterative post-order so deep DAGs don't hit the recursion limit
        stack = [ref]
        while stack:
            top = stack[-1]
            if top in memo:
                stack.pop()
                continue
            missing = [par for par in self.registry[top].parents if par not in memo]
            if missing:
                stack.extend(missing)
                continue
            acc = {top}
            for par in self.registry[top].parents:
                acc |= memo[par]
            memo[top] = frozenset(acc)
            stack.pop()
        return memo[ref]

    def _evolve(self, **changes) -> "ModelState":
        values = dict(
            abstract=self.abstract,
            buffered=self.buffered,
            registry=self.registry,
            slots=self.slots,
            covered=self.covered,
            members=self.members,
            stakes=self.stakes,
            reconfigured=self.reconfigured,
            ancestry=self.ancestry,
        )
        values.update(changes)
        return ModelState(**values)


def _initial_leaders(cfg: ModelConfig) -> Tuple[Tuple[int, Optional[str]], ...]:
    if cfg.flags.has("V4"):
        return ((1, SENTINEL),)
    return ()


def _genesis_view(p: str, genesis: str, cfg: ModelConfig) -> NodeView:
    return NodeView(1, {1: DagRow.of(((p, genesis),))}, _initial_leaders(cfg), ())


def model_init(cfg: ModelConfig) -> ModelState:
    """Every node at round 1 holding only its own genesis vertex."""
    genesis = {p: vertex_ref(p, 1, ()) for p in cfg.node_set}
    views = {p: _genesis_view(p, genesis[p], cfg) for p in cfg.node_set}
    buffered = {
        p: frozenset((q, 1, genesis[q]) for q in cfg.node_set if q != p) for p in cfg.node_set
    }
    registry = {genesis[p]: VertexInfo(p, 1, ()) for p in cfg.node_set}
    slots = {(p, 1): (genesis[p],) for p in cfg.node_set}
    return ModelState(
        abstract=AbstractState(views),
        buffered=buffered,
        registry=registry,
        slots=slots,
        covered={p: frozenset() for p in cfg.node_set},
        members=tuple(cfg.node_set),
        stakes=dict(cfg.stakes),
    )


# --- commit rule -------------------------------------------------------------


def _quorum(s: ModelState) -> int:
    return threshold(sum(s.stakes.values()))


def _directly_supported(s: ModelState, view: NodeView, w: int, cfg: ModelConfig) -> Optional[str]:
    leader = view.get(leader_round(w, cfg), elect_leader(w, cfg))
    if leader is None:
        return None
    support = sum(
        s.stakes[creator]
        for creator, ref in view.row(support_round(w, cfg)).entries
        if leader in s.registry[ref].parents
    )
    return leader if support >= _quorum(s) else None


def commit_candidate(s: ModelState, p: str, cfg: ModelConfig) -> Optional[Tuple[int, str]]:
    """Next (wave, leader) node p must commit, if any.

    The lowest directly supported uncommitted wave anchors a chain; walking
    down, every earlier leader reachable from the current anchor joins the
    chain and becomes the anchor. The chain is committed lowest wave first.
    """
    view = s.view(p)
    last = view.last_committed_wave()
    top_round = max(view.rows) if view.rows else view.round
    w = last + 1
    anchor: Optional[Tuple[int, str]] = None
    while support_round(w, cfg) <= top_round:
        leader = _directly_supported(s, view, w, cfg)
        if leader is not None:
            anchor = (w, leader)
            break
        w += 1
    if anchor is None:
        return None
    chain = [anchor]
    current = anchor[1]
    for earlier in range(anchor[0] - 1, last, -1):
        leader = view.get(leader_round(earlier, cfg), elect_leader(earlier, cfg))
        if leader is not None and leader in s.history(current):
            chain.append((earlier, leader))
            current = leader
    return chain[-1]


def linearize_model(s: ModelState, p: str, leader: str) -> List[str]:
    """Uncovered causal history of a leader, ordered by (round, creator, ref)."""
    fresh = s.history(leader) - s.covered[p]
    return sorted(fresh, key=lambda ref: (s.registry[ref].round, s.registry[ref].creator, ref))


# --- guards ------------------------------------------------------------------


def guard(s: ModelState, a: AbstractAction, cfg: ModelConfig) -> Optional[str]:
    """None when the action is enabled, otherwise the failing condition."""
    kind = a.kind
    if kind is ActionKind.RECONFIGURE:
        if cfg.reconfigure_round is None:
            return "reconfiguration disabled"
        if s.reconfigured:
            return "already reconfigured"
        if a["n"] != _next_member(s):
            return f"new node must be {_next_member(s)}"
        # crashed nodes never advance, so "all nodes" is read as a stake quorum
        passed = sum(s.stakes[p] for p in s.members if s.view(p).round >= cfg.reconfigure_round)
        if passed < _quorum(s):
            return f"stake {passed} past round {cfg.reconfigure_round} below quorum {_quorum(s)}"
        return None

    p = a["b"] if kind is ActionKind.EQUIVOCATE else a["p"]
    if p not in s.members:
        return f"unknown node {p}"
    view = s.view(p)

    if kind is ActionKind.NEXT_ROUND:
        if view.get(view.round, p) is None:
            return f"{p} has not created its round-{view.round} vertex"
        if view.round >= cfg.round_bound:
            return "round bound reached"
        held = sum(s.stakes[c] for c in view.row(view.round).creators())
        if held < _quorum(s):
            return f"stake {held} at round {view.round} below quorum {_quorum(s)}"
        return None

    if kind is ActionKind.CREATE_VERTEX:
        if view.round < 2:
            return "genesis already exists"
        if view.get(view.round, p) is not None:
            return f"{p} already created its round-{view.round} vertex"
        return None

    if kind is ActionKind.RECEIVE_VERTEX:
        q, r, v = a["q"], a["r"], a["v"]
        if (q, r, v) not in s.buffered[p]:
            return "vertex not in flight to receiver"
        if view.get(r, q) is not None:
            return f"{p} already holds a round-{r} vertex of {q}"
        if r > 1 and view.get(r - 1, p) is None:
            return f"{p} lacks its own round-{r - 1} vertex"
        for parent in s.registry[v].parents:
            info = s.registry[parent]
            if view.get(info.round, info.creator) != parent:
                return f"parent {parent[:12]} missing at {p}"
        return None

    if kind is ActionKind.COMMIT_LEADER:
        candidate = commit_candidate(s, p, cfg)
        if candidate is None:
            return "no committable leader"
        if candidate != (a["w"], a["v"]):
            return f"next commit is wave {candidate[0]}"
        return None

    if kind is ActionKind.EQUIVOCATE:
        if p not in cfg.byzantine_set:
            return f"{p} is not byzantine"
        if len(s.slots.get((p, a["r"]), ())) != 1:
            return f"{p} does not hold exactly one round-{a['r']} vertex"
        return None

    return f"unknown action kind {kind}"


def _next_member(s: ModelState) -> str:
    i = len(s.members)
    candidate = node_id(i)
    while candidate in s.members:
        i += 1
        candidate = node_id(i)
    return candidate


# --- enumeration -------------------------------------------------------------


def enabled_actions(s: ModelState, cfg: ModelConfig) -> Set[AbstractAction]:
    enabled: Set[AbstractAction] = set()
    for p in s.members:
        view = s.view(p)
        for q, r, v in s.buffered[p]:
            a = act.receive_vertex(p, q, r, v)
            if guard(s, a, cfg) is None:
                enabled.add(a)
        for a in (act.next_round(p), act.create_vertex(p)):
            if guard(s, a, cfg) is None:
                enabled.add(a)
        candidate = commit_candidate(s, p, cfg)
        if candidate is not None:
            enabled.add(act.commit_leader(p, candidate[0], candidate[1]))
        if p in cfg.byzantine_set:
            for r in range(1, view.round + 1):
                if len(s.slots.get((p, r), ())) == 1:
                    enabled.add(act.equivocate(p, r))
    if cfg.reconfigure_round is not None and not s.reconfigured:
        a = act.reconfigure(_next_member(s))
        if guard(s, a, cfg) is None:
            enabled.add(a)
    return enabled


# --- transitions -------------------------------------------------------------


def _broadcast(s: ModelState, sender: str, item: Pending) -> Dict[str, FrozenSet[Pending]]:
    buffered = dict(s.buffered)
    for q in s.members:
        if q != sender:
            buffered[q] = buffered[q] | {item}
    return buffered


def apply_action(s: ModelState, a: AbstractAction, cfg: ModelConfig) -> ModelState:
    reason = guard(s, a, cfg)
    if reason is not None:
        raise PreconditionViolation(a, reason)
    kind = a.kind

    if kind is ActionKind.NEXT_ROUND:
        p = a["p"]
        return s._evolve(abstract=s.abstract.replace(p, s.view(p).with_round(s.view(p).round + 1)))

    if kind is ActionKind.CREATE_VERTEX:
        p = a["p"]
        view = s.view(p)
        r = view.round
        parents = tuple(sorted(view.row(r - 1).refs()))
        ref = vertex_ref(p, r, parents)
        registry = dict(s.registry)
        registry[ref] = VertexInfo(p, r, parents)
        slots = dict(s.slots)
        slots[(p, r)] = slots.get((p, r), ()) + (ref,)
        return s._evolve(
            abstract=s.abstract.replace(p, view.with_vertex(r, p, ref)),
            buffered=_broadcast(s, p, (p, r, ref)),
            registry=registry,
            slots=slots,
        )

    if kind is ActionKind.RECEIVE_VERTEX:
        p, q, r, v = a["p"], a["q"], a["r"], a["v"]
        buffered = dict(s.buffered)
        # first received wins; conflicting copies for the slot are discarded
        buffered[p] = frozenset(e for e in s.buffered[p] if not (e[0] == q and e[1] == r))
        return s._evolve(
            abstract=s.abstract.replace(p, s.view(p).with_vertex(r, q, v)),
            buffered=buffered,
        )

    if kind is ActionKind.COMMIT_LEADER:
        p, w, leader = a["p"], a["w"], a["v"]
        view = s.view(p)
        ordered = linearize_model(s, p, leader)
        leaders = tuple(e for e in view.leaders if e[1] != SENTINEL) + ((w, leader),)
        if cfg.flags.has("V4"):
            leaders += ((w + 1, SENTINEL),)
        committed = NodeView(view.round, view.rows, leaders, view.blocks + ((w, block_digest(w, ordered)),))
        covered = dict(s.covered)
        covered[p] = s.covered[p] | frozenset(ordered)
        return s._evolve(abstract=s.abstract.replace(p, committed), covered=covered)

    if kind is ActionKind.EQUIVOCATE:
        b, r = a["b"], a["r"]
        original = s.registry[s.slots[(b, r)][0]]
        ref = vertex_ref(b, r, original.parents, salt=1)
        registry = dict(s.registry)
        registry[ref] = VertexInfo(b, r, original.parents, salt=1)
        slots = dict(s.slots)
        slots[(b, r)] = slots[(b, r)] + (ref,)
        return s._evolve(
            abstract=s.abstract.with_faulty(b),
            buffered=_broadcast(s, b, (b, r, ref)),
            registry=registry,
            slots=slots,
        )

    if kind is ActionKind.RECONFIGURE:
        n = a["n"]
        genesis = vertex_ref(n, 1, ())
        registry = dict(s.registry)
        registry[genesis] = VertexInfo(n, 1, ())
        slots = dict(s.slots)
        slots[(n, 1)] = (genesis,)
        members = s.members + (n,)
        buffered = dict(s.buffered)
        for q in s.members:
            buffered[q] = buffered[q] | {(n, 1, genesis)}
        buffered[n] = frozenset((info.creator, info.round, ref) for ref, info in s.registry.items())
        stakes = dict(s.stakes)
        stakes[n] = 1
        covered = dict(s.covered)
        covered[n] = frozenset()
        return s._evolve(
            abstract=s.abstract.replace(n, _genesis_view(n, genesis, cfg)),
            buffered=buffered,
            registry=registry,
            slots=slots,
            covered=covered,
            members=members,
            stakes=stakes,
            reconfigured=True,
        )

    raise PreconditionViolation(a, "unknown action kind")


def all_at_bound(s: ModelState, cfg: ModelConfig) -> bool:
    return all(s.view(p).round >= cfg.round_bound for p in s.members)
