"""Model configuration, quorum arithmetic, wave structure and leader election."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Mapping, Optional, Tuple

from dagcheck.errors import ConfigError
from dagcheck.trace.state import node_id
from dagcheck.violations import NO_VIOLATION, ViolationFlags

DEFAULT_RECONFIGURE_ROUND = 10


@dataclass(frozen=True)
class ModelConfig:
    node_set: Tuple[str, ...]
    stakes: Mapping[str, int]
    round_bound: int = 30
    byzantine_set: Tuple[str, ...] = ()
    # None disables the Reconfigure action
    reconfigure_round: Optional[int] = DEFAULT_RECONFIGURE_ROUND
    flags: ViolationFlags = field(default=NO_VIOLATION, compare=False)

    def __post_init__(self):
        if not self.node_set:
            raise ConfigError("node_set is empty")
        if len(set(self.node_set)) != len(self.node_set):
            raise ConfigError("node_set has duplicate ids")
        if set(self.stakes) != set(self.node_set):
            raise ConfigError("stakes must cover exactly node_set")
        if any(s <= 0 for s in self.stakes.values()):
            raise ConfigError("stakes must be positive")
        if not set(self.byzantine_set) <= set(self.node_set):
            raise ConfigError("byzantine_set must be a subset of node_set")
        if self.round_bound < 2:
            raise ConfigError("round_bound must be at least 2")
        if self.reconfigure_round is not None and self.reconfigure_round < 1:
            raise ConfigError("reconfigure_round must be positive")
        byzantine = sum(self.stakes[b] for b in self.byzantine_set)
        if byzantine * 3 >= self.total_stake:
            raise ConfigError(
                f"byzantine stake {byzantine} is not strictly below a third of {self.total_stake}"
            )

    @classmethod
    def uniform(
        cls,
        num_nodes: int,
        num_byzantine: int = 0,
        round_bound: int = 30,
        reconfigure_round: Optional[int] = DEFAULT_RECONFIGURE_ROUND,
        flags: ViolationFlags = NO_VIOLATION,
    ) -> "ModelConfig":
        nodes = tuple(node_id(i) for i in range(num_nodes))
        return cls(
            node_set=nodes,
            stakes={p: 1 for p in nodes},
            round_bound=round_bound,
            byzantine_set=nodes[:num_byzantine],
            reconfigure_round=reconfigure_round,
            flags=flags,
        )

    @property
    def total_stake(self) -> int:
        return sum(self.stakes.values())

    @property
    def config_id(self) -> str:
        stakes = ",".join(f"{p}:{self.stakes[p]}" for p in self.node_set)
        return f"model[{stakes}|R{self.round_bound}|B{','.join(self.byzantine_set)}|C{self.reconfigure_round}]"


def threshold(total_stake: int) -> int:
    """Smallest integer t with t > 2/3 * total_stake."""
    return (2 * total_stake) // 3 + 1


def quorum_stake(cfg: ModelConfig) -> int:
    return threshold(cfg.total_stake)


def is_quorum(nodes: Iterable[str], stakes: Mapping[str, int]) -> bool:
    total = sum(stakes.values())
    return sum(stakes[p] for p in set(nodes)) >= threshold(total)


def elect_leader(w: int, cfg: ModelConfig) -> str:
    """Round-robin over the configured node order; stake never matters."""
    if w < 1:
        raise ValueError("waves start at 1")
    return cfg.node_set[(w - 1) % len(cfg.node_set)]


def leader_round(w: int, cfg: ModelConfig) -> int:
    if cfg.flags.has("V2"):
        # genesis (round 1) left out of wave 1
        return 2 * w
    return 2 * w - 1


def support_round(w: int, cfg: ModelConfig) -> int:
    return leader_round(w, cfg) + 1


def waves_up_to(max_round: int, cfg: ModelConfig) -> List[int]:
    """Waves whose support round is at most max_round."""
    waves = []
    w = 1
    while support_round(w, cfg) <= max_round:
        waves.append(w)
        w += 1
    return waves


def stake_table(nodes: Iterable[str], stakes: Mapping[str, int]) -> Dict[str, int]:
    return {p: stakes[p] for p in nodes}
