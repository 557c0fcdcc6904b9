"""Vertices and blocks of the concrete implementation."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Dict, Mapping, Tuple

from dagcheck.trace.state import block_digest, vertex_ref


@dataclass(frozen=True)
class Vertex:
    creator: str
    round: int
    parents: Tuple[str, ...] = ()
    salt: int = 0
    # transactions are represented only by their count
    payload_count: int = 0
    id: str = field(init=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "parents", tuple(sorted(self.parents)))
        object.__setattr__(self, "id", vertex_ref(self.creator, self.round, self.parents, self.salt))

    @property
    def is_genesis(self) -> bool:
        return not self.parents

    def is_well_formed(self, first_round: int = 1) -> bool:
        if self.round < first_round or self.payload_count < 0:
            return False
        if self.round == first_round:
            return not self.parents
        return bool(self.parents) and len(set(self.parents)) == len(self.parents)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "id": self.id,
            "creator": self.creator,
            "round": self.round,
            "parents": list(self.parents),
            "salt": self.salt,
            "payload_count": self.payload_count,
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "Vertex":
        return cls(
            creator=data["creator"],
            round=int(data["round"]),
            parents=tuple(data.get("parents", ())),
            salt=int(data.get("salt", 0)),
            payload_count=int(data.get("payload_count", 0)),
        )


@dataclass(frozen=True)
class Block:
    wave: int
    vertices: Tuple[str, ...]

    @property
    def digest(self) -> str:
        return block_digest(self.wave, self.vertices)

    def __len__(self) -> int:
        return len(self.vertices)
