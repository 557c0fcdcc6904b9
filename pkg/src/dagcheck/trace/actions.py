"""Abstract action vocabulary shared by the model and the simulator."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Any, Dict, Tuple, Union

Scalar = Union[int, str]


class ActionKind(str, Enum):
    CREATE_VERTEX = "CreateVertex"
    RECEIVE_VERTEX = "ReceiveVertex"
    NEXT_ROUND = "NextRound"
    COMMIT_LEADER = "CommitLeader"
    EQUIVOCATE = "Equivocate"
    RECONFIGURE = "Reconfigure"


# p: acting node, q: creator/sender, r: round, v: vertex ref, w: wave,
# b: byzantine node, n: node being admitted
REQUIRED_PARAMS: Dict[ActionKind, Tuple[str, ...]] = {
    ActionKind.CREATE_VERTEX: ("p",),
    ActionKind.RECEIVE_VERTEX: ("p", "q", "r", "v"),
    ActionKind.NEXT_ROUND: ("p",),
    ActionKind.COMMIT_LEADER: ("p", "w", "v"),
    ActionKind.EQUIVOCATE: ("b", "r"),
    ActionKind.RECONFIGURE: ("n",),
}

_INT_PARAMS = {"r", "w"}


@dataclass(frozen=True, order=True)
class AbstractAction:
    """A labelled transition of the protocol LTS.

    Params are stored as a name-sorted tuple so actions hash, compare and sort
    canonically (kind first, then params ascending).
    """

    kind: ActionKind
    params: Tuple[Tuple[str, Scalar], ...]

    def __post_init__(self):
        names = tuple(sorted(name for name, _ in self.params))
        required = tuple(sorted(REQUIRED_PARAMS[self.kind]))
        if names != required:
            raise ValueError(f"{self.kind.value} requires params {required}, got {names}")
        for name, value in self.params:
            expected = int if name in _INT_PARAMS else str
            if not isinstance(value, expected) or isinstance(value, bool):
                raise ValueError(f"param {name!r} of {self.kind.value} must be {expected.__name__}")

    @classmethod
    def of(cls, kind: Union[ActionKind, str], **params: Scalar) -> "AbstractAction":
        return cls(ActionKind(kind), tuple(sorted(params.items())))

    def __getitem__(self, name: str) -> Scalar:
        for key, value in self.params:
            if key == name:
                return value
        raise KeyError(name)

    def to_dict(self) -> Dict[str, Any]:
        return {"kind": self.kind.value, "params": dict(self.params)}

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "AbstractAction":
        return cls.of(data["kind"], **data["params"])

    def __str__(self) -> str:
        args = ", ".join(f"{k}={v}" for k, v in self.params)
        return f"{self.kind.value}({args})"


def create_vertex(p: str) -> AbstractAction:
    return AbstractAction.of(ActionKind.CREATE_VERTEX, p=p)


def receive_vertex(p: str, q: str, r: int, v: str) -> AbstractAction:
    return AbstractAction.of(ActionKind.RECEIVE_VERTEX, p=p, q=q, r=r, v=v)


def next_round(p: str) -> AbstractAction:
    return AbstractAction.of(ActionKind.NEXT_ROUND, p=p)


def commit_leader(p: str, w: int, v: str) -> AbstractAction:
    return AbstractAction.of(ActionKind.COMMIT_LEADER, p=p, w=w, v=v)


def equivocate(b: str, r: int) -> AbstractAction:
    return AbstractAction.of(ActionKind.EQUIVOCATE, b=b, r=r)


def reconfigure(n: str) -> AbstractAction:
    return AbstractAction.of(ActionKind.RECONFIGURE, n=n)
