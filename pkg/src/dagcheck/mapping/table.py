"""
Action-mapping table between concrete (``impl.*``) and abstract actions.

The table is configuration data (the ``mapping`` section of the config file).
Each action group is a sequence of concrete kinds, emitted consecutively by one
node, that collapses into a single abstract action; ``internal`` kinds are
dropped by the abstraction.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

from dagcheck.errors import ConfigError
from dagcheck.trace.actions import REQUIRED_PARAMS, ActionKind

# the concrete node an action was emitted by
NODE_PARAM = "node"

PROJECTED_FIELDS = ("round", "dag", "leaders", "blocks", "faulty")


@dataclass(frozen=True)
class ActionGroup:
    pattern: Tuple[str, ...]
    action: str
    # abstract parameter -> concrete parameter (or "node")
    params: Dict[str, str] = field(default_factory=dict)

    def __post_init__(self):
        if not self.pattern:
            raise ConfigError("an action group needs a non-empty pattern")
        try:
            kind = ActionKind(self.action)
        except ValueError as e:
            raise ConfigError(f"unknown abstract action {self.action!r}") from e
        if set(self.params) != set(REQUIRED_PARAMS[kind]):
            raise ConfigError(
                f"group {list(self.pattern)} must map exactly {sorted(REQUIRED_PARAMS[kind])} for {kind.value}"
            )

    @property
    def kind(self) -> ActionKind:
        return ActionKind(self.action)


@dataclass(frozen=True)
class MappingTable:
    action_groups: Tuple[ActionGroup, ...]
    internal: Tuple[str, ...] = ()
    # abstract state field -> concrete snapshot field
    state_projection: Dict[str, str] = field(default_factory=dict)

    def __post_init__(self):
        seen: List[str] = list(self.internal)
        for group in self.action_groups:
            seen.extend(group.pattern)
        duplicated = sorted({k for k in seen if seen.count(k) > 1})
        if duplicated:
            raise ConfigError(f"concrete kinds mapped more than once: {duplicated}")
        if set(self.state_projection) != set(PROJECTED_FIELDS):
            raise ConfigError(f"state_projection must map exactly {list(PROJECTED_FIELDS)}")
        object.__setattr__(self, "_heads", {g.pattern[0]: g for g in self.action_groups})

    def is_internal(self, kind: str) -> bool:
        return kind in self.internal

    def group_for(self, kind: str) -> Optional[ActionGroup]:
        return self._heads.get(kind)

    @property
    def covered_kinds(self) -> List[str]:
        kinds = list(self.internal)
        for group in self.action_groups:
            kinds.extend(group.pattern)
        return sorted(kinds)

    def concrete_field(self, abstract_field: str) -> str:
        return self.state_projection[abstract_field]


def default_mapping_table() -> MappingTable:
    """The table shipped in the packaged default configuration."""
    from dagcheck.config.manager import load_default_config

    return load_default_config().mapping
