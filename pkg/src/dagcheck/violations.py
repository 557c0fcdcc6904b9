"""
Seeded-violation registry.

Ten historic conformance defects of the protocol, re-injectable at runtime as
behavioural flags. At most one flag is active; with none active every component
behaves exactly like the pristine build.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Dict, Optional

from dagcheck.errors import ConfigError


class Classification(str, Enum):
    TYPE_I = "TypeI"
    TYPE_II = "TypeII"
    PROP = "Prop"


class Site(str, Enum):
    MODEL = "model"
    IMPLEMENTATION = "implementation"
    SIMULATOR = "simulator"


@dataclass(frozen=True)
class SeededViolation:
    id: str
    site: Site
    description: str
    expected: Classification
    min_config: str  # "3/k" grid for Workflow I, "n/d" for Workflow II
    fix_site: str


REGISTRY: Dict[str, SeededViolation] = {
    v.id: v
    for v in (
        SeededViolation("V1", Site.IMPLEMENTATION, "rounds are 0-indexed instead of 1-indexed",
                        Classification.TYPE_I, "3/1", "model or implementation"),
        SeededViolation("V2", Site.MODEL, "genesis vertices are not part of wave 1",
                        Classification.TYPE_I, "3/1", "model"),
        SeededViolation("V3", Site.IMPLEMENTATION, "a vertex delivered twice is incorporated twice",
                        Classification.TYPE_I, "3/2", "implementation"),
        SeededViolation("V4", Site.MODEL, "undecided leaders are encoded with sentinel values",
                        Classification.TYPE_I, "3/1", "model"),
        SeededViolation("V5", Site.SIMULATOR, "adding a node after a fixed number of rounds is unsupported",
                        Classification.TYPE_II, "10/1K", "implementation"),
        SeededViolation("V6", Site.IMPLEMENTATION, "linearization walks vertices in a per-node shuffled order",
                        Classification.PROP, "3/2", "implementation"),
        SeededViolation("V7", Site.IMPLEMENTATION, "unsigned round counter wraps in leader election",
                        Classification.TYPE_I, "3/1", "implementation"),
        SeededViolation("V8", Site.IMPLEMENTATION, "future-round vertices accepted before the self ancestor exists",
                        Classification.TYPE_I, "3/1", "implementation"),
        SeededViolation("V9", Site.IMPLEMENTATION, "round increment lags vertex creation by one timer",
                        Classification.TYPE_I, "3/1", "implementation"),
        SeededViolation("V10", Site.IMPLEMENTATION, "equivocation assumed impossible; conflicting vertices overwrite",
                        Classification.TYPE_II, "10/1K", "model"),
    )
}


@dataclass(frozen=True)
class ViolationFlags:
    """Runtime switch for the single active seeded violation (if any)."""

    active: Optional[str] = None

    def __post_init__(self):
        if self.active is not None and self.active not in REGISTRY:
            raise ConfigError(f"unknown seeded violation {self.active!r}; expected one of {sorted(REGISTRY)}")

    def has(self, violation_id: str) -> bool:
        return self.active == violation_id

    @property
    def violation(self) -> Optional[SeededViolation]:
        return REGISTRY.get(self.active) if self.active else None


NO_VIOLATION = ViolationFlags()


def inject_seeded_violation(violation_id: Optional[str]) -> ViolationFlags:
    """Validate an id and return the flag set that activates it."""
    if violation_id is None:
        return NO_VIOLATION
    return ViolationFlags(violation_id.upper())
