"""
Harness error hierarchy.

Protocol discrepancies are reported as values (rejections, divergences,
violation reports). Exceptions here signal defects of the harness itself or of
its inputs.
"""

from typing import Optional


class HarnessError(Exception):
    """Base class of every dagcheck error."""

    exit_code = 2


class ConfigError(HarnessError):
    """Invalid configuration value, unknown key or unknown violation id."""


class MappingCoverageError(HarnessError):
    """A concrete action is not matched by any mapping-table pattern."""

    def __init__(self, kind: str, index: int):
        super().__init__(f"concrete action {kind!r} at index {index} is not covered by the mapping table")
        self.kind = kind
        self.index = index


class TraceParseError(HarnessError):
    """Malformed trace file."""

    def __init__(self, message: str, line: int, offset: Optional[int] = None):
        where = f"line {line}" if offset is None else f"line {line}, offset {offset}"
        super().__init__(f"{message} ({where})")
        self.line = line
        self.offset = offset


class StoreError(HarnessError):
    """Trace store I/O failure."""


class SchedulingError(HarnessError):
    """An event was scheduled before the current virtual time."""


class PreconditionViolation(HarnessError):
    """A model action was applied in a state where its guard does not hold."""

    def __init__(self, action, reason: str):
        super().__init__(f"{action} is not enabled: {reason}")
        self.action = action
        self.reason = reason


class EmptyTraceError(HarnessError):
    """A trace (or the abstraction of a concrete trace) has no steps."""
