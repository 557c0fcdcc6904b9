"""Virtual clock in integer microseconds."""

from __future__ import annotations

from decimal import ROUND_HALF_UP, Decimal
from typing import Union

MICROS_PER_MS = 1_000
MICROS_PER_SECOND = 1_000_000


def ms_to_micros(value: Union[int, float, str]) -> int:
    """Milliseconds to microseconds, rounding half up (25.3105 ms -> 25311 us)."""
    micros = Decimal(str(value)) * MICROS_PER_MS
    return int(micros.quantize(Decimal(1), rounding=ROUND_HALF_UP))


class VirtualClock:
    def __init__(self, start: int = 0):
        if start < 0:
            raise ValueError("virtual time starts at or after zero")
        self._now = start

    @property
    def now(self) -> int:
        return self._now

    def advance_to(self, time: int) -> None:
        if time < self._now:
            raise ValueError(f"cannot move virtual time backwards ({time} < {self._now})")
        self._now = time

    def __repr__(self) -> str:
        return f"VirtualClock(now={self._now}us)"
