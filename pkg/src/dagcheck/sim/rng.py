"""
Seeded pseudo-random source.

One stream per simulation run, consumed strictly in event order. Child seeds
for independent runs are derived by hashing, never by drawing from a parent
stream, so adding a run never perturbs another.
"""

from __future__ import annotations

import hashlib
import random
from enum import Enum
from typing import Sequence, Tuple, TypeVar, Union

T = TypeVar("T")

SEED_BITS = 64


class DrawKind(str, Enum):
    UNIFORM_INT = "uniform-int"
    UNIFORM_FLOAT = "uniform-float"


def derive_seed(seed: int, *labels: Union[int, str]) -> int:
    """Deterministic 64-bit child seed for (seed, labels...)."""
    text = ":".join([str(seed)] + [str(label) for label in labels])
    return int.from_bytes(hashlib.sha256(text.encode("utf-8")).digest()[:8], "big")


class SeededRandom:
    def __init__(self, seed: int):
        self.seed = seed
        self._random = random.Random(seed)
        self.draws = 0

    def uniform_int(self, low: int, high: int) -> int:
        """Inclusive on both ends."""
        if high < low:
            raise ValueError(f"empty range [{low}, {high}]")
        self.draws += 1
        return self._random.randint(low, high)

    def uniform_float(self, low: float, high: float) -> float:
        """In [low, high]."""
        if high < low:
            raise ValueError(f"empty range [{low}, {high}]")
        self.draws += 1
        value = self._random.uniform(low, high)
        return min(max(value, low), high)

    def next_random(self, kind: Union[DrawKind, str], bounds: Tuple[float, float]):
        kind = DrawKind(kind)
        low, high = bounds
        if kind is DrawKind.UNIFORM_INT:
            return self.uniform_int(int(low), int(high))
        return self.uniform_float(float(low), float(high))

    def chance(self, probability: float) -> bool:
        self.draws += 1
        return self._random.random() < probability

    def choice(self, items: Sequence[T]) -> T:
        if not items:
            raise IndexError("choice from an empty sequence")
        return items[self.uniform_int(0, len(items) - 1)]

    def shuffled(self, items: Sequence[T]) -> list:
        out = list(items)
        self.draws += 1
        self._random.shuffle(out)
        return out
