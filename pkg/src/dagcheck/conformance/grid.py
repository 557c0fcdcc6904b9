"""
Fuzzing grid over simulator parameters.

Each fuzzed parameter draws ``k`` values uniformly from its range; the grid is
the lexicographic cross-product of the drawn values (``k ** p`` combinations
for ``p`` parameters), one simulator run per combination.
"""

from __future__ import annotations

import itertools
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Callable, Dict, List, Sequence, Tuple, TypeVar

import structlog

from dagcheck.errors import ConfigError
from dagcheck.sim.engine import SimConfig
from dagcheck.sim.rng import DrawKind, SeededRandom, derive_seed

logger = structlog.getLogger(__name__)

T = TypeVar("T")
R = TypeVar("R")

# fuzzable SimConfig fields drawn as integers; every other one is a float
INTEGER_PARAMETERS = ("num_nodes", "number_faulty", "vertex_production_rate", "max_rounds", "transactions_per_vertex")
FLOAT_PARAMETERS = (
    "failure_chance",
    "iteration_duration",
    "message_send_delay",
    "message_receive_delay",
    "max_virtual_time",
)
# drawn floats are rounded so the values read well in reports and config ids
FLOAT_DIGITS = 3


def _default_parameters() -> Dict[str, List[float]]:
    return {
        "num_nodes": [4, 20],
        "iteration_duration": [10.0, 30.0],
        "failure_chance": [0.0, 1.0],
    }


@dataclass(frozen=True)
class FuzzGridConfig:
    # parameter -> [low, high], both inclusive
    parameters: Dict[str, List[float]] = field(default_factory=_default_parameters)
    k: int = 1
    seed: int = 0

    def __post_init__(self):
        if self.k < 1:
            raise ConfigError("fuzz grid needs k >= 1")
        for name, bounds in self.parameters.items():
            if name not in INTEGER_PARAMETERS + FLOAT_PARAMETERS:
                raise ConfigError(f"{name!r} is not a fuzzable simulator parameter")
            if len(bounds) != 2 or bounds[0] > bounds[1]:
                raise ConfigError(f"range of {name!r} must be [low, high] with low <= high, got {bounds}")

    @property
    def size(self) -> int:
        return self.k ** len(self.parameters)


def draw_kind(name: str) -> DrawKind:
    return DrawKind.UNIFORM_INT if name in INTEGER_PARAMETERS else DrawKind.UNIFORM_FLOAT


def draw_values(grid: FuzzGridConfig, seed: int) -> Dict[str, List[float]]:
    """k values per parameter, in configuration order."""
    rng = SeededRandom(seed)
    values: Dict[str, List[float]] = {}
    for name, (low, high) in grid.parameters.items():
        drawn = [rng.next_random(draw_kind(name), (low, high)) for _ in range(grid.k)]
        if draw_kind(name) is DrawKind.UNIFORM_FLOAT:
            drawn = [round(v, FLOAT_DIGITS) for v in drawn]
        values[name] = drawn
    return values


def combinations(values: Dict[str, List[float]]) -> List[Dict[str, float]]:
    names = list(values)
    return [dict(zip(names, combo)) for combo in itertools.product(*(values[n] for n in names))]


def _fits(base: SimConfig, combo: Dict[str, float]) -> Dict[str, float]:
    if "num_nodes" not in combo:
        return combo
    combo = dict(combo)
    # a fixed faulty count too large for a small drawn cluster falls back to the default
    if "number_faulty" not in combo and base.number_faulty is not None:
        if base.number_faulty * 3 >= combo["num_nodes"]:
            combo["number_faulty"] = None
    if base.stakes is not None:
        combo["stakes"] = None
    return combo


def sim_configs(base: SimConfig, grid: FuzzGridConfig, batch: int = 0) -> List[Tuple[Dict[str, float], SimConfig]]:
    """(fuzzed values, simulator config) per grid combination of the batch-th draw."""
    seed = derive_seed(grid.seed, "batch", batch)
    out = []
    for i, combo in enumerate(combinations(draw_values(grid, derive_seed(seed, "draw")))):
        cfg = replace(base, **_fits(base, combo), seed=derive_seed(seed, "run", i))
        out.append((combo, cfg))
    logger.debug("Fuzz grid drawn.", size=len(out), batch=batch, seed=grid.seed)
    return out


def map_ordered(fn: Callable[[T], R], items: Sequence[T], workers: int = 1) -> List[R]:
    """fn over items, results in item order; a process pool when workers > 1."""
    if workers <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ProcessPoolExecutor(max_workers=min(workers, len(items))) as pool:
        return list(pool.map(fn, items))
