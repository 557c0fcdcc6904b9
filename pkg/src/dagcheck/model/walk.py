"""Random-walk trace generation over the model (model fuzzing)."""

from __future__ import annotations

from typing import List

import structlog

from dagcheck.model.config import ModelConfig
from dagcheck.model.lts import all_at_bound, apply_action, enabled_actions, model_init
from dagcheck.sim.rng import SeededRandom, derive_seed
from dagcheck.trace.trace import Trace, TraceMeta, TraceStep

logger = structlog.getLogger(__name__)


def random_walk(cfg: ModelConfig, depth: int, seed: int) -> Trace:
    """One execution: sample uniformly among canonically ordered enabled actions."""
    rng = SeededRandom(seed)
    state = model_init(cfg)
    init = state
    steps: List[TraceStep] = []
    while len(steps) < depth and not all_at_bound(state, cfg):
        enabled = sorted(enabled_actions(state, cfg))
        if not enabled:
            break
        action = rng.choice(enabled)
        state = apply_action(state, action, cfg)
        steps.append(TraceStep(action, state.digest, state.abstract))
    return Trace(
        init.digest,
        tuple(steps),
        TraceMeta(source="model", seed=seed, config_id=cfg.config_id),
        init_state=init.abstract,
    )


def model_random_walk(cfg: ModelConfig, n: int, d: int, seed: int) -> List[Trace]:
    """n traces of depth at most d; trace i uses a seed derived from (seed, i)."""
    if n < 1 or d < 1:
        raise ValueError("n and d must be positive")
    traces = [random_walk(cfg, d, derive_seed(seed, "walk", i)) for i in range(n)]
    logger.info(
        "Model random walk finished.",
        traces=n,
        depth=d,
        seed=seed,
        lengths=[len(t) for t in traces],
    )
    return traces
