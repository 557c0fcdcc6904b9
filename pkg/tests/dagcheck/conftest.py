import pytest

from dagcheck.config.manager import ConfigManager, HarnessConfig, load_default_config
from dagcheck.mapping.table import MappingTable
from dagcheck.model.config import ModelConfig
from dagcheck.model.walk import random_walk
from dagcheck.sim.engine import SimConfig
from dagcheck.trace.store import TraceStore
from dagcheck.trace.trace import Trace


@pytest.fixture
def model_cfg() -> ModelConfig:
    """4 nodes, one of them byzantine, short rounds."""
    return ModelConfig.uniform(4, num_byzantine=1, round_bound=12)


@pytest.fixture
def walk_trace(model_cfg) -> Trace:
    return random_walk(model_cfg, 80, seed=11)


@pytest.fixture
def sim_cfg() -> SimConfig:
    return SimConfig(num_nodes=4, max_rounds=12, seed=3)


@pytest.fixture
def mapping_table() -> MappingTable:
    return load_default_config().mapping


@pytest.fixture
def store(tmp_path) -> TraceStore:
    with TraceStore(tmp_path / "store.txt") as s:
        yield s


@pytest.fixture
def harness_cfg(tmp_path) -> HarnessConfig:
    """Default config scaled down so a full conformance pass takes seconds."""
    cfg = ConfigManager.from_dict(
        {
            "sim": {"max_rounds": 12},
            "fuzz": {"parameters": {"num_nodes": [4, 7], "iteration_duration": [10.0, 30.0], "failure_chance": [0.0, 1.0]}},
            "model": {"round_bound": 12},
            "workflow": {"n": 2, "depth": 150, "budget": 4, "output_dir": str(tmp_path / "out")},
        }
    )
    return cfg
