import pytest

from dagcheck.conformance.grid import FuzzGridConfig, combinations, draw_values, map_ordered, sim_configs
from dagcheck.errors import ConfigError
from dagcheck.sim.engine import SimConfig

PARAMETERS = {
    "num_nodes": [4, 10],
    "iteration_duration": [10.0, 30.0],
    "failure_chance": [0.0, 1.0],
}


@pytest.fixture
def grid():
    return FuzzGridConfig(parameters=PARAMETERS, k=3, seed=5)


def test_grid_is_the_full_cross_product(grid):
    configs = sim_configs(SimConfig(), grid)
    assert grid.size == 27
    assert len(configs) == 27
    assert len({cfg.seed for _, cfg in configs}) == 27


def test_combinations_are_lexicographic():
    combos = combinations({"a": [1, 2], "b": [3, 4]})
    assert combos == [{"a": 1, "b": 3}, {"a": 1, "b": 4}, {"a": 2, "b": 3}, {"a": 2, "b": 4}]


def test_drawn_values_respect_kind_and_range(grid):
    values = draw_values(grid, 17)
    assert list(values) == list(PARAMETERS)
    assert all(isinstance(v, int) and 4 <= v <= 10 for v in values["num_nodes"])
    for name in ("iteration_duration", "failure_chance"):
        low, high = PARAMETERS[name]
        for v in values[name]:
            assert low <= v <= high
            assert round(v, 3) == v


def test_grid_is_reproducible(grid):
    first = sim_configs(SimConfig(), grid, batch=2)
    second = sim_configs(SimConfig(), grid, batch=2)
    assert first == second
    assert sim_configs(SimConfig(), grid, batch=3) != first


def test_fuzzed_values_are_applied(grid):
    for combo, cfg in sim_configs(SimConfig(), grid):
        assert cfg.num_nodes == combo["num_nodes"]
        assert cfg.iteration_duration == combo["iteration_duration"]
        assert cfg.failure_chance == combo["failure_chance"]


def test_fixed_faulty_count_adapts_to_small_clusters():
    base = SimConfig(num_nodes=10, number_faulty=3, stakes={f"n{i:02d}": 2 for i in range(10)})
    grid = FuzzGridConfig(parameters={"num_nodes": [4, 4]}, k=2)
    for _, cfg in sim_configs(base, grid):
        assert cfg.num_nodes == 4
        assert cfg.faulty_count == 1
        assert cfg.stakes is None


@pytest.mark.parametrize(
    "kwargs",
    [
        {"k": 0},
        {"parameters": {"colour": [0, 1]}},
        {"parameters": {"num_nodes": [10, 4]}},
        {"parameters": {"num_nodes": [4]}},
    ],
)
def test_invalid_grid(kwargs):
    with pytest.raises(ConfigError):
        FuzzGridConfig(**kwargs)


def test_map_ordered_keeps_item_order():
    items = [-3, 1, -2, 5]
    assert map_ordered(abs, items) == [3, 1, 2, 5]
    assert map_ordered(abs, items, workers=2) == [3, 1, 2, 5]
