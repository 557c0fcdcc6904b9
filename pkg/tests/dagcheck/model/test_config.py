import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dagcheck.errors import ConfigError
from dagcheck.model.config import (
    ModelConfig,
    elect_leader,
    is_quorum,
    leader_round,
    quorum_stake,
    support_round,
    threshold,
    waves_up_to,
)
from dagcheck.violations import inject_seeded_violation


@pytest.mark.parametrize("total, expected", [(3, 3), (4, 3), (6, 5), (7, 5), (10, 7), (100, 67)])
def test_threshold_values(total, expected):
    assert threshold(total) == expected


@settings(max_examples=300, deadline=None)
@given(st.lists(st.integers(min_value=1, max_value=50), min_size=1, max_size=12), st.data())
def test_quorum_matches_two_thirds_oracle(stakes, data):
    nodes = [f"n{i:02d}" for i in range(len(stakes))]
    table = dict(zip(nodes, stakes))
    chosen = data.draw(st.sets(st.sampled_from(nodes)))
    held = sum(table[p] for p in chosen)
    assert is_quorum(chosen, table) == (3 * held > 2 * sum(stakes))


@settings(max_examples=100, deadline=None)
@given(st.integers(min_value=1, max_value=40))
def test_two_quorums_intersect(n):
    nodes = [f"n{i:02d}" for i in range(n)]
    q = threshold(n)
    first, second = set(nodes[:q]), set(nodes[n - q :])
    assert first & second


def test_byzantine_third_is_rejected():
    with pytest.raises(ConfigError):
        ModelConfig.uniform(3, num_byzantine=1)
    assert ModelConfig.uniform(4, num_byzantine=1).byzantine_set == ("n00",)


def test_stakes_must_cover_nodes():
    with pytest.raises(ConfigError):
        ModelConfig(node_set=("n00", "n01"), stakes={"n00": 1})
    with pytest.raises(ConfigError):
        ModelConfig(node_set=("n00", "n01"), stakes={"n00": 1, "n01": 0})


def test_quorum_stake_counts_stake_not_nodes():
    cfg = ModelConfig(node_set=("n00", "n01", "n02", "n03"), stakes={"n00": 5, "n01": 1, "n02": 1, "n03": 1})
    assert quorum_stake(cfg) == 6
    assert not is_quorum(["n01", "n02", "n03"], cfg.stakes)
    assert is_quorum(["n00", "n01"], cfg.stakes)


def test_leader_election_is_round_robin(model_cfg):
    assert [elect_leader(w, model_cfg) for w in range(1, 7)] == ["n00", "n01", "n02", "n03", "n00", "n01"]
    with pytest.raises(ValueError):
        elect_leader(0, model_cfg)


def test_waves(model_cfg):
    assert leader_round(1, model_cfg) == 1
    assert support_round(3, model_cfg) == 6
    assert waves_up_to(12, model_cfg) == [1, 2, 3, 4, 5, 6]


def test_genesis_excluded_from_first_wave_when_seeded():
    cfg = ModelConfig.uniform(4, flags=inject_seeded_violation("V2"))
    assert leader_round(1, cfg) == 2
