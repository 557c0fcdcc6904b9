import pytest
import yaml

from dagcheck.config.manager import ConfigManager, load_default_config
from dagcheck.errors import ConfigError


def test_default_config_loads():
    cfg = load_default_config()
    assert cfg.sim.num_nodes == 4
    assert cfg.sim.faulty == ("n00",)
    assert cfg.fuzz.k == 1
    assert cfg.workflow.retry_bound == 100
    assert cfg.seeded_violation is None
    assert len(cfg.mapping.action_groups) == 6
    assert cfg.model_config().byzantine_set == ("n00",)


def test_dump_and_load_is_a_fixed_point(harness_cfg, tmp_path):
    path = tmp_path / "cfg.yaml"
    text = ConfigManager.dump_to_yaml(harness_cfg, path)
    reloaded = ConfigManager.load_from_yaml(path)
    assert ConfigManager.to_dict(reloaded) == ConfigManager.to_dict(harness_cfg)
    assert ConfigManager.dump_to_yaml(reloaded) == text


def test_partial_sections_keep_defaults():
    cfg = ConfigManager.from_dict({"sim": {"num_nodes": 7}})
    assert cfg.sim.num_nodes == 7
    assert cfg.sim.faulty_count == 2
    assert cfg.sim.max_rounds == 30


def test_integer_ranges_are_read_as_floats():
    cfg = ConfigManager.from_dict({"sim": {"iteration_duration": 15}, "fuzz": {"parameters": {"failure_chance": [0, 1]}}})
    assert cfg.sim.iteration_duration == 15.0
    assert cfg.fuzz.parameters == {"failure_chance": [0.0, 1.0]}


@pytest.mark.parametrize(
    "data",
    [
        {"simulator": {}},
        {"sim": {"bogus": 1}},
        {"sim": {"num_nodes": "four"}},
        {"sim": {"num_nodes": 3, "number_faulty": 1}},
        {"workflow": {"depth": 0}},
        {"metrics": {"enabled": ["latency"]}},
        {"fuzz": {"parameters": {"num_nodes": [9, 4]}}},
        {"mapping": {"action_groups": []}},
        {"seeded_violation": "V11"},
    ],
)
def test_invalid_config_is_rejected(data):
    with pytest.raises(ConfigError):
        ConfigManager.from_dict(data)


def test_seeded_violation_reaches_the_simulator():
    cfg = ConfigManager.from_dict({"seeded_violation": "v3"})
    assert cfg.flags.has("V3")
    assert cfg.sim.flags.has("V3")
    assert cfg.model_config().flags.has("V3")


def test_overrides(harness_cfg):
    cfg = ConfigManager.with_overrides(harness_cfg, **{"workflow.budget": 7, "workflow.n": None, "sim.seed": 3})
    assert cfg.workflow.budget == 7
    assert cfg.workflow.n == harness_cfg.workflow.n
    assert cfg.sim.seed == 3
    with pytest.raises(ConfigError):
        ConfigManager.with_overrides(harness_cfg, **{"nowhere.key": 1})
    with pytest.raises(ConfigError):
        ConfigManager.with_overrides(harness_cfg, **{"workflow.colour": "red"})


def test_logging_blacklist(tmp_path):
    path = tmp_path / "cfg.yaml"
    path.write_text(
        yaml.safe_dump({"logging": {"level": "DEBUG", "key_blacklist": [{"key": "params"}]}}), encoding="utf-8"
    )
    cfg = ConfigManager.load_from_yaml(path)
    assert cfg.logging.level == "DEBUG"
    assert cfg.logging.blacklist == [{"key": "params", "new_value": "***"}]


def test_unreadable_config_files(tmp_path):
    with pytest.raises(ConfigError):
        ConfigManager.load_from_yaml(tmp_path / "missing.yaml")
    broken = tmp_path / "broken.yaml"
    broken.write_text("sim: [unclosed\n", encoding="utf-8")
    with pytest.raises(ConfigError):
        ConfigManager.load_from_yaml(broken)
    listing = tmp_path / "list.yaml"
    listing.write_text("- a\n- b\n", encoding="utf-8")
    with pytest.raises(ConfigError):
        ConfigManager.load_from_yaml(listing)
