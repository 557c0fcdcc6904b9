"""
配置管理器
Unified harness configuration: one YAML document, one dataclass per section.
"""

from __future__ import annotations

import copy
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

import dacite
import yaml

from dagcheck.conformance.grid import FuzzGridConfig
from dagcheck.errors import ConfigError
from dagcheck.mapping.table import MappingTable
from dagcheck.metrics import METRIC_FIELDS
from dagcheck.model.config import DEFAULT_RECONFIGURE_ROUND, ModelConfig
from dagcheck.sim.engine import SimConfig
from dagcheck.trace.state import node_id
from dagcheck.violations import ViolationFlags, inject_seeded_violation

DEFAULT_CONFIG_PATH = Path(__file__).resolve().parent.parent / "default_config.yaml"
STORE_ENV = "FMDSE_STORE"

SECTIONS = ("sim", "fuzz", "model", "mapping", "workflow", "metrics", "logging", "seeded_violation")

_DACITE = dacite.Config(strict=True, cast=[tuple], type_hooks={float: float})


@dataclass(frozen=True)
class ModelSection:
    num_nodes: int = 4
    # None: the largest count with byzantine stake * 3 < total stake
    num_byzantine: Optional[int] = None
    round_bound: int = 30
    # None disables the Reconfigure action
    reconfigure_round: Optional[int] = DEFAULT_RECONFIGURE_ROUND
    stakes: Optional[Dict[str, int]] = None

    def to_model_config(self, flags: ViolationFlags) -> ModelConfig:
        nodes = tuple(node_id(i) for i in range(self.num_nodes))
        byzantine = (self.num_nodes - 1) // 3 if self.num_byzantine is None else self.num_byzantine
        return ModelConfig(
            node_set=nodes,
            stakes=dict(self.stakes) if self.stakes is not None else {p: 1 for p in nodes},
            round_bound=self.round_bound,
            byzantine_set=nodes[:byzantine],
            reconfigure_round=self.reconfigure_round,
            flags=flags,
        )


@dataclass(frozen=True)
class WorkflowSection:
    budget: int = 10
    # Workflow II: traces per batch and walk depth
    n: int = 10
    depth: int = 1000
    store_path: str = ".dagcheck/store.txt"
    retry_bound: int = 100
    workers: int = 1
    all_violations: bool = False
    output_dir: str = "dagcheck-out"
    seed: int = 0

    def __post_init__(self):
        if self.budget < 0 or self.n < 0:
            raise ConfigError("budget and n must be non-negative")
        if self.depth < 1:
            raise ConfigError("depth must be positive")
        if self.retry_bound < 1 or self.workers < 1:
            raise ConfigError("retry_bound and workers must be positive")


@dataclass(frozen=True)
class MetricsSection:
    enabled: List[str] = field(default_factory=lambda: list(METRIC_FIELDS))

    def __post_init__(self):
        unknown = sorted(set(self.enabled) - set(METRIC_FIELDS))
        if unknown:
            raise ConfigError(f"unknown metrics {unknown}; expected a subset of {list(METRIC_FIELDS)}")


@dataclass(frozen=True)
class KeyReplacement:
    key: str
    new_value: str = "***"


@dataclass(frozen=True)
class LoggingSection:
    level: str = "INFO"
    file_path: Optional[str] = None
    key_blacklist: List[KeyReplacement] = field(default_factory=list)

    @property
    def blacklist(self) -> List[Dict[str, str]]:
        return [asdict(item) for item in self.key_blacklist]


@dataclass(frozen=True)
class HarnessConfig:
    mapping: MappingTable
    sim: SimConfig = field(default_factory=SimConfig)
    fuzz: FuzzGridConfig = field(default_factory=FuzzGridConfig)
    model: ModelSection = field(default_factory=ModelSection)
    workflow: WorkflowSection = field(default_factory=WorkflowSection)
    metrics: MetricsSection = field(default_factory=MetricsSection)
    logging: LoggingSection = field(default_factory=LoggingSection)
    seeded_violation: Optional[str] = None

    def __post_init__(self):
        # validates the id; flags are injected into the sim section here
        object.__setattr__(self, "sim", replace(self.sim, flags=self.flags))

    @property
    def flags(self) -> ViolationFlags:
        return inject_seeded_violation(self.seeded_violation)

    def model_config(self) -> ModelConfig:
        return self.model.to_model_config(self.flags)

    def store_path(self) -> Path:
        return Path(self.workflow.store_path)


def _merge(base: Dict[str, Any], override: Dict[str, Any]) -> Dict[str, Any]:
    """Section-wise merge; the mapping section is only ever replaced whole."""
    merged = copy.deepcopy(base)
    for key, value in override.items():
        if key in merged and isinstance(merged[key], dict) and isinstance(value, dict) and key != "mapping":
            merged[key] = {**merged[key], **value}
        else:
            merged[key] = value
    return merged


def _plain(value: Any) -> Any:
    if hasattr(value, "__dataclass_fields__"):
        return {f.name: _plain(getattr(value, f.name)) for f in fields(value) if f.name != "flags"}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if isinstance(value, dict):
        return {k: _plain(v) for k, v in value.items()}
    return value


class ConfigManager:
    """配置管理器"""

    @staticmethod
    def from_dict(data: Optional[Dict[str, Any]], defaults: bool = True) -> HarnessConfig:
        """Parse a config document; missing sections and keys take the packaged defaults."""
        data = data or {}
        if not isinstance(data, dict):
            raise ConfigError("config must be a single YAML mapping")
        unknown = sorted(set(data) - set(SECTIONS))
        if unknown:
            raise ConfigError(f"unknown config sections {unknown}")
        if defaults:
            data = _merge(_load_yaml(DEFAULT_CONFIG_PATH), data)
        try:
            return dacite.from_dict(HarnessConfig, data, config=_DACITE)
        except dacite.DaciteError as e:
            raise ConfigError(f"invalid config: {e}") from e
        except (TypeError, ValueError) as e:
            raise ConfigError(f"invalid config value: {e}") from e

    @staticmethod
    def load_from_yaml(config_path: Union[str, Path]) -> HarnessConfig:
        """从YAML文件加载配置"""
        return ConfigManager.from_dict(_load_yaml(Path(config_path)))

    @staticmethod
    def to_dict(cfg: HarnessConfig) -> Dict[str, Any]:
        return {name: _plain(getattr(cfg, name)) for name in SECTIONS}

    @staticmethod
    def dump_to_yaml(cfg: HarnessConfig, output_path: Optional[Union[str, Path]] = None) -> str:
        """导出配置到YAML; also written to output_path when given"""
        text = yaml.safe_dump(ConfigManager.to_dict(cfg), default_flow_style=False, allow_unicode=True, sort_keys=False)
        if output_path is not None:
            Path(output_path).parent.mkdir(parents=True, exist_ok=True)
            Path(output_path).write_text(text, encoding="utf-8")
        return text

    @staticmethod
    def with_overrides(cfg: HarnessConfig, **overrides: Any) -> HarnessConfig:
        """Apply dotted-key overrides (``workflow.budget=4``); None values are ignored."""
        data = ConfigManager.to_dict(cfg)
        for dotted, value in overrides.items():
            if value is None:
                continue
            section, _, key = dotted.partition(".")
            if section not in SECTIONS:
                raise ConfigError(f"unknown config section {section!r}")
            if key:
                data[section][key] = value
            else:
                data[section] = value
        return ConfigManager.from_dict(data, defaults=False)


def _load_yaml(path: Path) -> Dict[str, Any]:
    try:
        with open(path, "r", encoding="utf-8") as f:
            data = yaml.safe_load(f)
    except OSError as e:
        raise ConfigError(f"cannot read config {path}: {e}") from e
    except yaml.YAMLError as e:
        raise ConfigError(f"malformed YAML in {path}: {e}") from e
    return data or {}


def load_default_config() -> HarnessConfig:
    return ConfigManager.from_dict({})
