from .manager import (
    ConfigManager,
    HarnessConfig,
    LoggingSection,
    MetricsSection,
    ModelSection,
    WorkflowSection,
    load_default_config,
)

__all__ = [
    "ConfigManager",
    "HarnessConfig",
    "LoggingSection",
    "MetricsSection",
    "ModelSection",
    "WorkflowSection",
    "load_default_config",
]
