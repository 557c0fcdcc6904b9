from .grid import FuzzGridConfig, combinations, draw_values, sim_configs
from .report import BatchRecord, ConformanceReport, ViolationReport, classify, report_violation
from .workflows import WorkflowResult, conf_test, workflow_I, workflow_II

__all__ = [
    "FuzzGridConfig",
    "combinations",
    "draw_values",
    "sim_configs",
    "BatchRecord",
    "ConformanceReport",
    "ViolationReport",
    "classify",
    "report_violation",
    "WorkflowResult",
    "conf_test",
    "workflow_I",
    "workflow_II",
]
