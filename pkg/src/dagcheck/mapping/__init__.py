from .abstraction import abstract_trace, project_state, project_view
from .replay import Divergence, DivergenceKind, ReplayOutcome, concretize, replay_check
from .table import ActionGroup, MappingTable, default_mapping_table

__all__ = [
    "abstract_trace",
    "project_state",
    "project_view",
    "Divergence",
    "DivergenceKind",
    "ReplayOutcome",
    "concretize",
    "replay_check",
    "ActionGroup",
    "MappingTable",
    "default_mapping_table",
]
