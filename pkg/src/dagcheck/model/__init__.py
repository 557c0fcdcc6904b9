from .checker import InvariantReport, RejectReason, Verdict, accept_trace, check_invariants
from .config import ModelConfig, elect_leader, is_quorum, leader_round, quorum_stake, threshold
from .lts import ModelState, apply_action, enabled_actions, guard, model_init
from .walk import model_random_walk, random_walk

__all__ = [
    "InvariantReport",
    "RejectReason",
    "Verdict",
    "accept_trace",
    "check_invariants",
    "ModelConfig",
    "elect_leader",
    "is_quorum",
    "leader_round",
    "quorum_stake",
    "threshold",
    "ModelState",
    "apply_action",
    "enabled_actions",
    "guard",
    "model_init",
    "model_random_walk",
    "random_walk",
]
