from .clock import VirtualClock, ms_to_micros
from .concrete import ConcreteAction, ConcreteTrace, load_concrete, save_concrete
from .engine import FaultPlan, SimConfig, SimRun, Simulator, derive_fault_plan, run
from .events import Crash, Deliver, EquivocationInject, Event, EventQueue, ReconfigureAdd, ReviveNever, TimerFire
from .rng import SeededRandom, derive_seed

__all__ = [
    "VirtualClock",
    "ms_to_micros",
    "ConcreteAction",
    "ConcreteTrace",
    "load_concrete",
    "save_concrete",
    "FaultPlan",
    "SimConfig",
    "SimRun",
    "Simulator",
    "derive_fault_plan",
    "run",
    "Crash",
    "Deliver",
    "EquivocationInject",
    "Event",
    "EventQueue",
    "ReconfigureAdd",
    "ReviveNever",
    "TimerFire",
    "SeededRandom",
    "derive_seed",
]
