"""Deterministic Master/Robot multi-agent simulator for courier-robot fleets."""

from .agents import MasterAgent, RobotAgent, Simulation, run_simulation
from .dispatch import (
    QueuePlan,
    RosterEntry,
    create_strategy,
    designations,
    estimate_task_ticks,
    next_sequential_action,
    plan_balanced,
    register_strategy,
)
from .domain import (
    Cell,
    ObstacleScript,
    Phase,
    Product,
    RobotProfile,
    Scenario,
    TaskKind,
    TaskSpec,
    expand_product,
    validate_scenario,
)
from .messaging import MessageBus, conversation_check
from .report import RunReport, audit_trace, compute_report, load_scenario
from .world import WorldState, WorldStatics, sense, shortest_path, step_world

__version__ = "0.1.0"
