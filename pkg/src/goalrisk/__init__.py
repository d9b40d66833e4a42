"""goalrisk: risk analysis over AND/OR goal-obstacle models.

Parse a model, propagate leaf-obstacle probabilities into per-goal
satisfaction estimates, rank the obstacle combinations that hurt the most,
suggest resolution tactics, and verify any of it against exact enumeration
or seeded Monte Carlo simulation.
"""

from .model import (
    Diagnostic,
    GoalModel,
    GoalNode,
    NodeId,
    ObstacleNode,
    Obstruction,
    Refinement,
    RefinementKind,
    Severity,
    SourcePosition,
    build_model,
    leaf_obstacles,
    obstruction_map,
    refinement_map,
    topological_order,
    validate,
)
from .parser import parse, serialize
from .propagation import (
    AnalysisReport,
    and_obstacle_probability,
    goal_eps_from_children,
    leaf_goal_eps,
    or_obstacle_probability,
    propagate,
    severity,
)
from .montecarlo import (
    BACKEND,
    CounterStream,
    SimulationResult,
    brute_force_exact,
    estimate,
    sample_world,
)
from .criticality import CriticalityRecord, rank_critical, restrict
from .tactics import Tactic, default_catalog, load_catalog, match_tactics

__version__ = "0.1.0"

__all__ = [
    "AnalysisReport",
    "BACKEND",
    "CounterStream",
    "CriticalityRecord",
    "Diagnostic",
    "GoalModel",
    "GoalNode",
    "NodeId",
    "ObstacleNode",
    "Obstruction",
    "Refinement",
    "RefinementKind",
    "Severity",
    "SimulationResult",
    "SourcePosition",
    "Tactic",
    "and_obstacle_probability",
    "brute_force_exact",
    "build_model",
    "default_catalog",
    "estimate",
    "goal_eps_from_children",
    "leaf_goal_eps",
    "leaf_obstacles",
    "load_catalog",
    "match_tactics",
    "obstruction_map",
    "or_obstacle_probability",
    "parse",
    "propagate",
    "rank_critical",
    "refinement_map",
    "restrict",
    "sample_world",
    "serialize",
    "severity",
    "topological_order",
    "validate",
]
