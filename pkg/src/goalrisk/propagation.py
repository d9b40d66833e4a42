"""Bottom-up probability propagation over a goal-obstacle graph.

Obstacle estimates travel in three stages: leaf obstacles to root obstacles
through their refinements, root obstacles to the leaf goals they obstruct,
and leaf goals to root goals through the goal refinements.  All arithmetic
is plain binary double precision with no intermediate rounding.

The closed forms assume the combined branches are probabilistically
independent, which holds whenever the graph shares no node between
refinements.  For models that do share structure (``shared-child``
validation warning) the Monte Carlo module is the ground truth.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Sequence

from .model import (
    GoalModel,
    NodeId,
    Refinement,
    RefinementKind,
    obstruction_map,
    refinement_map,
    topological_order,
)


@dataclass(frozen=True)
class AnalysisReport:
    """Propagated probabilities for every node of one model.

    ``goal_sv`` is the raw signed gap ``rds - eps`` (negative when the goal
    exceeds its requirement); ranking clamps it at zero.  ``violated`` is
    the predicate ``eps < rds``.
    """

    obstacle_probabilities: Mapping[NodeId, float]
    goal_eps: Mapping[NodeId, float]
    goal_sv: Mapping[NodeId, float]
    violated: Mapping[NodeId, bool]


def and_obstacle_probability(
    child_probs: Sequence[float], joint_conditional: float = 1.0
) -> float:
    """Occurrence probability of an AND-refined obstacle.

    The parent occurs when every child occurs and their combination causes
    it, so the result is the product of the child probabilities and the
    joint conditional.
    """
    if not child_probs:
        raise ValueError("AND refinement needs at least one child probability")
    return math.prod(child_probs) * joint_conditional


def or_obstacle_probability(children: Sequence[tuple[float, float]]) -> float:
    """Occurrence probability of an OR-refined obstacle.

    ``children`` pairs each child probability with the conditional that the
    child's occurrence causes the parent.  The parent fails to occur only
    when no child independently causes it: ``1 - prod(1 - p_i * c_i)``.
    """
    if not children:
        raise ValueError("OR refinement needs at least one child")
    return 1.0 - math.prod(1.0 - p * c for p, c in children)


def leaf_goal_eps(obstructions: Sequence[tuple[float, float]]) -> float:
    """Satisfaction probability of a leaf goal under its obstructions.

    Each pair is (root obstacle probability, conditional that the obstacle
    actually denies the goal).  The goal survives when no obstruction
    fires: ``prod(1 - P_i * c_i)``; with no obstructions that is 1.0.
    """
    return math.prod((1.0 - p * c for p, c in obstructions), start=1.0)


def goal_eps_from_children(
    child_eps: Sequence[float],
    kind: RefinementKind,
    conditionals: float | Sequence[float] | None = None,
) -> float:
    """Satisfaction probability of a refined goal from its children.

    AND: all children must hold and jointly suffice (scalar conditional).
    OR: any child with its own conditional suffices.  This is the
    deterministic special case of the full joint expansion over child
    outcomes; the general conditional table is out of scope.
    """
    if not child_eps:
        raise ValueError("goal refinement needs at least one child")
    if kind is RefinementKind.AND:
        if conditionals is None:
            conditionals = 1.0
        if not isinstance(conditionals, (int, float)):
            raise TypeError("AND refinement takes one joint conditional")
        return math.prod(child_eps) * float(conditionals)
    if conditionals is None:
        conditionals = [1.0] * len(child_eps)
    if isinstance(conditionals, (int, float)):
        raise TypeError("OR refinement takes one conditional per child")
    if len(conditionals) != len(child_eps):
        raise ValueError("per-child conditionals must align with children")
    return 1.0 - math.prod(1.0 - e * c for e, c in zip(child_eps, conditionals))


def severity(rds: float, eps: float) -> float:
    """Signed severity of violation ``rds - eps``; positive means the goal
    misses its requirement.  Callers clamp at zero for ranking."""
    return rds - eps


def _sorted_child_values(
    refinement: Refinement, values: Mapping[NodeId, float]
) -> tuple[list[float], list[float]]:
    """Child values and per-child conditionals in child-id order, so that
    results do not depend on declaration order even in the last bit."""
    indexed = sorted(range(len(refinement.children)), key=lambda i: refinement.children[i])
    child_values = [values[refinement.children[i]] for i in indexed]
    conditionals = [refinement.conditional_for(i) for i in indexed]
    return child_values, conditionals


def propagate(model: GoalModel) -> AnalysisReport:
    """Evaluate the whole model: every obstacle's occurrence probability and
    every goal's EPS, SV, and violation flag.

    Requires a model that validated with no errors.  Nodes are evaluated in
    topological order; children are combined in id order so refinement
    declaration order cannot change any result.
    """
    refinements = refinement_map(model)
    obstructions = obstruction_map(model)
    goal_ids = {g.id for g in model.goals}
    goals_by_id = {g.id: g for g in model.goals}
    obstacles_by_id = {o.id: o for o in model.obstacles}

    obstacle_probability: dict[NodeId, float] = {}
    goal_eps: dict[NodeId, float] = {}

    for node in topological_order(model):
        refinement = refinements.get(node)
        if node not in goal_ids:
            if refinement is None:
                annotated = obstacles_by_id[node].probability
                if annotated is None:
                    raise ValueError(f"leaf obstacle {node!r} has no probability")
                obstacle_probability[node] = annotated
            elif refinement.kind is RefinementKind.AND:
                child_values, _ = _sorted_child_values(refinement, obstacle_probability)
                obstacle_probability[node] = and_obstacle_probability(
                    child_values, refinement.joint_conditional
                )
            else:
                child_values, conditionals = _sorted_child_values(
                    refinement, obstacle_probability
                )
                obstacle_probability[node] = or_obstacle_probability(
                    list(zip(child_values, conditionals))
                )
        elif refinement is None:
            goal_eps[node] = leaf_goal_eps(
                [
                    (obstacle_probability[link.obstacle], link.conditional_value)
                    for link in obstructions.get(node, ())
                ]
            )
        elif refinement.kind is RefinementKind.AND:
            child_values, _ = _sorted_child_values(refinement, goal_eps)
            goal_eps[node] = goal_eps_from_children(
                child_values, RefinementKind.AND, refinement.joint_conditional
            )
        else:
            child_values, conditionals = _sorted_child_values(refinement, goal_eps)
            goal_eps[node] = goal_eps_from_children(
                child_values, RefinementKind.OR, conditionals
            )

    goal_sv = {
        gid: severity(goals_by_id[gid].rds_value, goal_eps[gid]) for gid in sorted(goal_eps)
    }
    return AnalysisReport(
        obstacle_probabilities={k: obstacle_probability[k] for k in sorted(obstacle_probability)},
        goal_eps={k: goal_eps[k] for k in sorted(goal_eps)},
        goal_sv=goal_sv,
        violated={gid: goal_eps[gid] < goals_by_id[gid].rds_value for gid in sorted(goal_eps)},
    )
