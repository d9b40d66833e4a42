"""Criticality ranking: which leaf obstacles hurt the goals most.

A combination of leaf obstacles is scored by silencing every other leaf
(probability zero), re-propagating, and accumulating the goals' weighted
severity.  Combinations are enumerated exhaustively up to a size limit,
with a hard budget on the number of evaluations so a fat model cannot
quietly demand a combinatorial run.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass
from itertools import combinations
from typing import Iterable, Mapping

from .model import GoalModel, NodeId, leaf_obstacles
from .propagation import propagate

DEFAULT_TOP = 10
DEFAULT_BUDGET = 1_000_000


@dataclass(frozen=True)
class CriticalityRecord:
    """One scored combination: ids (sorted), per-goal clamped severity,
    and the weighted total score."""

    combination: tuple[NodeId, ...]
    per_goal_sv: Mapping[NodeId, float]
    score: float


def restrict(model: GoalModel, active: Iterable[NodeId]) -> GoalModel:
    """The same model with every leaf obstacle outside ``active`` silenced
    (probability zero).  ``active`` must be a non-empty subset of the leaf
    obstacles."""
    keep = set(active)
    if not keep:
        raise ValueError("active set must not be empty")
    leaves = set(leaf_obstacles(model))
    unknown = sorted(keep - leaves)
    if unknown:
        raise ValueError(f"not leaf obstacles of this model: {', '.join(unknown)}")
    silenced = tuple(
        dataclasses.replace(o, probability=0.0)
        if o.probability is not None and o.id not in keep
        else o
        for o in model.obstacles
    )
    return dataclasses.replace(model, obstacles=silenced)


def _score(model: GoalModel, combo: tuple[NodeId, ...]) -> CriticalityRecord:
    report = propagate(restrict(model, combo))
    weights = {g.id: g.weight_value for g in model.goals}
    per_goal = {gid: max(0.0, sv) for gid, sv in report.goal_sv.items()}
    score = math.fsum(weights[gid] * sv for gid, sv in per_goal.items())
    return CriticalityRecord(combination=combo, per_goal_sv=per_goal, score=score)


def rank_critical(
    model: GoalModel,
    max_combo_size: int = 1,
    top: int = DEFAULT_TOP,
    *,
    budget: int = DEFAULT_BUDGET,
) -> list[CriticalityRecord]:
    """Rank leaf-obstacle combinations by weighted severity, best first.

    Ties break toward smaller combinations, then lexicographic ids, so the
    ranking is a total order.  Raises if ``max_combo_size`` exceeds the
    number of leaves or the implied evaluation count exceeds ``budget``.
    """
    if max_combo_size < 1:
        raise ValueError("max_combo_size must be at least 1")
    if top < 1:
        raise ValueError("top must be at least 1")
    leaves = leaf_obstacles(model)
    if not leaves:
        return []
    if max_combo_size > len(leaves):
        raise ValueError(
            f"max_combo_size {max_combo_size} exceeds the {len(leaves)} leaf obstacles"
        )
    total = sum(math.comb(len(leaves), k) for k in range(1, max_combo_size + 1))
    if total > budget:
        raise ValueError(
            f"{total} combinations exceed the evaluation budget of {budget}"
        )
    records = [
        _score(model, combo)
        for size in range(1, max_combo_size + 1)
        for combo in combinations(leaves, size)
    ]
    records.sort(key=lambda r: (-r.score, len(r.combination), r.combination))
    return records[:top]
