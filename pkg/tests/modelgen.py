"""Seeded random tree-model generator for the property and oracle tests.

Models built here are strict trees: every node has at most one refinement
parent and each root obstacle obstructs exactly one goal.  On such models
analytic propagation is exact, so the enumeration oracle must agree to
float precision.  ``max_coins`` bounds the number of strictly random
probabilities (values inside the open unit interval) so the oracle's world
count stays small.
"""

from __future__ import annotations

import dataclasses
import itertools
import random

from goalrisk import (
    GoalModel,
    GoalNode,
    ObstacleNode,
    Obstruction,
    Refinement,
    RefinementKind,
    build_model,
)


class _CoinBudget:
    """Doles out probabilities, degrading to 0/1 once ``limit`` random
    values have been issued."""

    def __init__(self, rng: random.Random, limit: int) -> None:
        self.rng = rng
        self.limit = limit
        self.used = 0

    def _spend(self, chance: float) -> bool:
        if self.used >= self.limit or self.rng.random() >= chance:
            return False
        self.used += 1
        return True

    def probability(self) -> float:
        if self._spend(0.85):
            return round(self.rng.uniform(0.01, 0.99), 6)
        return self.rng.choice((0.0, 1.0))

    def conditional(self) -> float | None:
        # None serializes to nothing and applies the default 1.0.
        if self._spend(0.35):
            return round(self.rng.uniform(0.02, 0.98), 6)
        return None


def random_model(seed: int, *, max_coins: int = 14) -> GoalModel:
    """A structurally valid random tree model, deterministic in ``seed``."""
    rng = random.Random(seed)
    budget = _CoinBudget(rng, max_coins)
    ids = itertools.count(1)
    goals: list[GoalNode] = []
    obstacles: list[ObstacleNode] = []
    refinements: list[Refinement] = []
    obstructions: list[Obstruction] = []
    leaf_goals: list[str] = []

    def refine(parent: str, children: list[str]) -> None:
        if rng.random() < 0.5:
            refinements.append(
                Refinement(
                    parent,
                    RefinementKind.AND,
                    tuple(children),
                    and_conditional=budget.conditional(),
                )
            )
        else:
            refinements.append(
                Refinement(
                    parent,
                    RefinementKind.OR,
                    tuple(children),
                    or_conditionals=tuple(budget.conditional() for _ in children),
                )
            )

    def make_goal(depth: int) -> str:
        gid = f"G{next(ids)}"
        rds = round(rng.uniform(0.5, 1.0), 3) if rng.random() < 0.7 else None
        weight = round(rng.uniform(0.1, 3.0), 2) if rng.random() < 0.3 else None
        goals.append(GoalNode(gid, rds=rds, weight=weight))
        if depth < 2 and rng.random() < 0.55:
            refine(gid, [make_goal(depth + 1) for _ in range(rng.randint(2, 3))])
        else:
            leaf_goals.append(gid)
        return gid

    def make_obstacle(depth: int) -> str:
        oid = f"O{next(ids)}"
        if depth < 2 and rng.random() < 0.45:
            obstacles.append(ObstacleNode(oid))
            refine(oid, [make_obstacle(depth + 1) for _ in range(rng.randint(2, 3))])
        else:
            obstacles.append(ObstacleNode(oid, probability=budget.probability()))
        return oid

    make_goal(0)
    for gid in leaf_goals:
        for _ in range(rng.randint(0, 2)):
            obstructions.append(
                Obstruction(make_obstacle(1), gid, conditional=budget.conditional())
            )

    model = build_model(
        goals, obstacles, refinements, obstructions, name=f"random-{seed}"
    )
    assert isinstance(model, GoalModel), model
    return model


def permuted_clone(model: GoalModel, seed: int) -> GoalModel:
    """Same graph with every refinement's child list reshuffled (per-child
    conditionals move with their children)."""
    rng = random.Random(seed)
    shuffled = []
    for r in model.refinements:
        order = list(range(len(r.children)))
        rng.shuffle(order)
        shuffled.append(
            dataclasses.replace(
                r,
                children=tuple(r.children[i] for i in order),
                or_conditionals=(
                    None
                    if r.or_conditionals is None
                    else tuple(r.or_conditionals[i] for i in order)
                ),
            )
        )
    return dataclasses.replace(model, refinements=tuple(shuffled))


def bump_leaf(model: GoalModel, seed: int) -> tuple[str, GoalModel] | None:
    """Raise one random leaf-obstacle probability; None when every leaf is
    already certain (or the model has no leaves)."""
    rng = random.Random(seed)
    candidates = [
        o.id
        for o in model.obstacles
        if o.probability is not None and o.probability < 1.0
    ]
    if not candidates:
        return None
    target = rng.choice(candidates)
    bumped = tuple(
        dataclasses.replace(
            o, probability=min(1.0, o.probability + rng.uniform(0.01, 0.3))
        )
        if o.id == target
        else o
        for o in model.obstacles
    )
    return target, dataclasses.replace(model, obstacles=bumped)


def shared_child_model() -> GoalModel:
    """Minimal diamond: one coin feeds two derived obstacles that both
    obstruct the same goal.  Analytic propagation multiplies the two
    branches as if independent (EPS 0.25) while the true satisfaction
    probability is 0.5, so this is the canonical witness that non-tree
    structure must be flagged rather than trusted."""
    model = GoalModel(
        name="shared-diamond",
        goals=(GoalNode("G", rds=1.0),),
        obstacles=(
            ObstacleNode("L", probability=0.5),
            ObstacleNode("P1"),
            ObstacleNode("P2"),
        ),
        refinements=(
            Refinement("P1", RefinementKind.OR, ("L",)),
            Refinement("P2", RefinementKind.OR, ("L",)),
        ),
        obstructions=(Obstruction("P1", "G"), Obstruction("P2", "G")),
    )
    return model
