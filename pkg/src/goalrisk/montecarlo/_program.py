"""Flat evaluation program compiled from a goal-obstacle model.

Sampling and exact enumeration both need the same thing: every node as a
boolean function of independent coins.  The compiler walks the model once
in topological order and emits one slot per node, children before parents,
with four opcodes:

    LEAF  obstacle with annotated probability: coin(site)
    AND   refined node: all args true, then coin(joint conditional site)
    OR    refined node: any (arg true and coin(per-arg site))
    NOR   leaf goal: no (obstacle true and coin(obstruction site));
          true when there are no obstructions

Each coin site belongs to exactly one slot argument, so a draw is never
reused; correlation between slots arises only by sharing child slots.
Args are listed in child-id order, which fixes the site numbering (and
hence every sampled world) independently of declaration order.

The compiler also tracks, per slot, the set of sites its value depends on.
A slot is ``exact`` when its children are exact and their dependency sets
are pairwise disjoint: for such slots the closed-form propagation equals
the true probability, so enumeration and simulation must agree with it.
Slots that share stochastic structure are still sampled faithfully but the
closed form is only an independence approximation there.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..model import (
    GoalModel,
    NodeId,
    RefinementKind,
    obstruction_map,
    refinement_map,
    topological_order,
)
from ._rng import probability_threshold

OP_LEAF = 0
OP_AND = 1
OP_OR = 2
OP_NOR = 3


@dataclass(frozen=True)
class Program:
    """Compiled model: parallel arrays over slots (nodes) and sites (coins)."""

    ids: tuple[NodeId, ...]
    is_goal: np.ndarray
    op: np.ndarray
    arg_off: np.ndarray
    args: np.ndarray
    arg_sites: np.ndarray
    node_site: np.ndarray
    site_probs: np.ndarray
    site_thresholds: np.ndarray
    exact: np.ndarray

    @property
    def n_slots(self) -> int:
        return len(self.ids)

    @property
    def n_sites(self) -> int:
        return len(self.site_probs)

    def random_sites(self) -> np.ndarray:
        """Indices of sites whose coin is genuinely random (0 < p < 1)."""
        return np.flatnonzero((self.site_probs > 0.0) & (self.site_probs < 1.0))

    def slot_of(self, node: NodeId) -> int:
        return self.ids.index(node)


def compile_program(model: GoalModel) -> Program:
    """Compile a validated model into a flat evaluation program."""
    refinements = refinement_map(model)
    obstructions = obstruction_map(model)
    goal_ids = {g.id for g in model.goals}
    obstacles_by_id = {o.id: o for o in model.obstacles}

    order = topological_order(model)
    slot_of = {node: i for i, node in enumerate(order)}

    op_list: list[int] = []
    args_list: list[int] = []
    arg_sites_list: list[int] = []
    arg_off_list: list[int] = [0]
    node_site_list: list[int] = []
    site_probs: list[float] = []

    masks: list[int] = []
    exact_list: list[bool] = []

    def new_site(probability: float) -> int:
        site_probs.append(probability)
        return len(site_probs) - 1

    for node in order:
        refinement = refinements.get(node)
        child_ids: list[NodeId]
        if refinement is not None:
            indexed = sorted(
                range(len(refinement.children)), key=lambda i: refinement.children[i]
            )
            child_ids = [refinement.children[i] for i in indexed]
            if refinement.kind is RefinementKind.AND:
                op_list.append(OP_AND)
                args_list.extend(slot_of[c] for c in child_ids)
                arg_sites_list.extend(-1 for _ in child_ids)
                node_site_list.append(new_site(refinement.joint_conditional))
            else:
                op_list.append(OP_OR)
                for pos, child in zip(indexed, child_ids):
                    args_list.append(slot_of[child])
                    arg_sites_list.append(new_site(refinement.conditional_for(pos)))
                node_site_list.append(-1)
        elif node in goal_ids:
            links = obstructions.get(node, [])
            child_ids = [link.obstacle for link in links]
            op_list.append(OP_NOR)
            for link in links:
                args_list.append(slot_of[link.obstacle])
                arg_sites_list.append(new_site(link.conditional_value))
            node_site_list.append(-1)
        else:
            annotated = obstacles_by_id[node].probability
            if annotated is None:
                raise ValueError(f"leaf obstacle {node!r} has no probability")
            child_ids = []
            op_list.append(OP_LEAF)
            node_site_list.append(new_site(annotated))
        arg_off_list.append(len(args_list))

        own_sites = 0
        if node_site_list[-1] >= 0:
            own_sites |= 1 << node_site_list[-1]
        for site in arg_sites_list[arg_off_list[-2] : arg_off_list[-1]]:
            if site >= 0:
                own_sites |= 1 << site
        combined = own_sites
        disjoint = True
        for child in child_ids:
            child_mask = masks[slot_of[child]]
            if combined & child_mask:
                disjoint = False
            combined |= child_mask
        masks.append(combined)
        exact_list.append(disjoint and all(exact_list[slot_of[c]] for c in child_ids))

    return Program(
        ids=tuple(order),
        is_goal=np.array([node in goal_ids for node in order], dtype=bool),
        op=np.array(op_list, dtype=np.int8),
        arg_off=np.array(arg_off_list, dtype=np.int32),
        args=np.array(args_list, dtype=np.int32),
        arg_sites=np.array(arg_sites_list, dtype=np.int32),
        node_site=np.array(node_site_list, dtype=np.int32),
        site_probs=np.array(site_probs, dtype=np.float64),
        site_thresholds=np.array(
            [probability_threshold(p) for p in site_probs], dtype=np.uint64
        ),
        exact=np.array(exact_list, dtype=bool),
    )
