"""Probability formulas and whole-model propagation."""

from __future__ import annotations

import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from goalrisk import (
    GoalModel,
    GoalNode,
    ObstacleNode,
    Obstruction,
    Refinement,
    RefinementKind,
    and_obstacle_probability,
    goal_eps_from_children,
    leaf_goal_eps,
    or_obstacle_probability,
    propagate,
    severity,
)
from modelgen import permuted_clone, random_model

unit = st.floats(min_value=0.0, max_value=1.0, allow_nan=False)
unit_lists = st.lists(unit, min_size=1, max_size=6)
pairs = st.lists(st.tuples(unit, unit), min_size=1, max_size=6)


class TestOperations:
    def test_and_probability(self):
        assert and_obstacle_probability([0.2, 0.1], 0.95) == pytest.approx(
            0.2 * 0.1 * 0.95, abs=1e-15
        )
        assert and_obstacle_probability([0.5]) == 0.5

    def test_or_probability(self):
        expected = 1.0 - (1.0 - 0.6 * 0.99) * (1.0 - 0.5 * 0.99)
        assert or_obstacle_probability([(0.6, 0.99), (0.5, 0.99)]) == pytest.approx(
            expected, abs=1e-15
        )

    def test_leaf_goal_eps(self):
        assert leaf_goal_eps([(0.3, 0.5), (0.4, 1.0)]) == pytest.approx(
            (1 - 0.15) * (1 - 0.4), abs=1e-15
        )
        empty = leaf_goal_eps([])
        assert empty == 1.0
        assert isinstance(empty, float)

    def test_goal_eps_from_children(self):
        assert goal_eps_from_children([0.9, 0.8], RefinementKind.AND) == pytest.approx(0.72)
        assert goal_eps_from_children(
            [0.9, 0.8], RefinementKind.AND, 0.5
        ) == pytest.approx(0.36)
        assert goal_eps_from_children(
            [0.9, 0.8], RefinementKind.OR, [0.5, 1.0]
        ) == pytest.approx(1 - (1 - 0.45) * (1 - 0.8))
        assert goal_eps_from_children([0.9, 0.8], RefinementKind.OR) == pytest.approx(
            1 - 0.1 * 0.2
        )

    def test_severity_is_signed(self):
        assert severity(0.95, 0.9) == pytest.approx(0.05)
        assert severity(0.5, 0.9) == pytest.approx(-0.4)

    def test_operation_shape_errors(self):
        with pytest.raises(ValueError):
            and_obstacle_probability([])
        with pytest.raises(ValueError):
            or_obstacle_probability([])
        with pytest.raises(ValueError):
            goal_eps_from_children([], RefinementKind.AND)
        with pytest.raises(TypeError):
            goal_eps_from_children([0.5], RefinementKind.AND, [0.5])
        with pytest.raises(TypeError):
            goal_eps_from_children([0.5], RefinementKind.OR, 0.5)
        with pytest.raises(ValueError):
            goal_eps_from_children([0.5, 0.5], RefinementKind.OR, [1.0])


class TestOperationProperties:
    @given(unit_lists, unit)
    def test_and_bounded_by_smallest_child(self, probs, conditional):
        value = and_obstacle_probability(probs, conditional)
        assert 0.0 <= value <= min(probs) + 1e-12

    @given(pairs)
    def test_or_bounds(self, children):
        value = or_obstacle_probability(children)
        caused = [p * c for p, c in children]
        assert max(caused) - 1e-12 <= value <= min(1.0, math.fsum(caused)) + 1e-12

    @given(pairs)
    def test_leaf_goal_eps_in_unit_interval(self, obstructions):
        assert 0.0 <= leaf_goal_eps(obstructions) <= 1.0

    @given(pairs, st.integers(min_value=0, max_value=5), unit)
    def test_or_monotone_in_each_probability(self, children, index, bump):
        index %= len(children)
        p, c = children[index]
        raised = list(children)
        raised[index] = (min(1.0, p + bump), c)
        assert or_obstacle_probability(raised) >= or_obstacle_probability(children) - 1e-12

    @given(unit_lists, unit)
    def test_goal_and_or_agree_with_obstacle_duals(self, eps, conditional):
        assert goal_eps_from_children(eps, RefinementKind.AND, conditional) == (
            and_obstacle_probability(eps, conditional)
        )
        paired = [(e, conditional) for e in eps]
        assert goal_eps_from_children(
            eps, RefinementKind.OR, [conditional] * len(eps)
        ) == or_obstacle_probability(paired)


def tiny_model() -> GoalModel:
    return GoalModel(
        name="tiny",
        goals=(GoalNode("G", rds=0.9),),
        obstacles=(
            ObstacleNode("A", probability=0.3),
            ObstacleNode("B", probability=0.4),
        ),
        obstructions=(
            Obstruction("A", "G", conditional=0.5),
            Obstruction("B", "G"),
        ),
    )


class TestPropagate:
    def test_leaf_goal_numbers(self):
        report = propagate(tiny_model())
        eps = (1 - 0.3 * 0.5) * (1 - 0.4)
        assert report.goal_eps["G"] == pytest.approx(eps, abs=1e-15)
        assert report.goal_sv["G"] == pytest.approx(0.9 - eps, abs=1e-15)
        assert report.violated["G"] is True
        assert report.obstacle_probabilities == {"A": 0.3, "B": 0.4}

    def test_derived_obstacles_and_goal_tree(self):
        m = GoalModel(
            name="derived",
            goals=(
                GoalNode("Root", rds=0.5),
                GoalNode("L1", rds=0.99),
                GoalNode("L2"),
            ),
            obstacles=(
                ObstacleNode("Top"),
                ObstacleNode("X", probability=0.3),
                ObstacleNode("Y", probability=0.4),
            ),
            refinements=(
                Refinement("Root", RefinementKind.OR, ("L1", "L2"), or_conditionals=(0.9, None)),
                Refinement("Top", RefinementKind.AND, ("X", "Y"), and_conditional=0.8),
            ),
            obstructions=(Obstruction("Top", "L1", conditional=0.5),),
        )
        report = propagate(m)
        top = 0.3 * 0.4 * 0.8
        l1 = 1 - top * 0.5
        assert report.obstacle_probabilities["Top"] == pytest.approx(top, abs=1e-15)
        assert report.goal_eps["L1"] == pytest.approx(l1, abs=1e-15)
        assert report.goal_eps["L2"] == 1.0
        assert report.goal_eps["Root"] == pytest.approx(
            1 - (1 - l1 * 0.9) * (1 - 1.0), abs=1e-15
        )
        assert report.violated["Root"] is False
        assert report.violated["L1"] is True

    def test_exactly_met_requirement_is_not_violated(self):
        m = GoalModel(name="edge", goals=(GoalNode("G", rds=1.0),))
        report = propagate(m)
        assert report.goal_eps["G"] == 1.0
        assert report.violated["G"] is False
        assert report.goal_sv["G"] == 0.0

    def test_report_keys_are_id_sorted(self, ddp_model):
        report = propagate(ddp_model)
        for mapping in (
            report.obstacle_probabilities,
            report.goal_eps,
            report.goal_sv,
            report.violated,
        ):
            assert list(mapping) == sorted(mapping)

    @pytest.mark.parametrize("seed", range(25))
    def test_all_values_inside_unit_interval(self, seed):
        report = propagate(random_model(seed))
        values = list(report.obstacle_probabilities.values()) + list(
            report.goal_eps.values()
        )
        assert all(0.0 <= v <= 1.0 for v in values)

    @pytest.mark.parametrize("seed", range(10))
    def test_child_order_never_changes_results(self, seed):
        m = random_model(seed)
        shuffled = permuted_clone(m, seed + 1000)
        a, b = propagate(m), propagate(shuffled)
        assert a.obstacle_probabilities == b.obstacle_probabilities
        assert a.goal_eps == b.goal_eps
