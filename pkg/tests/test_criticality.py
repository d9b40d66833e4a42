"""Obstacle-combination ranking by weighted goal severity."""

from __future__ import annotations

import math

import pytest

from goalrisk import (
    GoalModel,
    GoalNode,
    ObstacleNode,
    Obstruction,
    leaf_obstacles,
    propagate,
    rank_critical,
    restrict,
)
from modelgen import random_model


def weighted_score(model: GoalModel, combo: tuple[str, ...]) -> float:
    report = propagate(restrict(model, combo))
    weights = {g.id: g.weight_value for g in model.goals}
    return math.fsum(weights[g] * max(0.0, sv) for g, sv in report.goal_sv.items())


class TestRestrict:
    def test_silences_everything_outside_the_active_set(self, ddp_model):
        restricted = restrict(ddp_model, {"SessionHijacking"})
        probs = {o.id: o.probability for o in restricted.obstacles}
        assert probs["SessionHijacking"] == 0.03
        assert probs["CodeAlteration"] == 0.0
        assert probs["IncompatibleAPIs"] == 0.0
        assert all(
            o.probability is None for o in restricted.obstacles if o.id == "DataDisclosure"
        )

    def test_full_active_set_changes_nothing(self, s3_model):
        assert restrict(s3_model, leaf_obstacles(s3_model)) == s3_model

    def test_rejects_bad_active_sets(self, s3_model):
        with pytest.raises(ValueError):
            restrict(s3_model, set())
        with pytest.raises(ValueError):
            restrict(s3_model, {"ExtraMgmtEffort"})  # derived, not a leaf
        with pytest.raises(ValueError):
            restrict(s3_model, {"NoSuchNode"})


class TestRankCritical:
    def test_ddp_top_three_single_obstacles(self, ddp_model):
        top = rank_critical(ddp_model, max_combo_size=1, top=3)
        assert [r.combination for r in top] == [
            ("SwitchFileSystemsAPI",),
            ("IncompatibleAPIs",),
            ("IncompatibleDatatypes",),
        ]
        assert top[0].score == pytest.approx(0.95, abs=1e-12)
        assert top[0].per_goal_sv["Portability"] == pytest.approx(0.95, abs=1e-12)
        assert top[1].score == pytest.approx(0.6628, abs=1e-12)
        assert top[2].score == pytest.approx(0.44005, abs=1e-12)

    def test_scores_recompute_from_restricted_propagation(self, ddp_model):
        for record in rank_critical(ddp_model, max_combo_size=1, top=5):
            assert record.score == pytest.approx(
                weighted_score(ddp_model, record.combination), abs=1e-15
            )

    def test_per_goal_severity_is_clamped(self, ddp_model):
        for record in rank_critical(ddp_model, max_combo_size=2, top=20):
            assert all(sv >= 0.0 for sv in record.per_goal_sv.values())
            assert record.combination == tuple(sorted(record.combination))

    def test_ordering_is_total_and_deterministic(self, ddp_model):
        records = rank_critical(ddp_model, max_combo_size=2, top=50)
        keys = [(-r.score, len(r.combination), r.combination) for r in records]
        assert keys == sorted(keys)
        again = rank_critical(ddp_model, max_combo_size=2, top=50)
        assert records == again

    def test_top_trims_the_ranking(self, ddp_model):
        assert len(rank_critical(ddp_model, top=4)) == 4
        n_leaves = len(leaf_obstacles(ddp_model))
        assert len(rank_critical(ddp_model, top=500)) == n_leaves

    def test_goal_weights_scale_scores(self):
        def build(weight: float) -> GoalModel:
            return GoalModel(
                name="w",
                goals=(GoalNode("G", rds=1.0, weight=weight),),
                obstacles=(ObstacleNode("O", probability=0.5),),
                obstructions=(Obstruction("O", "G"),),
            )

        single = rank_critical(build(1.0))[0].score
        doubled = rank_critical(build(2.0))[0].score
        assert doubled == pytest.approx(2 * single, abs=1e-15)

    def test_argument_validation(self, ddp_model):
        with pytest.raises(ValueError):
            rank_critical(ddp_model, max_combo_size=0)
        with pytest.raises(ValueError):
            rank_critical(ddp_model, max_combo_size=17)  # only 16 leaves
        with pytest.raises(ValueError):
            rank_critical(ddp_model, top=0)
        with pytest.raises(ValueError):
            rank_critical(ddp_model, max_combo_size=2, budget=10)

    def test_model_without_leaves_ranks_nothing(self):
        assert rank_critical(GoalModel(name="bare", goals=(GoalNode("G"),))) == []

    @pytest.mark.parametrize("seed", range(6))
    def test_growing_a_combination_never_lowers_its_score(self, seed):
        model = random_model(seed)
        leaves = leaf_obstacles(model)
        if len(leaves) < 2:
            pytest.skip("model too small for pairs")
        records = rank_critical(
            model, max_combo_size=2, top=10_000, budget=10_000_000
        )
        by_combo = {r.combination: r.score for r in records}
        for combo, score in by_combo.items():
            if len(combo) != 2:
                continue
            for member in combo:
                assert score >= by_combo[(member,)] - 1e-12
