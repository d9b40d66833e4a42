"""Bundled example models: structure and frozen engine values.

The numbers here pin the engine's own arithmetic (tolerance 1e-12) so a
regression in any formula or in the fixture files is caught immediately.
Coarser comparisons against the externally quoted figures live in the
acceptance tests; the quoted-versus-engine discrepancies are tabulated in
fixtures/README.md.
"""

from __future__ import annotations

import pytest

from goalrisk import Severity, propagate, validate
from conftest import FIXTURE_DIR

S3_OBSTACLES = {
    "PerfVariabilityS3": 0.019,
    "ExtraMgmtEffort": 0.79497,
    "S3DataCentreOutage": 0.010870298,
    "S3Outage": 0.0314052201348225,
}

S3_EPS = {
    "S3Adoption": 0.0,
    "ReducedITCost": 0.0,
    "ImprovedResponseTime": 0.94176,
    "ReducedDataUploadTime": 0.94176,
    "ReducedQueryProcessingTime": 1.0,
    "ImprovedConsistency": 0.4,
    "ImprovedAvailability": 0.9589088320665258,
}

DDP_OBSTACLES = {
    "DataStorageIncompatibility": 0.64347,
    "DdpCloudIncompatibility": 0.89575653816,
    "AzureMiddlewareLatency": 0.238148,
    "NetworkLatency": 0.178725,
    "CodeDisruption": 0.02950398,
    "DataDisclosure": 0.058041434676060044,
}

DDP_EPS = {
    "Integrity": 0.10424346184,
    "Performance": 0.5760727841969101,
    "Testability": 0.821275,
    "Portability": 0.0,
    "DataConfidentiality": 0.94195856532394,
    "DataLocationSecurity": 0.999,
    "Security": 0.941016606758616,
}


class TestStructure:
    def test_s3_shape(self, s3_model):
        assert len(s3_model.goals) == 7
        assert len(s3_model.obstacles) == 16
        assert len(s3_model.refinements) == 6
        assert len(s3_model.obstructions) == 7

    def test_ddp_shape(self, ddp_model):
        assert len(ddp_model.goals) == 7
        assert len(ddp_model.obstacles) == 22
        assert len(ddp_model.refinements) == 7
        assert len(ddp_model.obstructions) == 9

    def test_s3_validates_with_only_advisories(self, s3_model):
        diags = validate(s3_model)
        assert all(d.severity is Severity.INFO for d in diags)
        assert sorted(d.code for d in diags) == ["default-rds", "unobstructed-goal"]

    def test_ddp_validates_silently(self, ddp_model):
        assert validate(ddp_model) == []

    def test_network_latency_fans_out_to_two_goals(self, ddp_model):
        targets = sorted(
            l.goal for l in ddp_model.obstructions if l.obstacle == "NetworkLatency"
        )
        assert targets == ["Performance", "Testability"]


class TestFrozenValues:
    def test_s3_numbers(self, s3_model):
        report = propagate(s3_model)
        for node, expected in S3_OBSTACLES.items():
            assert report.obstacle_probabilities[node] == pytest.approx(
                expected, abs=1e-12
            ), node
        for node, expected in S3_EPS.items():
            assert report.goal_eps[node] == pytest.approx(expected, abs=1e-12), node
        assert report.violated["ImprovedResponseTime"] is True
        assert report.violated["ReducedDataUploadTime"] is False
        assert report.goal_sv["ImprovedResponseTime"] == pytest.approx(
            0.00824, abs=1e-12
        )

    def test_ddp_numbers(self, ddp_model):
        report = propagate(ddp_model)
        for node, expected in DDP_OBSTACLES.items():
            assert report.obstacle_probabilities[node] == pytest.approx(
                expected, abs=1e-12
            ), node
        for node, expected in DDP_EPS.items():
            assert report.goal_eps[node] == pytest.approx(expected, abs=1e-12), node
        assert all(report.violated[g.id] for g in ddp_model.goals)


class TestDocumentation:
    def test_discrepancy_tables_exist(self):
        readme = (FIXTURE_DIR / "README.md").read_text(encoding="utf-8")
        assert "s3.gm" in readme
        assert "ddp.gm" in readme
        # the two rows the quoted reference figures cannot reproduce
        assert "IncompatibleAPIs" in readme
        assert "InsecureDataLocation" in readme
