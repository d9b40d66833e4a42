"""Shared fixtures: parsed bundled models and repo paths."""

from __future__ import annotations

import pathlib

import pytest

from goalrisk import GoalModel, parse

REPO_ROOT = pathlib.Path(__file__).resolve().parent.parent
FIXTURE_DIR = REPO_ROOT / "fixtures"


def fixture_path(name: str) -> pathlib.Path:
    return FIXTURE_DIR / name


def load_model(name: str) -> GoalModel:
    result = parse(fixture_path(name).read_text(encoding="utf-8"))
    assert isinstance(result, GoalModel), result
    return result


@pytest.fixture(scope="session")
def s3_model() -> GoalModel:
    return load_model("s3.gm")


@pytest.fixture(scope="session")
def ddp_model() -> GoalModel:
    return load_model("ddp.gm")
