"""Pytest configuration and fixtures."""

import json
import random
from collections.abc import Callable
from pathlib import Path
from typing import Any

import pytest

from mukai_fixed.group_action import GroupAction, Isometry, generate_group
from mukai_fixed.lattice import Lattice, diagonal, identity_matrix, mukai_lattice
from mukai_fixed.problem import ProblemFile, load_fixture

FIXTURE_DIR = Path(__file__).resolve().parents[1] / "src" / "mukai_fixed" / "fixtures"


@pytest.fixture(scope="session")
def genus2() -> ProblemFile:
    """The genus-2 fixture."""
    return load_fixture("genus2")


@pytest.fixture(scope="session")
def nikulin() -> ProblemFile:
    """The Nikulin involution fixture."""
    return load_fixture("nikulin")


@pytest.fixture
def genus2_raw() -> dict[str, Any]:
    """Decoded genus-2 fixture, safe to modify."""
    return json.loads((FIXTURE_DIR / "genus2.json").read_text(encoding="utf-8"))


@pytest.fixture
def nikulin_raw() -> dict[str, Any]:
    """Decoded Nikulin fixture, safe to modify."""
    return json.loads((FIXTURE_DIR / "nikulin.json").read_text(encoding="utf-8"))


@pytest.fixture
def write_problem(tmp_path: Path) -> Callable[[dict[str, Any]], Path]:
    """Write a problem dictionary to a temporary file and return its path."""

    def _write(raw: dict[str, Any]) -> Path:
        path = tmp_path / f"{raw.get('name', 'problem')}.json"
        path.write_text(json.dumps(raw), encoding="utf-8")
        return path

    return _write


@pytest.fixture
def mukai_two() -> Lattice:
    """Mukai lattice of a K3 surface of Picard rank one and degree 2."""
    return mukai_lattice(diagonal(2, label="<2>"))


@pytest.fixture
def trivial_group() -> Callable[[Lattice], GroupAction]:
    """Factory for the trivial group acting on a lattice."""

    def _trivial(lattice: Lattice) -> GroupAction:
        return generate_group([Isometry(lattice, identity_matrix(lattice.rank))], label="1")

    return _trivial


@pytest.fixture
def rng() -> random.Random:
    """Seeded random generator for property tests."""
    return random.Random(1729)
