"""Unit tests for problem module."""

import json
from collections.abc import Callable
from pathlib import Path
from typing import Any

import pytest

from mukai_fixed.config import SHIPPED_FIXTURES
from mukai_fixed.exceptions import ProblemFileError
from mukai_fixed.problem import (
    ProblemFile,
    dump_problem,
    load_fixture,
    load_problem,
    parse_problem,
    resolve_problem,
)


class TestFixtures:
    """Tests for the shipped fixtures."""

    @pytest.mark.parametrize("name", SHIPPED_FIXTURES)
    def test_every_fixture_loads(self, name: str) -> None:
        """Test that each shipped fixture parses and has tasks."""
        problem = load_fixture(name)
        assert problem.name == name
        assert problem.tasks

    def test_suffix_is_optional(self) -> None:
        """Test that 'genus2.json' names the same fixture."""
        assert load_fixture("genus2.json").name == "genus2"

    def test_unknown_fixture(self) -> None:
        """Test that an unknown name lists the shipped ones."""
        with pytest.raises(ProblemFileError, match="nikulin"):
            load_fixture("enriques")

    def test_equivalence_sections(self, genus2: ProblemFile, nikulin: ProblemFile) -> None:
        """Test ranks of the lattices in the equivalence data."""
        assert genus2.require_equivalence().lattice.rank == 11
        assert nikulin.require_equivalence().lattice.rank == 10
        assert nikulin.require_equivalence().group_order == 2

    def test_missing_equivalence(self) -> None:
        """Test that a frameshape-only problem has no equivalence data."""
        problem = load_fixture("order2-frameshapes")
        assert problem.equivalence is None
        with pytest.raises(ProblemFileError):
            problem.require_equivalence()

    def test_dump_round_trip(self, genus2: ProblemFile) -> None:
        """Test that the canonical dump parses back to the same problem."""
        text = dump_problem(genus2)
        again = parse_problem(json.loads(text))
        assert dump_problem(again) == text
        assert [t.name for t in again.tasks] == [t.name for t in genus2.tasks]


class TestValidation:
    """Tests for malformed problem files."""

    def test_not_an_object(self) -> None:
        """Test that a list is refused."""
        with pytest.raises(ProblemFileError):
            parse_problem([])  # type: ignore[arg-type]

    def test_bad_version(self, genus2_raw: dict[str, Any]) -> None:
        """Test that an unknown format version is refused."""
        genus2_raw["version"] = "2"
        with pytest.raises(ProblemFileError, match="version"):
            parse_problem(genus2_raw)

    def test_unknown_group(self, genus2_raw: dict[str, Any]) -> None:
        """Test a dangling group reference."""
        genus2_raw["equivalence"]["group"] = "missing"
        with pytest.raises(ProblemFileError, match="missing"):
            parse_problem(genus2_raw)

    def test_undefined_lattice(self) -> None:
        """Test a dangling lattice reference."""
        raw = {"version": "1", "lattices": {"L": {"mukai": "NS"}}}
        with pytest.raises(ProblemFileError, match="undefined"):
            parse_problem(raw)

    def test_cyclic_lattices(self) -> None:
        """Test that self-referencing lattice definitions are refused."""
        raw = {
            "version": "1",
            "lattices": {"A": {"direct_sum": ["B"]}, "B": {"direct_sum": ["A"]}},
        }
        with pytest.raises(ProblemFileError, match="cyclic"):
            parse_problem(raw)

    def test_two_forms(self) -> None:
        """Test that a lattice must use exactly one form."""
        raw = {"version": "1", "lattices": {"L": {"gram": [[2]], "diagonal": [2]}}}
        with pytest.raises(ProblemFileError, match="exactly one"):
            parse_problem(raw)

    def test_non_integer_matrix(self) -> None:
        """Test that matrix entries must be integers."""
        raw = {"version": "1", "lattices": {"L": {"gram": [["a"]]}}}
        with pytest.raises(ProblemFileError):
            parse_problem(raw)

    def test_unknown_task_kind(self, genus2_raw: dict[str, Any]) -> None:
        """Test that task kinds are checked."""
        genus2_raw["tasks"] = [{"kind": "download"}]
        with pytest.raises(ProblemFileError, match="unknown kind"):
            parse_problem(genus2_raw)

    def test_bad_p_shape(self, nikulin_raw: dict[str, Any]) -> None:
        """Test that a p matrix of the wrong shape is reported as a file error."""
        nikulin_raw["equivalence"]["p_map"] = nikulin_raw["equivalence"]["p_map"][:-1]
        with pytest.raises(ProblemFileError, match="matrix"):
            parse_problem(nikulin_raw)

    def test_fixed_point_metadata(self, nikulin_raw: dict[str, Any]) -> None:
        """Test that the documented fixed-point count is checked against the dual generator."""
        nikulin_raw["equivalence"]["metadata"]["fixed_points"] = 4
        with pytest.raises(ProblemFileError, match="point-class"):
            parse_problem(nikulin_raw)

    def test_default_task_names(self) -> None:
        """Test that unnamed tasks are numbered."""
        raw = {"version": "1", "tasks": [{"kind": "euler", "frameshape": "1^24"}]}
        problem = parse_problem(raw)
        assert problem.tasks[0].name == "euler-0"
        assert problem.tasks[0].params == {"frameshape": "1^24"}


class TestLoading:
    """Tests for reading problems from disk."""

    def test_load_and_resolve_path(
        self, genus2_raw: dict[str, Any], write_problem: Callable[[dict[str, Any]], Path]
    ) -> None:
        """Test that a path is preferred over a fixture name."""
        genus2_raw["name"] = "copy"
        path = write_problem(genus2_raw)
        assert load_problem(path).name == "copy"
        assert resolve_problem(str(path)).source == path

    def test_resolve_falls_back_to_fixture(self) -> None:
        """Test that a bare name resolves to a shipped fixture."""
        assert resolve_problem("nikulin").name == "nikulin"

    def test_invalid_json(self, tmp_path: Path) -> None:
        """Test that unreadable JSON is reported."""
        path = tmp_path / "broken.json"
        path.write_text("{", encoding="utf-8")
        with pytest.raises(ProblemFileError, match="not valid JSON"):
            load_problem(path)

    def test_missing_file(self, tmp_path: Path) -> None:
        """Test that a missing path is reported."""
        with pytest.raises(ProblemFileError, match="Cannot read"):
            load_problem(tmp_path / "absent.json")
