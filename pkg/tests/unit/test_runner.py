"""Unit tests for runner and report modules."""

import json

import pytest
from rich.console import Console

from mukai_fixed.exceptions import ProblemFileError, ValidationError
from mukai_fixed.lattice import diagonal
from mukai_fixed.problem import ProblemFile, TaskSpec
from mukai_fixed.report import print_report, report_to_json
from mukai_fixed.runner import RunReport, TaskResult, execute_task, run_problem


def _euler_task(expect: dict | None = None) -> TaskSpec:
    return TaskSpec("euler", "euler", {"frameshape": "1^24", "terms": 4}, expect)


class TestExecuteTask:
    """Tests for running single tasks."""

    def test_standalone_task(self) -> None:
        """Test a task that needs no problem file."""
        result = execute_task(None, _euler_task())

        assert result.passed
        assert result.data["coefficients"] == [1, 24, 324, 3200]
        assert result.data["offset"] == [-1, 1]

    def test_expectation_is_a_subset(self) -> None:
        """Test that only the expected fields are compared."""
        result = execute_task(None, _euler_task({"frameshape": "1^24"}))

        assert result.passed
        assert result.messages == []

    def test_expectation_mismatch(self) -> None:
        """Test that a wrong value fails the task and is described."""
        result = execute_task(None, _euler_task({"coefficients": [1, 24, 324, 3201]}))

        assert not result.passed
        assert "expected coefficients" in result.messages[0]

    def test_unknown_kind(self) -> None:
        """Test that unknown kinds are refused."""
        with pytest.raises(ValidationError):
            execute_task(None, TaskSpec("download", "x", {}))

    def test_problem_required(self) -> None:
        """Test that verification needs a problem file."""
        with pytest.raises(ValidationError, match="problem file"):
            execute_task(None, TaskSpec("verify", "v", {}))

    def test_missing_equivalence(self) -> None:
        """Test a fixed-locus task on a problem without equivalence data."""
        problem = ProblemFile("1", "empty", {}, {}, None, [])
        with pytest.raises(ProblemFileError):
            execute_task(problem, TaskSpec("fixed-locus", "f", {"vector": "(0,0,1)"}))

    def test_unrestricted_genericity(self, genus2: ProblemFile) -> None:
        """Test that min_square None is passed through."""
        task = TaskSpec(
            "genericity",
            "g",
            {"omega": "2H", "vector": "(0,H,0)", "min_square": None},
        )
        result = execute_task(genus2, task)

        assert result.data["generic"] is True
        assert result.data["in_domain"] is True

    def test_charge_outside_domain(self, genus2: ProblemFile) -> None:
        """Test that exp(i H) is reported outside the domain."""
        task = TaskSpec("charge", "c", {"omega": "H", "vectors": ["(1,0,0)"]})
        result = execute_task(genus2, task)

        assert result.data["positive_plane"] is True
        assert result.data["in_domain"] is False
        assert result.data["values"]["(1,0,0)"] == [[1, 1], [0, 1]]

    def test_fiber_oracle_with_repeated_conditions(self) -> None:
        """Test that repeated condition rows do not shrink the scanned kernel rank."""
        lattice = diagonal(*([-2] * 10))
        problem = ProblemFile("1", "diag", {"D": lattice}, {}, None, [])
        row = (1,) + (0,) * 9
        params = {"lattice": "D", "map": [row] * 10, "target": [0] * 10, "min_square": -8}
        result = execute_task(problem, TaskSpec("fiber", "f", params), oracle=True)

        assert result.data["count"] == 2869
        assert result.data["kernel_rank"] == 9
        assert "in rank 9 is too large" in result.messages[0]

    def test_fiber_oracle_agrees(self) -> None:
        """Test a scanned fiber with a repeated condition row."""
        problem = ProblemFile("1", "diag", {"D": diagonal(-2, -2, -2)}, {}, None, [])
        params = {"lattice": "D", "map": [[1, 0, 0], [1, 0, 0]], "target": [1, 1], "min_square": -4}
        result = execute_task(problem, TaskSpec("fiber", "f", params), oracle=True)

        assert result.data["count"] == 5
        assert result.data["oracle_agrees"] is True
        assert "agrees" in result.messages[0]


class TestRunProblem:
    """Tests for running whole problems."""

    def test_only_selects_tasks(self, nikulin: ProblemFile) -> None:
        """Test the task filter."""
        report = run_problem(nikulin, only=["involution-frameshape"])

        assert [r.name for r in report.results] == ["involution-frameshape"]
        assert report.passed
        assert report.exit_status == 0

    def test_exit_status_on_failure(self) -> None:
        """Test that one failed task makes the run fail."""
        report = RunReport("p", [TaskResult("euler", "a", {}), TaskResult("euler", "b", {}, False)])

        assert not report.passed
        assert report.exit_status == 1

    def test_json_leaves_out_timings(self) -> None:
        """Test that the JSON form is independent of elapsed time."""
        fast = RunReport("p", [TaskResult("euler", "a", {"x": 1}, elapsed=0.1)])
        slow = RunReport("p", [TaskResult("euler", "a", {"x": 1}, elapsed=9.0)])

        assert report_to_json(fast) == report_to_json(slow)
        assert json.loads(report_to_json(fast))["tasks"][0]["data"] == {"x": 1}


class TestPrintReport:
    """Tests for the console output."""

    def test_tables_for_every_kind(self, nikulin: ProblemFile) -> None:
        """Test that a full run renders and ends with the summary line."""
        console = Console(record=True, width=120)
        print_report(console, run_problem(nikulin))
        text = console.export_text()

        assert "Fixed locus over" in text
        assert "All 5 tasks passed" in text

    def test_failed_summary(self) -> None:
        """Test the failure line and escaped messages."""
        console = Console(record=True, width=120)
        result = TaskResult("euler", "bad", {}, passed=False, messages=["[1, 2] differs"])
        print_report(console, RunReport("p", [result]))
        text = console.export_text()

        assert "[1, 2] differs" in text
        assert "Failed" in text
