"""Unit tests for utils module."""

from fractions import Fraction

import pytest

from mukai_fixed.exceptions import ValidationError
from mukai_fixed.lattice import Lattice
from mukai_fixed.problem import ProblemFile
from mukai_fixed.utils import (
    canonical_json,
    format_elapsed,
    format_signature,
    format_vector,
    parse_combination,
    parse_rational,
    parse_vector,
    to_jsonable,
)


class TestParseRational:
    """Tests for parse_rational function."""

    def test_accepted_forms(self) -> None:
        """Test integers, fraction strings and pairs."""
        assert parse_rational(3) == 3
        assert parse_rational(" -1/2 ") == Fraction(-1, 2)
        assert parse_rational([3, 4]) == Fraction(3, 4)
        assert parse_rational(Fraction(5, 7)) == Fraction(5, 7)

    @pytest.mark.parametrize("value", [True, "x", [1, 0], 0.5, None])
    def test_rejected_values(self, value: object) -> None:
        """Test that non-rationals are refused."""
        with pytest.raises(ValidationError):
            parse_rational(value)


class TestParseCombination:
    """Tests for parse_combination function."""

    def test_named_sum(self, genus2: ProblemFile) -> None:
        """Test a signed sum with a rational coefficient."""
        ns = genus2.lattice("NS")
        combo = parse_combination("1/2*H - a1", ns)
        assert combo == (Fraction(1, 2), Fraction(-1)) + (Fraction(0),) * 7

    def test_zero_and_coordinates(self, genus2: ProblemFile) -> None:
        """Test the zero vector and bracketed coordinates."""
        ns = genus2.lattice("NS")
        assert parse_combination("0", ns) == (0,) * 9
        assert parse_combination("[1, 0, 0, 0, 0, 0, 0, 0, 2]", ns)[-1] == 2

    def test_unknown_name(self, genus2: ProblemFile) -> None:
        """Test that unknown classes are reported with the known ones."""
        with pytest.raises(ValidationError, match="Unknown class"):
            parse_combination("2K", genus2.lattice("NS"))

    def test_constant_term(self, genus2: ProblemFile) -> None:
        """Test that a bare nonzero number is refused."""
        with pytest.raises(ValidationError):
            parse_combination("2+H", genus2.lattice("NS"))


class TestParseVector:
    """Tests for parse_vector function."""

    def test_mukai_form_with_extra_class(self, genus2: ProblemFile) -> None:
        """Test (r, D, s) where D uses a declared extra class."""
        v = parse_vector("(0,C1'+E1,-1)", genus2.lattice("LambdaP"))
        assert v == (0, 1, 2) + (-1,) * 7 + (-1,)

    def test_raw_coordinates(self, mukai_two: Lattice) -> None:
        """Test lists and bracketed text."""
        assert parse_vector([1, 2, 1], mukai_two) == (1, 2, 1)
        assert parse_vector("[1, 2, 1]", mukai_two) == (1, 2, 1)
        with pytest.raises(ValidationError):
            parse_vector([1, 2], mukai_two)

    def test_non_integral(self, genus2: ProblemFile) -> None:
        """Test that fractional vectors are refused."""
        with pytest.raises(ValidationError, match="integral"):
            parse_vector("(0,1/2*H,0)", genus2.lattice("Lambda"))

    def test_mukai_form_needs_mukai_lattice(self, genus2: ProblemFile) -> None:
        """Test that (r, D, s) is refused on a plain lattice."""
        with pytest.raises(ValidationError):
            parse_vector("(0,H,0)", genus2.lattice("NS"))

    def test_wrong_number_of_parts(self, mukai_two: Lattice) -> None:
        """Test that (r, D, s) needs exactly three parts."""
        with pytest.raises(ValidationError):
            parse_vector("(0,H)", mukai_two)


class TestFormatting:
    """Tests for display and serialization helpers."""

    def test_format_vector(self, mukai_two: Lattice) -> None:
        """Test Mukai and plain display forms."""
        assert format_vector((1, 2, 3), mukai_two) == "(1, [2], 3)"
        assert format_vector((1, 2, 3)) == "[1 2 3]"
        assert format_signature((-2, -2)) == "(-2,-2)"

    def test_to_jsonable(self) -> None:
        """Test rationals, big integers and containers."""
        assert to_jsonable(Fraction(3, 4)) == [3, 4]
        assert to_jsonable(2**53) == "9007199254740992"
        assert to_jsonable({1: (Fraction(1), None)}) == {"1": [[1, 1], None]}
        with pytest.raises(ValidationError):
            to_jsonable(object())

    def test_canonical_json_is_stable(self) -> None:
        """Test that key order does not change the output."""
        a = canonical_json({"b": 1, "a": Fraction(1, 2)})
        b = canonical_json({"a": Fraction(1, 2), "b": 1})
        assert a == b
        assert a == '{\n  "a": [\n    1,\n    2\n  ],\n  "b": 1\n}\n'

    def test_format_elapsed(self) -> None:
        """Test short and long durations."""
        assert format_elapsed(0.42) == "0.42s"
        assert format_elapsed(65) == "1:05"
