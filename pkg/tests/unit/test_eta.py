"""Unit tests for eta module."""

import random
from fractions import Fraction

import pytest

from mukai_fixed.eta import (
    QSeries,
    eigenvalue_product_series,
    eta_series,
    euler_char_fixed,
    frameshape_eta_product,
    hilbert_euler_characteristics,
    render_series,
    series_invert,
)
from mukai_fixed.exceptions import SeriesError, ValidationError
from mukai_fixed.group_action import parse_frameshape


def _inverse(symbol: str, terms: int) -> QSeries:
    return series_invert(frameshape_eta_product(parse_frameshape(symbol), terms))


def _random_series(rng: random.Random, n: int) -> QSeries:
    coeffs = [1] + [rng.randint(-4, 4) for _ in range(n)]
    return QSeries(Fraction(rng.randint(-2, 2)), tuple(coeffs))


class TestQSeries:
    """Tests for truncated q-series arithmetic."""

    def test_leading_zeros_move_into_offset(self) -> None:
        """Test normalisation of leading zeros."""
        s = QSeries(Fraction(0), (0, 0, 3, 1))
        assert s.offset == 2
        assert s.coeffs == (3, 1)

    def test_offset_denominator(self) -> None:
        """Test that offsets must lie in (1/24)Z."""
        with pytest.raises(SeriesError):
            QSeries(Fraction(1, 5), (1,))

    def test_coefficient_lookup(self) -> None:
        """Test coefficients inside, below and beyond the known range."""
        s = QSeries(Fraction(-1), (1, 2, 5))
        assert s.coefficient(-1) == 1
        assert s.coefficient(1) == 5
        assert s.coefficient(-3) == 0
        assert s.coefficient(Fraction(1, 2)) == 0
        with pytest.raises(SeriesError):
            s.coefficient(2)

    def test_addition_and_truncation(self) -> None:
        """Test that a sum is known only as far as both summands."""
        a = QSeries(Fraction(0), (1, 1, 1, 1))
        b = QSeries(Fraction(1), (2, 2))
        total = a + b
        assert total.offset == 0
        assert total.coeffs == (1, 3, 3)
        assert (a - a).is_zero()

    def test_incompatible_offsets(self) -> None:
        """Test that offsets differing by a fraction cannot be added."""
        with pytest.raises(SeriesError):
            QSeries(Fraction(0), (1,)) + QSeries(Fraction(1, 2), (1,))

    def test_multiplication_is_associative(self, rng: random.Random) -> None:
        """Test associativity and commutativity on random series."""
        for _ in range(10):
            a, b, c = (_random_series(rng, 8) for _ in range(3))
            assert (a * b) * c == a * (b * c)
            assert a * b == b * a

    def test_inverse_times_series(self, rng: random.Random) -> None:
        """Test that s * (1/s) = 1 to the known precision."""
        for _ in range(5):
            s = _random_series(rng, 10)
            product = s * series_invert(s)
            assert product.offset == 0
            assert product.coeffs == (1,) + (0,) * 10

    def test_non_unit_inverse(self) -> None:
        """Test that a leading coefficient of 2 cannot be inverted."""
        with pytest.raises(SeriesError):
            series_invert(QSeries(Fraction(0), (2, 1)))

    def test_power(self) -> None:
        """Test positive and negative powers."""
        s = QSeries(Fraction(0), (1, 1, 0, 0))
        assert (s**2).coeffs == (1, 2, 1, 0)
        assert (s**-1).coeffs == (1, -1, 1, -1)

    def test_render(self) -> None:
        """Test the display form."""
        assert QSeries(Fraction(-1), (1, 2, 5)).render() == "1/q + 2 + 5q + O(q^2)"
        assert QSeries(Fraction(0), (1, -8, 0, 3)).render() == "1 - 8q + 3q^3 + O(q^4)"
        assert render_series(QSeries(Fraction(-1), (1, 2, 5)), terms=1) == "1/q + O(1)"


class TestEtaProducts:
    """Tests for eta products and their inverses."""

    def test_eta_series(self) -> None:
        """Test the first coefficients of eta(q) and eta(q^2)."""
        eta = eta_series(8)
        assert eta.offset == Fraction(1, 24)
        assert eta.coeffs == (1, -1, -1, 0, 0, 1, 0, 1)
        eta2 = eta_series(8, 2)
        assert eta2.offset == Fraction(1, 12)
        assert eta2.coeffs == (1, 0, -1, 0, -1, 0, 0, 0)

    def test_order_eleven(self) -> None:
        """Test the expansion of 1/(eta(q)^2 eta(q^11)^2)."""
        inverse = _inverse("1^2 11^2", 8)
        assert inverse.offset == -1
        assert inverse.coeffs == (1, 2, 5, 10, 20, 36, 65, 110)
        assert inverse.render() == (
            "1/q + 2 + 5q + 10q^2 + 20q^3 + 36q^4 + 65q^5 + 110q^6 + O(q^7)"
        )

    def test_nikulin_type(self) -> None:
        """Test the expansion of 1/(eta(q)^8 eta(q^2)^8)."""
        expected = (1, 8, 52, 256, 1122, 4352, 15640, 52224, 165087, 495872)
        assert _inverse("1^8 2^8", 10).coeffs == expected

    def test_negative_type(self) -> None:
        """Test the expansion of eta(q)^8 / eta(q^2)^16."""
        expected = (1, -8, 36, -128, 402, -1152, 3064, -7680, 18351, -42112)
        assert _inverse("1^-8 2^16", 10).coeffs == expected

    def test_free_type(self) -> None:
        """Test the expansion of 1/eta(q^2)^12."""
        assert _inverse("2^12", 7).coeffs == (1, 0, 12, 0, 90, 0, 520)

    @pytest.mark.parametrize("symbol", ["1^24", "1^8 2^8", "1^-8 2^16", "2^12", "1^2 11^2"])
    def test_eigenvalue_products(self, symbol: str) -> None:
        """Test that q / eta_g(q) equals the eigenvalue product series to 20 terms."""
        fs = parse_frameshape(symbol)
        lhs = series_invert(frameshape_eta_product(fs, 20)).shift(1)
        rhs = eigenvalue_product_series(fs, 20)
        assert lhs.offset == rhs.offset == 0
        assert lhs.coeffs[:20] == rhs.coeffs[:20]


class TestEulerCharacteristics:
    """Tests for Euler characteristics of fixed loci."""

    def test_nikulin_fixed_points(self) -> None:
        """Test that a Nikulin involution on a K3 has 8 fixed points."""
        assert euler_char_fixed(parse_frameshape("1^8 2^8"), 0) == 8

    def test_order_two_frameshapes(self) -> None:
        """Test v^2 = 0 for every order-two frameshape."""
        values = [euler_char_fixed(parse_frameshape(s), 0) for s in ("1^-8 2^16", "2^12")]
        assert values == [-8, 0]

    def test_hilbert_schemes(self) -> None:
        """Test the Euler characteristics of Hilbert schemes of points on a K3."""
        assert hilbert_euler_characteristics(3) == [1, 24, 324, 3200]
        trivial = parse_frameshape("1^24")
        assert [euler_char_fixed(trivial, 2 * n - 2) for n in range(4)] == [1, 24, 324, 3200]

    def test_below_the_support(self) -> None:
        """Test that squares below -2 give 0."""
        assert euler_char_fixed(parse_frameshape("1^24"), -4) == 0

    def test_odd_square(self) -> None:
        """Test that an odd square is refused."""
        with pytest.raises(ValidationError):
            euler_char_fixed(parse_frameshape("1^24"), 3)

    def test_exponent_off_the_lattice(self) -> None:
        """Test a frameshape whose inverse never reaches q^0."""
        with pytest.raises(SeriesError):
            euler_char_fixed(parse_frameshape("1^3"), 0)

    def test_truncation_grows(self) -> None:
        """Test that a large square extends the truncation automatically."""
        fs = parse_frameshape("1^8 2^8")
        assert euler_char_fixed(fs, 80, truncation=4) == euler_char_fixed(fs, 80, truncation=64)
