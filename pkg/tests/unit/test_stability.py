"""Unit tests for stability module."""

from collections.abc import Callable
from fractions import Fraction

import pytest

from mukai_fixed.exceptions import StabilityError
from mukai_fixed.group_action import GroupAction
from mukai_fixed.lattice import Lattice
from mukai_fixed.problem import ProblemFile
from mukai_fixed.stability import (
    CentralCharge,
    GeometricCharge,
    brute_force_splittings,
    charge_from_omega_beta,
    evaluate,
    find_splittings,
    in_distinguished_domain,
    is_G_fixed,
    is_G_sigma_generic,
    kernel_of_charge,
    same_ray,
    scale_charge,
    spans_positive_plane,
)


def _charge(mukai_two: Lattice, omega: int, beta: Fraction = Fraction(0)) -> CentralCharge:
    assert mukai_two.ns is not None
    return charge_from_omega_beta(GeometricCharge(mukai_two.ns, (omega,), (beta,)))


class TestCharges:
    """Tests for building and evaluating charges."""

    def test_split_of_exponential(self, mukai_two: Lattice) -> None:
        """Test re and im of exp(i H) on the degree-2 Mukai lattice."""
        z = _charge(mukai_two, 1)
        assert z.re == (1, 0, -1)
        assert z.im == (0, 1, 0)
        assert evaluate(z, (1, 2, 1)) == (0, 4)
        assert evaluate(z, (1, 0, 0)) == (1, 0)

    def test_b_field(self, mukai_two: Lattice) -> None:
        """Test -s + r/2 (w^2 - b^2) + l.b + i (l.w - r w.b) with b = H/2."""
        z = _charge(mukai_two, 1, Fraction(1, 2))
        assert evaluate(z, (1, 0, 0)) == (Fraction(3, 4), -1)
        assert evaluate(z, (0, 1, 0)) == (1, 2)

    def test_omega_must_be_positive(self, mukai_two: Lattice) -> None:
        """Test that a zero omega is refused."""
        assert mukai_two.ns is not None
        with pytest.raises(StabilityError):
            GeometricCharge(mukai_two.ns, (0,), (0,))

    def test_same_ray(self) -> None:
        """Test exact phase comparison."""
        assert same_ray((Fraction(1), Fraction(0)), (Fraction(2), Fraction(0)))
        assert same_ray((Fraction(1), Fraction(1)), (Fraction(3), Fraction(3)))
        assert not same_ray((Fraction(1), Fraction(0)), (Fraction(-1), Fraction(0)))
        assert not same_ray((Fraction(1), Fraction(0)), (Fraction(0), Fraction(1)))
        with pytest.raises(StabilityError):
            same_ray((Fraction(0), Fraction(0)), (Fraction(1), Fraction(0)))

    def test_scale_by_i(self, mukai_two: Lattice) -> None:
        """Test that i Z rotates every value by a quarter turn."""
        z = _charge(mukai_two, 1)
        rotated = scale_charge(z, 0, 1)
        re, im = evaluate(z, (1, 2, 0))
        assert evaluate(rotated, (1, 2, 0)) == (-im, re)
        with pytest.raises(StabilityError):
            scale_charge(z, 0, 0)

    def test_kernel_of_charge(self, mukai_two: Lattice) -> None:
        """Test the kernel of exp(i H)."""
        kernel = kernel_of_charge(_charge(mukai_two, 1))
        assert kernel.rank == 1
        assert kernel.contains((1, 0, 1))


class TestDistinguishedDomain:
    """Tests for the (-2)-class test."""

    def test_positive_plane(self, mukai_two: Lattice) -> None:
        """Test that exp(i H) spans a positive plane and re = im does not."""
        z = _charge(mukai_two, 1)
        assert spans_positive_plane(z)
        degenerate = CentralCharge(mukai_two, z.re, z.re)
        assert not spans_positive_plane(degenerate)
        with pytest.raises(StabilityError):
            in_distinguished_domain(degenerate)

    def test_outside_for_small_omega(self, mukai_two: Lattice) -> None:
        """Test that (1, 0, 1) is a (-2)-class orthogonal to exp(i H)."""
        check = in_distinguished_domain(_charge(mukai_two, 1))
        assert not check.inside
        assert check.witness in ((1, 0, 1), (-1, 0, -1))

    def test_inside_for_large_omega(self, mukai_two: Lattice) -> None:
        """Test that exp(2 i H) is in the domain."""
        check = in_distinguished_domain(_charge(mukai_two, 2))
        assert check.inside
        assert check.witness is None


class TestGenericity:
    """Tests for splittings and genericity."""

    def test_generic_vector(
        self, mukai_two: Lattice, trivial_group: Callable[[Lattice], GroupAction]
    ) -> None:
        """Test that (0, H, 0) is generic for exp(2 i H)."""
        z = _charge(mukai_two, 2)
        result = is_G_sigma_generic(z, (0, 1, 0), trivial_group(mukai_two))
        assert result.generic
        assert result.witness is None

    def test_planted_splitting(
        self, mukai_two: Lattice, trivial_group: Callable[[Lattice], GroupAction]
    ) -> None:
        """Test the two splittings of (1, 2H, 1) on the ray of Z at t = 1/2."""
        z = _charge(mukai_two, 1)
        group = trivial_group(mukai_two)
        result = is_G_sigma_generic(z, (1, 2, 1), group)
        assert not result.generic
        assert [s.v0 for s in result.splittings] == [(0, 1, 0), (1, 1, 1)]
        assert all(s.t == Fraction(1, 2) for s in result.splittings)
        assert result.witness is not None
        assert result.witness.v0 == (0, 1, 0)
        assert result.witness.v1 == (1, 1, 1)

    def test_positive_real_scaling(
        self, mukai_two: Lattice, trivial_group: Callable[[Lattice], GroupAction]
    ) -> None:
        """Test that multiplying Z by a positive real keeps splittings and genericity."""
        group = trivial_group(mukai_two)
        for omega, v in ((1, (1, 2, 1)), (2, (0, 1, 0)), (1, (1, 1, 0))):
            z = _charge(mukai_two, omega)
            for factor in (Fraction(3, 2), Fraction(1, 7), 5):
                scaled = scale_charge(z, factor, 0)
                assert is_G_sigma_generic(scaled, v, group) == is_G_sigma_generic(z, v, group)
        scaled = scale_charge(_charge(mukai_two, 1), Fraction(3, 2), 0)
        result = is_G_sigma_generic(scaled, (1, 2, 1), group)
        assert not result.generic
        assert [s.v0 for s in result.splittings] == [(0, 1, 0), (1, 1, 1)]

    def test_unrestricted_squares(
        self, mukai_two: Lattice, trivial_group: Callable[[Lattice], GroupAction]
    ) -> None:
        """Test that without a square bound each ratio gives one splitting."""
        z = _charge(mukai_two, 1)
        splittings = find_splittings(z, (1, 2, 1), trivial_group(mukai_two), min_square=None)
        assert len(splittings) == 1
        assert splittings[0].t == Fraction(1, 2)

    def test_brute_force_agrees(
        self, mukai_two: Lattice, trivial_group: Callable[[Lattice], GroupAction]
    ) -> None:
        """Test that a box scan finds the same splittings."""
        z = _charge(mukai_two, 1)
        group = trivial_group(mukai_two)
        assert brute_force_splittings(z, (1, 2, 1), group, 3) == find_splittings(
            z, (1, 2, 1), group
        )

    def test_non_primitive_vector(
        self, mukai_two: Lattice, trivial_group: Callable[[Lattice], GroupAction]
    ) -> None:
        """Test that a non-primitive vector is refused."""
        with pytest.raises(StabilityError, match="primitive"):
            find_splittings(_charge(mukai_two, 1), (0, 2, 0), trivial_group(mukai_two))

    def test_charge_must_be_fixed(self, genus2: ProblemFile) -> None:
        """Test that a B-field moved by the involution breaks invariance."""
        ns = genus2.lattice("NS")
        group = genus2.action("G")
        h = (1,) + (0,) * 8
        a1 = (0, 1) + (0,) * 7
        fixed = charge_from_omega_beta(GeometricCharge(ns, h, (0,) * 9))
        moved = charge_from_omega_beta(GeometricCharge(ns, h, a1))
        assert is_G_fixed(fixed, group)
        assert not is_G_fixed(moved, group)
        v = (0,) + h + (0,)
        with pytest.raises(StabilityError, match="not fixed"):
            find_splittings(moved, v, group)
