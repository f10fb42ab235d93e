"""Rational central charges: evaluation, ray comparison, domains and genericity.

A central charge is an element re + i im of the lattice tensored with Q(i),
acting on vectors through the lattice pairing. Phases are never computed;
every comparison is an exact sign test.
"""

import itertools
import logging
import math
from collections.abc import Sequence
from dataclasses import dataclass
from fractions import Fraction

from mukai_fixed.config import BRUTE_FORCE_MAX_RANK, SUPPORT_MIN_SQUARE
from mukai_fixed.enumeration import FiberProblem, enumerate_bounded, enumerate_fiber
from mukai_fixed.exceptions import EnumerationError, StabilityError, ValidationError
from mukai_fixed.group_action import GroupAction, invariant_sublattice
from mukai_fixed.lattice import (
    Lattice,
    Sublattice,
    Vector,
    integer_rank,
    is_primitive,
    kernel_basis,
    mukai_lattice,
    orthogonal_complement,
    pair,
    square,
    solve_integral,
)

logger = logging.getLogger(__name__)

Complex = tuple[Fraction, Fraction]
RationalVector = tuple[Fraction, ...]


@dataclass(frozen=True)
class CentralCharge:
    """Z = re + i im, paired with lattice vectors through the ambient form."""

    ambient: Lattice
    re: RationalVector
    im: RationalVector

    def __post_init__(self) -> None:
        re = tuple(Fraction(x) for x in self.re)
        im = tuple(Fraction(x) for x in self.im)
        if len(re) != self.ambient.rank or len(im) != self.ambient.rank:
            raise ValidationError(
                f"Charge vectors must have {self.ambient.rank} entries "
                f"for {self.ambient.describe()}"
            )
        object.__setattr__(self, "re", re)
        object.__setattr__(self, "im", im)


@dataclass(frozen=True)
class GeometricCharge:
    """exp(beta + i omega) on the Mukai lattice of `ns`, with omega^2 > 0."""

    ns: Lattice
    omega: RationalVector
    beta: RationalVector

    def __post_init__(self) -> None:
        omega = tuple(Fraction(x) for x in self.omega)
        beta = tuple(Fraction(x) for x in self.beta)
        if len(omega) != self.ns.rank or len(beta) != self.ns.rank:
            raise ValidationError(f"omega and beta must have {self.ns.rank} entries")
        if square(self.ns, omega) <= 0:
            raise StabilityError(f"omega must have positive square, got {square(self.ns, omega)}")
        object.__setattr__(self, "omega", omega)
        object.__setattr__(self, "beta", beta)


@dataclass(frozen=True)
class DomainCheck:
    """Result of the (-2)-class test; witness is a (-2)-vector orthogonal to Z."""

    inside: bool
    witness: Vector | None = None


@dataclass(frozen=True)
class Splitting:
    """v = v0 + v1 with Z(v0) = t Z(v), 0 < t < 1."""

    v0: Vector
    v1: Vector
    t: Fraction


@dataclass(frozen=True)
class GenericityResult:
    """Whether v is generic for Z, with the first splitting found otherwise."""

    generic: bool
    witness: Splitting | None = None
    splittings: tuple[Splitting, ...] = ()


def charge_from_omega_beta(gc: GeometricCharge) -> CentralCharge:
    """Split exp(beta + i omega) = (1, beta + i omega, (beta + i omega)^2 / 2) into re and im.

    Against v = (r, l, s) this evaluates to
    -s + r/2 (omega^2 - beta^2) + l.beta + i (l.omega - r omega.beta).
    """
    ns = gc.ns
    b2 = square(ns, gc.beta)
    w2 = square(ns, gc.omega)
    bw = pair(ns, gc.beta, gc.omega)
    re = (Fraction(1), *gc.beta, Fraction(b2 - w2) / 2)
    im = (Fraction(0), *gc.omega, Fraction(bw))
    return CentralCharge(mukai_lattice(ns), re, im)


def evaluate(z: CentralCharge, v: Sequence[int]) -> Complex:
    """(Re Z(v), Im Z(v))."""
    return Fraction(pair(z.ambient, z.re, v)), Fraction(pair(z.ambient, z.im, v))


def same_ray(z1: Complex, z2: Complex) -> bool:
    """Whether two nonzero complex numbers have the same phase.

    Raises:
        StabilityError: If either is zero.
    """
    if z1 == (0, 0) or z2 == (0, 0):
        raise StabilityError("The zero vector has no phase")
    cross = z1[0] * z2[1] - z1[1] * z2[0]
    dot = z1[0] * z2[0] + z1[1] * z2[1]
    return cross == 0 and dot > 0


def scale_charge(z: CentralCharge, a: Fraction | int, b: Fraction | int) -> CentralCharge:
    """(a + b i) Z."""
    if a == 0 and b == 0:
        raise StabilityError("Cannot scale a charge by zero")
    re = tuple(a * x - b * y for x, y in zip(z.re, z.im, strict=True))
    im = tuple(b * x + a * y for x, y in zip(z.re, z.im, strict=True))
    return CentralCharge(z.ambient, re, im)


def spans_positive_plane(z: CentralCharge) -> bool:
    """Whether re and im span a positive definite plane."""
    lat = z.ambient
    rr = pair(lat, z.re, z.re)
    ri = pair(lat, z.re, z.im)
    ii = pair(lat, z.im, z.im)
    return rr > 0 and rr * ii - ri * ri > 0


def _clear(vec: Sequence[Fraction]) -> Vector:
    d = math.lcm(*(x.denominator for x in vec))
    return tuple(int(x * d) for x in vec)


def in_distinguished_domain(z: CentralCharge) -> DomainCheck:
    """Check that no (-2)-vector is orthogonal to both re and im.

    The orthogonal complement of a positive plane in a lattice of signature
    (2, rho) is negative definite, so the search is finite.

    Raises:
        StabilityError: If Z does not span a positive plane or the complement
            is not negative definite.
    """
    if not spans_positive_plane(z):
        raise StabilityError("The charge does not span a positive definite plane")
    lat = z.ambient
    plane = Sublattice(lat, (_clear(z.re), _clear(z.im)))
    complement = orthogonal_complement(lat, plane)
    if complement.rank == 0:
        return DomainCheck(inside=True)
    form = tuple(tuple(-x for x in row) for row in complement.gram())
    try:
        points, _ = enumerate_bounded(form, (0,) * complement.rank, 2)
    except EnumerationError as e:
        raise StabilityError(
            f"The complement of the charge plane in {lat.describe()} is not negative definite"
        ) from e
    roots = []
    for t in points:
        delta = complement.embed(t)
        if square(lat, delta) == -2:
            roots.append(delta)
    if not roots:
        return DomainCheck(inside=True)
    witness = min(roots)
    if pair(lat, witness, z.re) != 0 or pair(lat, witness, z.im) != 0:
        raise StabilityError(f"Witness {witness} is not orthogonal to the charge")
    return DomainCheck(inside=False, witness=witness)


def is_G_fixed(z: CentralCharge, group: GroupAction) -> bool:  # noqa: N802
    """Whether every generator fixes re and im."""
    if group.ambient.gram != z.ambient.gram:
        raise ValidationError("The group and the charge live on different lattices")
    for g in group.generators:
        if g.apply(z.re) != z.re or g.apply(z.im) != z.im:
            return False
    return True


@dataclass(frozen=True)
class InvariantCharge:
    """A charge restricted to the invariant lattice, in its coordinates."""

    basis: Sublattice
    lattice: Lattice
    re: RationalVector
    im: RationalVector

    def evaluate(self, u: Sequence[int]) -> Complex:
        re = sum((a * b for a, b in zip(self.re, u, strict=True)), Fraction(0))
        im = sum((a * b for a, b in zip(self.im, u, strict=True)), Fraction(0))
        return re, im

    def coordinates(self, v: Sequence[int]) -> Vector:
        coords = self.basis.coordinates(v)
        if coords is None:
            raise ValidationError(f"{tuple(v)} is not in the invariant lattice")
        return coords


def restrict_to_invariant(z: CentralCharge, group: GroupAction) -> InvariantCharge:
    """Express Z as a functional on the coordinates of the invariant lattice."""
    inv = invariant_sublattice(group)
    re = tuple(Fraction(pair(z.ambient, z.re, b)) for b in inv.basis)
    im = tuple(Fraction(pair(z.ambient, z.im, b)) for b in inv.basis)
    return InvariantCharge(inv, inv.as_lattice("invariant lattice"), re, im)


def _check_preconditions(z: CentralCharge, v: Sequence[int], group: GroupAction) -> None:
    if not is_G_fixed(z, group):
        raise StabilityError("The charge is not fixed by the group")
    if not is_primitive(v):
        raise StabilityError(f"{tuple(v)} is not primitive")
    if not spans_positive_plane(z):
        raise StabilityError("The charge does not span a positive definite plane")


def find_splittings(
    z: CentralCharge,
    v: Sequence[int],
    group: GroupAction,
    min_square: int | None = SUPPORT_MIN_SQUARE,
) -> tuple[Splitting, ...]:
    """Every splitting v = v0 + v1 in the invariant lattice with Z(v0), Z(v1) on the ray of Z(v).

    Z(v0) = t Z(v) with 0 < t < 1, and t ranges over j / g where g is the
    content of Z(v) after clearing denominators. For each t the candidates
    form a coset of the kernel of Z, which is negative definite.

    Args:
        z: A G-fixed charge spanning a positive plane.
        v: Primitive invariant vector.
        group: The group.
        min_square: Both summands must have square at least this. With None
            the squares are unrestricted; each admissible t then contributes
            one splitting, its coset having infinitely many members.

    Returns:
        Splittings sorted by t then v0.

    Raises:
        StabilityError: If a precondition fails or the kernel of Z on the
            invariant lattice is not negative definite.
    """
    _check_preconditions(z, v, group)
    restricted = restrict_to_invariant(z, group)
    uv = restricted.coordinates(v)
    zv = restricted.evaluate(uv)
    if zv == (0, 0):
        raise StabilityError(f"Z vanishes on {tuple(v)}")
    k = restricted.basis.rank
    d = math.lcm(*(x.denominator for x in restricted.re + restricted.im + zv))
    rows = (
        tuple(int(x * d) for x in restricted.re),
        tuple(int(x * d) for x in restricted.im),
    )
    w = (int(zv[0] * d), int(zv[1] * d))
    content = math.gcd(*w)
    w0 = (w[0] // content, w[1] // content)
    if integer_rank(rows, k) < 2:
        raise StabilityError("The charge is degenerate on the invariant lattice")

    inv_lattice = restricted.lattice
    splittings = []
    for j in range(1, content):
        target = (j * w0[0], j * w0[1])
        if min_square is None:
            u0 = solve_integral(rows, target, k)
            if u0 is not None:
                splittings.append(_splitting(restricted, u0, uv, Fraction(j, content)))
            continue
        problem = FiberProblem(source=inv_lattice, map=rows, target=target, min_square=min_square)
        try:
            candidates = enumerate_fiber(problem).vectors
        except EnumerationError as e:
            raise StabilityError(
                "The kernel of the charge on the invariant lattice is not negative definite; "
                "the charge is too degenerate for a finite search"
            ) from e
        for u0 in candidates:
            u1 = tuple(a - b for a, b in zip(uv, u0, strict=True))
            if square(inv_lattice, u1) >= min_square:
                splittings.append(_splitting(restricted, u0, uv, Fraction(j, content)))
    logger.debug("Found %d splittings of %s", len(splittings), tuple(v))
    return tuple(sorted(splittings, key=lambda s: (s.t, s.v0)))


def _splitting(
    restricted: InvariantCharge, u0: Sequence[int], uv: Sequence[int], t: Fraction
) -> Splitting:
    v0 = restricted.basis.embed(u0)
    v1 = restricted.basis.embed(tuple(a - b for a, b in zip(uv, u0, strict=True)))
    return Splitting(v0, v1, t)


def is_G_sigma_generic(  # noqa: N802
    z: CentralCharge,
    v: Sequence[int],
    group: GroupAction,
    min_square: int | None = SUPPORT_MIN_SQUARE,
) -> GenericityResult:
    """Whether no splitting of v has both summands on the ray of Z(v).

    Raises:
        StabilityError: As for find_splittings.
    """
    splittings = find_splittings(z, v, group, min_square)
    if splittings:
        return GenericityResult(False, splittings[0], splittings)
    return GenericityResult(True)


def brute_force_splittings(
    z: CentralCharge,
    v: Sequence[int],
    group: GroupAction,
    box_radius: int,
    min_square: int = SUPPORT_MIN_SQUARE,
) -> tuple[Splitting, ...]:
    """Scan v0 over the box |u_i| <= box_radius in invariant-lattice coordinates.

    Raises:
        StabilityError: If a precondition fails.
        EnumerationError: If the invariant lattice is too large to scan.
    """
    _check_preconditions(z, v, group)
    restricted = restrict_to_invariant(z, group)
    k = restricted.basis.rank
    if k > BRUTE_FORCE_MAX_RANK:
        raise EnumerationError(f"Rank {k} exceeds the brute-force limit {BRUTE_FORCE_MAX_RANK}")
    uv = restricted.coordinates(v)
    zv = restricted.evaluate(uv)
    lat = restricted.lattice
    found = []
    for u0 in itertools.product(range(-box_radius, box_radius + 1), repeat=k):
        z0 = restricted.evaluate(u0)
        if z0 == (0, 0) or not same_ray(z0, zv):
            continue
        u1 = tuple(a - b for a, b in zip(uv, u0, strict=True))
        z1 = restricted.evaluate(u1)
        if z1 == (0, 0) or not same_ray(z1, zv):
            continue
        if square(lat, u0) < min_square or square(lat, u1) < min_square:
            continue
        t = z0[0] / zv[0] if zv[0] else z0[1] / zv[1]
        found.append(_splitting(restricted, u0, uv, t))
    return tuple(sorted(found, key=lambda s: (s.t, s.v0)))


def kernel_of_charge(z: CentralCharge) -> Sublattice:
    """Saturated sublattice of vectors with Z(x) = 0."""
    rows = (_clear(z.re), _clear(z.im))
    return Sublattice(z.ambient, kernel_basis(rows, z.ambient.rank), saturated=True)

