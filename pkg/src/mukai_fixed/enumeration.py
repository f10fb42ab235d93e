"""Exact enumeration of square-bounded vectors in an affine fiber.

A fiber {v : f(v) = target} is a coset x0 + K of the kernel K of the map.
When K is negative definite, the condition <v, v> >= min_square cuts out an
ellipsoid in kernel coordinates, and the lattice points inside it are listed
by a depth-first search over a rational square completion of the form.
"""

import itertools
import logging
import math
from collections.abc import Sequence
from dataclasses import dataclass, field
from fractions import Fraction

from mukai_fixed.config import BRUTE_FORCE_MAX_RANK
from mukai_fixed.exceptions import EnumerationError, ValidationError
from mukai_fixed.lattice import (
    Lattice,
    Matrix,
    Number,
    Sublattice,
    Vector,
    combine,
    kernel_basis,
    mat_vec,
    pair,
    solve_integral,
    solve_rational,
    square,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class FiberProblem:
    """Vectors v of `source` with map(v) = target and min_square <= <v, v> <= max_square.

    Attributes:
        source: Lattice the vectors live in.
        map: Integral matrix with one row per target coordinate and one
            column per source coordinate. May have no rows.
        target: Target vector, one entry per row of `map`.
        min_square: Lower bound on the square.
        max_square: Optional upper bound on the square.
        extra_constraints: Additional integral conditions (functional, value),
            each requiring functional . v = value.
    """

    source: Lattice
    map: Matrix
    target: Vector
    min_square: int
    max_square: int | None = None
    extra_constraints: tuple[tuple[Vector, int], ...] = ()

    def __post_init__(self) -> None:
        rows = tuple(tuple(int(x) for x in row) for row in self.map)
        object.__setattr__(self, "map", rows)
        object.__setattr__(self, "target", tuple(int(x) for x in self.target))
        n = self.source.rank
        if any(len(row) != n for row in rows):
            raise ValidationError(f"Map rows must have {n} entries for {self.source.describe()}")
        if len(self.target) != len(rows):
            raise ValidationError(
                f"Target has {len(self.target)} entries but the map has {len(rows)} rows"
            )
        for functional, _ in self.extra_constraints:
            if len(functional) != n:
                raise ValidationError(f"Constraint functional must have {n} entries")
        if self.max_square is not None and self.max_square < self.min_square:
            raise ValidationError(
                f"max_square {self.max_square} is below min_square {self.min_square}"
            )

    def stacked(self) -> tuple[Matrix, Vector]:
        """The map with every extra constraint appended as a row."""
        rows = self.map + tuple(tuple(f) for f, _ in self.extra_constraints)
        rhs = self.target + tuple(value for _, value in self.extra_constraints)
        return rows, rhs

    def accepts(self, v: Sequence[int]) -> bool:
        """Check every condition on a single vector."""
        rows, rhs = self.stacked()
        if mat_vec(rows, v) != rhs:
            return False
        sq = square(self.source, v)
        if sq < self.min_square:
            return False
        return self.max_square is None or sq <= self.max_square


@dataclass(frozen=True)
class EnumerationStats:
    """Search-tree statistics."""

    kernel_rank: int = 0
    nodes: int = 0
    leaves: int = 0


@dataclass(frozen=True)
class EnumerationResult:
    """Vectors found, sorted lexicographically, with a flag for completeness."""

    vectors: tuple[Vector, ...]
    exhaustive: bool
    stats: EnumerationStats = field(default_factory=EnumerationStats)

    def by_square(self, lattice: Lattice) -> dict[int, int]:
        """Count of vectors per square."""
        counts: dict[int, int] = {}
        for v in self.vectors:
            sq = int(square(lattice, v))
            counts[sq] = counts.get(sq, 0) + 1
        return dict(sorted(counts.items(), reverse=True))


@dataclass(frozen=True)
class _Completion:
    """Fiber in kernel coordinates: <x0 + t K, same> = s0 + 2 b.t - t^T A t."""

    particular: Vector
    kernel: Matrix
    form: tuple[tuple[int, ...], ...]
    center: tuple[Fraction, ...]
    radius: Fraction


def fiber_coset(
    source: Lattice, rows: Sequence[Sequence[int]], target: Sequence[int]
) -> tuple[Vector, Sublattice] | None:
    """Particular solution and kernel of map(v) = target, or None if the fiber is empty."""
    x0 = solve_integral(rows, target, source.rank)
    if x0 is None:
        return None
    return x0, Sublattice(source, kernel_basis(rows, source.rank), saturated=True)


def square_completion(form: Sequence[Sequence[Number]]) -> tuple[list[list[Fraction]], bool]:
    """Rewrite t^T A t as sum_i q_ii (t_i + sum_{j > i} q_ij t_j)^2.

    Returns:
        The matrix q (diagonal and upper triangle are meaningful) and whether A
        is positive definite.
    """
    k = len(form)
    q = [[Fraction(x) for x in row] for row in form]
    for i in range(k):
        if q[i][i] <= 0:
            return q, False
        for j in range(i + 1, k):
            q[j][i] = q[i][j]
            q[i][j] = q[i][j] / q[i][i]
        for r in range(i + 1, k):
            for c in range(r, k):
                q[r][c] -= q[r][i] * q[i][c]
    return q, True


def enumerate_bounded(
    form: Sequence[Sequence[Number]],
    center: Sequence[Number],
    bound: Number,
) -> tuple[list[tuple[int, ...]], int]:
    """All integer t with (t - c)^T A (t - c) <= bound, for positive definite A.

    Returns:
        The points, in lexicographic order, and the number of search nodes.

    Raises:
        EnumerationError: If A is not positive definite.
    """
    k = len(form)
    bound = Fraction(bound)
    if bound < 0:
        return [], 0
    q, definite = square_completion(form)
    if not definite:
        raise EnumerationError("Quadratic form is not positive definite")
    c = [Fraction(x) for x in center]
    found: list[tuple[int, ...]] = []
    t = [0] * k
    nodes = 0

    def descend(i: int, remaining: Fraction) -> None:
        nonlocal nodes
        nodes += 1
        if i < 0:
            found.append(tuple(t))
            return
        mid = c[i] - sum((q[i][j] * (t[j] - c[j]) for j in range(i + 1, k)), Fraction(0))
        reach = math.isqrt(math.floor(remaining / q[i][i])) + 1
        for value in range(math.floor(mid) - reach, math.ceil(mid) + reach + 1):
            used = q[i][i] * (value - mid) ** 2
            if used <= remaining:
                t[i] = value
                descend(i - 1, remaining - used)
        t[i] = 0

    descend(k - 1, bound)
    found.sort()
    return found, nodes


def _completion_at(
    lattice: Lattice, x0: Vector, basis: Matrix, form: Matrix, min_square: int
) -> _Completion:
    b = [int(pair(lattice, x0, k)) for k in basis]
    center = solve_rational(form, b) if basis else ()
    s0 = int(square(lattice, x0))
    radius = s0 - min_square + sum((bi * ci for bi, ci in zip(b, center, strict=True)), Fraction(0))
    return _Completion(x0, basis, form, tuple(center), Fraction(radius))


def _complete(problem: FiberProblem) -> _Completion | None:
    """Complete the square around the lattice point of the coset nearest the ellipsoid centre."""
    rows, rhs = problem.stacked()
    coset = fiber_coset(problem.source, rows, rhs)
    if coset is None:
        return None
    x0, kernel = coset
    lattice = problem.source
    basis = kernel.basis
    # A = -(Gram of the kernel) must be positive definite
    form = tuple(tuple(-int(pair(lattice, a, b)) for b in basis) for a in basis)
    if basis and not square_completion(form)[1]:
        raise EnumerationError(
            f"The fiber kernel (rank {len(basis)}) in {lattice.describe()} is not negative "
            "definite, so the fiber has infinitely many vectors above any square bound"
        )
    first = _completion_at(lattice, x0, basis, form, problem.min_square)
    shift = tuple(round(c) for c in first.center)
    if not any(shift):
        return first
    moved = tuple(
        x + y for x, y in zip(x0, combine(basis, shift, lattice.rank), strict=True)
    )
    return _completion_at(lattice, moved, basis, form, problem.min_square)


def enumerate_fiber(problem: FiberProblem) -> EnumerationResult:
    """Every vector satisfying the fiber problem, sorted lexicographically.

    Raises:
        EnumerationError: If the fiber is nonempty and its kernel is not
            negative definite.
    """
    completion = _complete(problem)
    if completion is None:
        logger.debug("Fiber over %s is empty", problem.target)
        return EnumerationResult((), exhaustive=True)
    n = problem.source.rank
    points, nodes = enumerate_bounded(completion.form, completion.center, completion.radius)
    vectors = set()
    for t in points:
        v = tuple(
            x + y
            for x, y in zip(completion.particular, combine(completion.kernel, t, n), strict=True)
        )
        if problem.accepts(v):
            vectors.add(v)
    stats = EnumerationStats(kernel_rank=len(completion.kernel), nodes=nodes, leaves=len(points))
    logger.debug(
        "Fiber over %s: %d vectors (kernel rank %d, %d nodes)",
        problem.target,
        len(vectors),
        stats.kernel_rank,
        stats.nodes,
    )
    return EnumerationResult(tuple(sorted(vectors)), exhaustive=True, stats=stats)


def certified_radius(problem: FiberProblem) -> int:
    """Box radius around particular_solution, in kernel coordinates, holding every solution.

    On the ellipsoid (t - c)^T A (t - c) <= R each coordinate satisfies
    |t_i - c_i| <= sqrt(R (A^-1)_ii).

    Raises:
        EnumerationError: If the kernel is not negative definite.
    """
    completion = _complete(problem)
    if completion is None or completion.radius < 0:
        return 0
    k = len(completion.kernel)
    radius = 0
    for i in range(k):
        unit = tuple(1 if j == i else 0 for j in range(k))
        spread = completion.radius * solve_rational(completion.form, unit)[i]
        bound = math.ceil(abs(completion.center[i])) + math.isqrt(math.ceil(spread)) + 1
        radius = max(radius, bound)
    return radius


def particular_solution(problem: FiberProblem) -> Vector | None:
    """The coset point both searches are centred on, or None for an empty fiber."""
    try:
        completion = _complete(problem)
    except EnumerationError:
        rows, rhs = problem.stacked()
        return solve_integral(rows, rhs, problem.source.rank)
    return None if completion is None else completion.particular


def brute_force_fiber(problem: FiberProblem, box_radius: int) -> EnumerationResult:
    """Scan the box |t_i| <= box_radius in kernel coordinates around particular_solution.

    The result is marked exhaustive when the box contains the certified radius.

    Raises:
        EnumerationError: If the kernel rank is too large to scan.
    """
    rows, rhs = problem.stacked()
    coset = fiber_coset(problem.source, rows, rhs)
    if coset is None:
        return EnumerationResult((), exhaustive=True)
    _, kernel = coset
    x0 = particular_solution(problem)
    assert x0 is not None
    k = kernel.rank
    if k > BRUTE_FORCE_MAX_RANK:
        raise EnumerationError(
            f"Kernel rank {k} exceeds the brute-force limit {BRUTE_FORCE_MAX_RANK}"
        )
    n = problem.source.rank
    vectors = set()
    count = 0
    for t in itertools.product(range(-box_radius, box_radius + 1), repeat=k):
        count += 1
        v = tuple(x + y for x, y in zip(x0, combine(kernel.basis, t, n), strict=True))
        if problem.accepts(v):
            vectors.add(v)
    try:
        exhaustive = certified_radius(problem) <= box_radius
    except EnumerationError:
        exhaustive = False
    stats = EnumerationStats(kernel_rank=k, nodes=count, leaves=count)
    return EnumerationResult(tuple(sorted(vectors)), exhaustive=exhaustive, stats=stats)
