"""Randomized cross-checks of the exact searches against box scans.

Fiber problems are drawn on U + N with N negative definite, disguised by a
random unimodular change of basis. Charges are drawn on small Mukai
lattices; some have a splitting planted on purpose.
"""

import logging
import random
from dataclasses import dataclass, field

from mukai_fixed.config import DEFAULT_BOX_RADIUS
from mukai_fixed.enumeration import (
    FiberProblem,
    brute_force_fiber,
    certified_radius,
    enumerate_fiber,
)
from mukai_fixed.exceptions import MukaiFixedError
from mukai_fixed.group_action import GroupAction, Isometry, generate_group
from mukai_fixed.lattice import (
    Lattice,
    Matrix,
    Sublattice,
    Vector,
    determinant,
    diagonal,
    direct_sum,
    hyperbolic_plane,
    identity_matrix,
    is_primitive,
    mat_mul,
    mukai_lattice,
    orthogonal_complement,
    square,
    transpose,
)
from mukai_fixed.stability import (
    CentralCharge,
    brute_force_splittings,
    evaluate,
    find_splittings,
    spans_positive_plane,
)

logger = logging.getLogger(__name__)

MAX_BOX = 6
PLANTED_KERNELS: tuple[Vector, ...] = ((0, 0, 1, 0), (1, 0, 0, 1), (1, 0, 1, 1), (0, 1, 2, 0))


@dataclass
class OracleSummary:
    """Counts of compared instances and any disagreement found.

    Attributes:
        boxed_charges: Charges whose splittings all lie inside the scanned box,
            so the box scan also decides genericity. This is not a proof that
            no splitting exists outside the box.
    """

    fiber_problems: int = 0
    charges: int = 0
    planted: int = 0
    boxed_charges: int = 0
    disagreements: list[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.disagreements


def _unimodular(rng: random.Random, n: int, steps: int = 6) -> Matrix:
    m = [list(r) for r in identity_matrix(n)]
    for _ in range(steps):
        i, j = rng.sample(range(n), 2)
        c = rng.choice((-1, 1))
        for row in m:
            row[i] += c * row[j]
    return tuple(map(tuple, m))


def random_fiber_problem(rng: random.Random, max_rank: int = 4) -> FiberProblem:
    """A fiber problem whose kernel is negative definite of rank at most max_rank - 1."""
    k = rng.randint(1, max_rank - 1)
    while True:
        b = [[rng.randint(-2, 2) for _ in range(k)] for _ in range(k)]
        gram = mat_mul(b, transpose(b, k))
        negative = Lattice(tuple(tuple(-x for x in row) for row in gram))
        if all(negative.gram[i][i] < 0 for i in range(k)) and _nonsingular(negative):
            break
    base = direct_sum(hyperbolic_plane(), negative)
    n = base.rank
    change = _unimodular(rng, n)
    source = Lattice(mat_mul(mat_mul(transpose(change, n), base.gram), change), label="oracle")
    rows = mat_mul(identity_matrix(n)[:2], change)
    target = (rng.randint(-2, 2), rng.randint(-2, 2))
    extra: tuple[tuple[Vector, int], ...] = ()
    if k > 1 and rng.random() < 0.3:
        functional = tuple(rng.randint(-1, 1) for _ in range(n))
        extra = ((functional, rng.randint(-1, 1)),)
    return FiberProblem(
        source=source,
        map=rows,
        target=target,
        min_square=rng.randint(-8, 2),
        extra_constraints=extra,
    )


def _nonsingular(lattice: Lattice) -> bool:
    return determinant(lattice) != 0


def check_fiber(problem: FiberProblem, summary: OracleSummary) -> bool:
    """Compare the exact search with a certified box scan; False if skipped."""
    try:
        radius = certified_radius(problem)
    except MukaiFixedError:
        return False
    if radius > MAX_BOX:
        return False
    exact = enumerate_fiber(problem).vectors
    scan = brute_force_fiber(problem, radius)
    summary.fiber_problems += 1
    if not scan.exhaustive or set(exact) != set(scan.vectors):
        summary.disagreements.append(
            f"fiber over {problem.target} (min square {problem.min_square}): "
            f"search {len(exact)} vectors, box scan {len(scan.vectors)}"
        )
    return True


def _trivial_group(lattice: Lattice) -> GroupAction:
    return generate_group([Isometry(lattice, identity_matrix(lattice.rank))], label="trivial")


def _charge_lattice(rng: random.Random) -> Lattice:
    if rng.random() < 0.5:
        return mukai_lattice(diagonal(2), label="U + <2>")
    return mukai_lattice(diagonal(2, -2), label="U + <2> + <-2>")


def random_charge(rng: random.Random) -> tuple[CentralCharge, Vector]:
    """A charge spanning a positive plane and a primitive vector it does not kill."""
    lattice = _charge_lattice(rng)
    n = lattice.rank
    while True:
        re = tuple(rng.randint(-3, 3) for _ in range(n))
        im = tuple(rng.randint(-3, 3) for _ in range(n))
        z = CentralCharge(lattice, re, im)
        if not spans_positive_plane(z):
            continue
        v = tuple(rng.randint(-2, 2) for _ in range(n))
        if any(v) and is_primitive(v) and evaluate(z, v) != (0, 0):
            return z, v


def planted_charge(rng: random.Random) -> tuple[CentralCharge, Vector, Vector]:
    """A charge with a splitting v = v0 + v1, Z(v0) = Z(v1), built in by construction.

    The difference k = v0 - v1 is a negative vector, and Z is drawn from the
    orthogonal complement of k.
    """
    lattice = mukai_lattice(diagonal(2, -2), label="U + <2> + <-2>")
    n = lattice.rank
    while True:
        k = rng.choice(PLANTED_KERNELS)
        perp = orthogonal_complement(lattice, Sublattice(lattice, (k,))).basis
        coeffs_re = [rng.randint(-2, 2) for _ in perp]
        coeffs_im = [rng.randint(-2, 2) for _ in perp]
        re = tuple(sum(c * b[i] for c, b in zip(coeffs_re, perp, strict=True)) for i in range(n))
        im = tuple(sum(c * b[i] for c, b in zip(coeffs_im, perp, strict=True)) for i in range(n))
        z = CentralCharge(lattice, re, im)
        if not spans_positive_plane(z):
            continue
        v1 = tuple(rng.randint(-1, 1) for _ in range(n))
        v0 = tuple(a + b for a, b in zip(v1, k, strict=True))
        v = tuple(a + b for a, b in zip(v0, v1, strict=True))
        if square(lattice, v0) < -2 or square(lattice, v1) < -2:
            continue
        if not any(v) or not is_primitive(v) or evaluate(z, v1) == (0, 0):
            continue
        return z, v, v0


def check_charge(
    z: CentralCharge,
    v: Vector,
    summary: OracleSummary,
    planted: Vector | None = None,
    box_radius: int = DEFAULT_BOX_RADIUS,
) -> None:
    """Compare find_splittings with a box scan on the same charge."""
    group = _trivial_group(z.ambient)
    search = find_splittings(z, v, group)
    scan = brute_force_splittings(z, v, group, box_radius)
    in_box = {s.v0 for s in search if max(abs(x) for x in s.v0) <= box_radius}
    scanned = {s.v0 for s in scan}
    summary.charges += 1
    if in_box != scanned:
        summary.disagreements.append(
            f"charge on {z.ambient.describe()} at {v}: "
            f"search {sorted(in_box)}, scan {sorted(scanned)}"
        )
    if len(in_box) == len(search):
        summary.boxed_charges += 1
        if (not search) != (not scan):
            summary.disagreements.append(f"genericity of {v} differs between search and scan")
    if planted is not None:
        summary.planted += 1
        if planted not in {s.v0 for s in search}:
            summary.disagreements.append(f"planted splitting of {v} through {planted} was missed")


def run_oracle(seed: int, problems: int, charges: int, planted: int | None = None) -> OracleSummary:
    """Run the randomized cross-checks.

    Args:
        seed: Seed of the random generator.
        problems: Number of fiber problems to compare.
        charges: Number of charges to compare, planted ones included.
        planted: How many of the charges carry a planted splitting
            (default: a quarter, at least one).

    Returns:
        The summary; disagreements are listed, not raised.
    """
    rng = random.Random(seed)
    summary = OracleSummary()
    attempts = 0
    while summary.fiber_problems < problems and attempts < 50 * max(problems, 1):
        attempts += 1
        check_fiber(random_fiber_problem(rng), summary)
    n_planted = max(1, charges // 4) if planted is None else planted
    n_planted = min(n_planted, charges)
    for i in range(charges):
        if i < n_planted:
            z, v, v0 = planted_charge(rng)
            check_charge(z, v, summary, planted=v0)
        else:
            z, v = random_charge(rng)
            check_charge(z, v, summary)
    logger.info(
        "Oracle: %d fiber problems, %d charges (%d planted), %d disagreements",
        summary.fiber_problems,
        summary.charges,
        summary.planted,
        len(summary.disagreements),
    )
    return summary
