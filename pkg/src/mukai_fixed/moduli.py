"""Fixed loci of a finite group on moduli spaces, at the level of lattices.

Given the forgetful map p from the equivariant lattice to the lattice of the
surface, the Mukai vectors mapping to v (with square at least -2, or summing
up a declared decomposition of v) index the components of the fixed locus.
Components are counted up to the dual group, and classified by square,
decomposition census and symmetric-power strata.
"""

import itertools
import logging
import math
from collections import deque
from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field
from typing import Literal

from sympy import Matrix as SympyMatrix

from mukai_fixed.config import SUPPORT_MIN_SQUARE
from mukai_fixed.enumeration import FiberProblem, enumerate_fiber
from mukai_fixed.exceptions import (
    GroupActionError,
    LatticeError,
    ValidationError,
    VerificationError,
)
from mukai_fixed.group_action import (
    GroupAction,
    Isometry,
    generate_group,
    invariant_sublattice,
    is_invariant,
    sum_over_group,
    verify_isometry,
)
from mukai_fixed.lattice import (
    Lattice,
    Matrix,
    Sublattice,
    Vector,
    divisibility,
    kernel_basis,
    mat_mul,
    mat_vec,
    orthogonal_complement,
    pair,
    square,
    transpose,
)

logger = logging.getLogger(__name__)

DivisibilityMode = Literal["mukai", "ns"]

STABLE = "stable stratum"
SEMISTABLE = "contains strictly semistable points"

Decomposition = tuple[Vector, ...]


@dataclass(frozen=True)
class EquivalenceData:
    """Lattice shadow of an equivalence between equivariant and quotient-side categories.

    Attributes:
        lattice: Algebraic Mukai lattice of the surface carrying G.
        lattice_prime: Algebraic Mukai lattice of the other side.
        p_map: Forgetful map, rows indexed by `lattice`, columns by `lattice_prime`.
        group: The finite group acting on `lattice`.
        dual_generators: Generators of the dual group acting on `lattice_prime`.
        brauer_trivial: Whether the Brauer class on the other side is trivial.
        cyclic: Whether H^2(G, C*) vanishes (every invariant object linearizes).
        divisibility_mode: Sublattice divisibility is measured against.
        q_hint: Optional user-supplied q, used only as a cross-check.
        decompositions: Declared decompositions v = u_1 + ... + u_k per target v.
        label: Name used in reports.
    """

    lattice: Lattice
    lattice_prime: Lattice
    p_map: Matrix
    group: GroupAction
    dual_generators: tuple[Isometry, ...]
    brauer_trivial: bool = True
    cyclic: bool = True
    divisibility_mode: DivisibilityMode = "mukai"
    q_hint: Matrix | None = None
    decompositions: tuple[tuple[Vector, tuple[Decomposition, ...]], ...] = ()
    label: str = ""

    def __post_init__(self) -> None:
        p = tuple(tuple(int(x) for x in row) for row in self.p_map)
        object.__setattr__(self, "p_map", p)
        if len(p) != self.lattice.rank or any(len(r) != self.lattice_prime.rank for r in p):
            raise ValidationError(
                f"p must be a {self.lattice.rank} x {self.lattice_prime.rank} matrix"
            )
        if self.group.ambient.gram != self.lattice.gram:
            raise ValidationError("The group must act on the source lattice of p")
        for q in self.dual_generators:
            if q.ambient.gram != self.lattice_prime.gram:
                raise ValidationError("Dual generators must act on the target lattice of p")
        if self.divisibility_mode not in ("mukai", "ns"):
            raise ValidationError(f"Unknown divisibility mode {self.divisibility_mode!r}")

    @property
    def group_order(self) -> int:
        return self.group.order

    def declared_for(self, v: Sequence[int]) -> tuple[Decomposition, ...]:
        """Decompositions declared for v."""
        for target, decompositions in self.decompositions:
            if target == tuple(v):
                return decompositions
        return ()


@dataclass
class VerificationCheck:
    """Outcome of one verification check."""

    name: str
    passed: bool
    detail: str = ""


@dataclass
class VerificationReport:
    """All checks run on a set of equivalence data, plus the derived maps."""

    checks: list[VerificationCheck] = field(default_factory=list)
    q_map: Matrix = ()
    saturated_image: Matrix = ()

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    @property
    def failures(self) -> list[VerificationCheck]:
        return [c for c in self.checks if not c.passed]

    def add(self, name: str, offenders: list[str]) -> None:
        detail = "; ".join(offenders[:5])
        if len(offenders) > 5:
            detail += f"; ... ({len(offenders)} failures)"
        self.checks.append(VerificationCheck(name, not offenders, detail))


@dataclass(frozen=True)
class ComponentRecord:
    """One orbit of the support, standing for one component of the fixed locus."""

    representative: Vector
    orbit_size: int
    square: int
    dimension: int
    divisibility: int
    census: tuple[tuple[tuple[int, ...], int], ...] = ()
    sym_power: tuple[int, Vector] | None = None

    @property
    def stability(self) -> str:
        if self.square >= SUPPORT_MIN_SQUARE and not self.census and self.sym_power is None:
            return STABLE
        return SEMISTABLE

    @property
    def class_key(self) -> tuple:
        return (self.square, self.census, self.sym_power is not None)


@dataclass(frozen=True)
class ProfileClass:
    """Records sharing square, census and symmetric-power flag."""

    label: str
    square: int
    dimension: int
    census: tuple[tuple[tuple[int, ...], int], ...]
    sym_power: bool
    count: int
    divisibility_one: int
    stability: str


@dataclass
class FixedLocusReport:
    """Classified components of the fixed locus for one Mukai vector."""

    vector: Vector
    records: list[ComponentRecord]
    profile: list[ProfileClass]
    notes: list[str]
    support_size: int
    group_order: int
    dual_order: int
    summary: dict[str, object] = field(default_factory=dict)


def _mismatch(offenders: list[str], i: int, j: int, lhs: object, rhs: object) -> None:
    offenders.append(f"({i}, {j}): {lhs} != {rhs}")


def derive_q_map(data: EquivalenceData) -> Matrix:
    """Solve <q x, y>' = <x, p y> for q, with columns the images of the basis of `lattice`.

    Raises:
        VerificationError: If the adjoint is not integral.
    """
    g = SympyMatrix(data.lattice.gram)
    g_prime = SympyMatrix(data.lattice_prime.gram)
    p = SympyMatrix(data.p_map)
    q = g_prime.inv() * p.T * g
    if any(not x.is_integer for x in q):
        raise VerificationError(
            "The adjoint of p is not integral; the equivalence data is rejected"
        )
    return tuple(tuple(int(q[i, j]) for j in range(q.cols)) for i in range(q.rows))


def _saturated_image(q: Matrix, rows: int, cols: int) -> Matrix:
    # columns of q span the image; its saturation is the kernel of the kernel of q^T
    complement = kernel_basis(transpose(q, cols), rows)
    return kernel_basis(complement, rows)


def verify_equivalence_data(data: EquivalenceData) -> VerificationReport:
    """Run the adjointness, composition, scaling and vanishing checks.

    Returns:
        A report listing every check; failures name the offending basis pairs.

    Raises:
        VerificationError: If the adjoint of p is not integral.
    """
    lam, lam_p = data.lattice, data.lattice_prime
    n, n_p = lam.rank, lam_p.rank
    p = data.p_map
    q = derive_q_map(data)
    report = VerificationReport(q_map=q)

    offenders: list[str] = []
    gp = mat_mul(data.lattice.gram, p)
    qt_g = mat_mul(transpose(q, n), lam_p.gram)
    for i in range(n):
        for j in range(n_p):
            if qt_g[i][j] != gp[i][j]:
                _mismatch(offenders, i, j, qt_g[i][j], gp[i][j])
    report.add("q is adjoint to p", offenders)

    offenders = []
    pq = mat_mul(p, q)
    total = sum_over_group(data.group)
    for i in range(n):
        for j in range(n):
            if pq[i][j] != total[i][j]:
                _mismatch(offenders, i, j, pq[i][j], total[i][j])
    report.add("p q equals the sum over G", offenders)

    order = data.group_order
    inv = invariant_sublattice(data.group).basis
    qcols = [mat_vec(q, x) for x in inv]
    offenders = []
    for i, j in itertools.combinations_with_replacement(range(len(inv)), 2):
        lhs = pair(lam_p, qcols[i], qcols[j])
        rhs = order * pair(lam, inv[i], inv[j])
        if lhs != rhs:
            _mismatch(offenders, i, j, lhs, rhs)
    report.add("q scales the form by |G| on the invariant lattice", offenders)

    image = _saturated_image(q, n_p, n)
    report.saturated_image = image
    pimg = [mat_vec(p, x) for x in image]
    offenders = []
    for i, j in itertools.combinations_with_replacement(range(len(image)), 2):
        lhs = pair(lam, pimg[i], pimg[j])
        rhs = order * pair(lam_p, image[i], image[j])
        if lhs != rhs:
            _mismatch(offenders, i, j, lhs, rhs)
    report.add("p scales the form by |G| on the saturated image of q", offenders)

    image_perp = orthogonal_complement(lam_p, Sublattice(lam_p, image)).basis
    offenders = [f"basis vector {i}" for i, x in enumerate(image_perp) if any(mat_vec(p, x))]
    report.add("p vanishes on the complement of the image of q", offenders)

    inv_perp = orthogonal_complement(lam, Sublattice(lam, inv)).basis
    offenders = [f"basis vector {i}" for i, x in enumerate(inv_perp) if any(mat_vec(q, x))]
    report.add("q vanishes on the complement of the invariant lattice", offenders)

    offenders = []
    for k, gen in enumerate(data.dual_generators):
        if not verify_isometry(gen):
            offenders.append(f"dual generator {k} is not an isometry")
        elif mat_mul(p, gen.matrix) != p:
            offenders.append(f"p Q != p for dual generator {k}")
    report.add("dual generators are isometries commuting with p", offenders)

    if data.q_hint is not None:
        same = tuple(map(tuple, data.q_hint)) == q
        report.add("declared q matches the adjoint of p", [] if same else ["matrices differ"])

    logger.debug(
        "Verified %s: %d checks, %d failed",
        data.label or "equivalence data",
        len(report.checks),
        len(report.failures),
    )
    return report


def _fiber_support(data: EquivalenceData, v: Vector) -> tuple[Vector, ...]:
    problem = FiberProblem(
        source=data.lattice_prime, map=data.p_map, target=v, min_square=SUPPORT_MIN_SQUARE
    )
    return enumerate_fiber(problem).vectors


def _require_invariant(data: EquivalenceData, v: Sequence[int], what: str) -> None:
    if len(v) != data.lattice.rank:
        raise ValidationError(
            f"{what} {tuple(v)} has the wrong length for {data.lattice.describe()}"
        )
    if not is_invariant(data.group, v):
        raise ValidationError(f"{what} {tuple(v)} is not G-invariant")


def compute_Rv(  # noqa: N802
    data: EquivalenceData,
    v: Sequence[int],
    decompositions: Iterable[Sequence[Sequence[int]]] = (),
) -> tuple[Vector, ...]:
    """Semistable support over v: fiber vectors of square >= -2 and sums over decompositions.

    Args:
        data: Equivalence data.
        v: Invariant Mukai vector on the surface carrying G.
        decompositions: Declared decompositions v = u_1 + ... + u_k; for each,
            every sum w_1 + ... + w_k with w_j in the support over u_j is added.

    Returns:
        Sorted, deduplicated vectors of `lattice_prime`.

    Raises:
        ValidationError: If v or a part is not invariant, or a decomposition
            does not sum to v.
        EnumerationError: If a fiber kernel is not negative definite.
    """
    target = tuple(v)
    _require_invariant(data, target, "Vector")
    support = set(_fiber_support(data, target))
    part_supports: dict[Vector, tuple[Vector, ...]] = {}
    for parts in decompositions:
        parts = [tuple(u) for u in parts]
        if len(parts) < 2:
            raise ValidationError("A decomposition needs at least two parts")
        total = tuple(sum(col) for col in zip(*parts, strict=True))
        if total != target:
            raise ValidationError(f"Parts {parts} sum to {total}, not {target}")
        for u in parts:
            _require_invariant(data, u, "Part")
            if u not in part_supports:
                part_supports[u] = _fiber_support(data, u)
        for combo in itertools.product(*(part_supports[u] for u in parts)):
            support.add(tuple(sum(col) for col in zip(*combo, strict=True)))
    logger.debug("Support over %s has %d vectors", target, len(support))
    return tuple(sorted(support))


def dual_orbits(
    vectors: Iterable[Sequence[int]], dual_generators: Sequence[Isometry]
) -> list[tuple[Vector, tuple[Vector, ...]]]:
    """Partition a finite vector set into orbits of the group the generators span.

    Returns:
        (representative, orbit) pairs sorted by representative; the
        representative is the lexicographically smallest member.

    Raises:
        GroupActionError: If a generator moves a vector out of the set.
    """
    pool = {tuple(v) for v in vectors}
    for gen in dual_generators:
        for v in pool:
            if gen.apply(v) not in pool:
                raise GroupActionError(f"Dual generator maps {v} outside the vector set")
    seen: set[Vector] = set()
    orbits = []
    for start in sorted(pool):
        if start in seen:
            continue
        orbit = {start}
        queue = deque([start])
        while queue:
            w = queue.popleft()
            for gen in dual_generators:
                image = gen.apply(w)
                if image not in orbit:
                    orbit.add(image)
                    queue.append(image)
        seen |= orbit
        members = tuple(sorted(orbit))
        orbits.append((members[0], members))
    return orbits


def decomposition_census(
    lattice: Lattice,
    v: Sequence[int],
    part_sets: Sequence[Sequence[Sequence[int]]],
) -> dict[tuple[int, ...], int]:
    """Count the ways v is a sum of distinct members, one from each part set.

    Part sets that are the same object are treated as interchangeable, so a
    two-part census counts unordered pairs {w1, w2} with w1 != w2. The key is
    the tuple of part squares in descending order.
    """
    if not part_sets:
        return {}
    target = tuple(v)
    sets = [tuple(tuple(w) for w in s) for s in part_sets]
    if any(not s for s in sets):
        return {}
    last = set(sets[-1])
    groups = [sets.index(s) for s in sets]
    seen: set[tuple] = set()
    census: dict[tuple[int, ...], int] = {}
    for head in itertools.product(*sets[:-1]):
        sums = [sum(col) for col in zip(*head, strict=True)]
        rest = tuple(t - s for t, s in zip(target, sums, strict=True))
        if rest not in last:
            continue
        combo = head + (rest,)
        if len(set(combo)) == 1:
            continue
        key = tuple(
            tuple(sorted(w for w, grp in zip(combo, groups, strict=True) if grp == g))
            for g in sorted(set(groups))
        )
        if key in seen:
            continue
        seen.add(key)
        signature = tuple(sorted((int(square(lattice, w)) for w in combo), reverse=True))
        census[signature] = census.get(signature, 0) + 1
    return dict(sorted(census.items(), reverse=True))


def sym_power(v: Sequence[int], parts: Iterable[Sequence[int]]) -> tuple[int, Vector] | None:
    """(m, w) when v = m w with m >= 2 and w among the given parts."""
    g = math.gcd(*v)
    pool = {tuple(w) for w in parts}
    for m in range(2, g + 1):
        if g % m == 0:
            w = tuple(x // m for x in v)
            if w in pool:
                return m, w
    return None


def _ns_sublattice(lattice: Lattice) -> Sublattice:
    if lattice.ns is None:
        raise ValidationError("Divisibility mode 'ns' needs a Mukai lattice")
    n = lattice.rank
    return Sublattice(lattice, tuple(lattice.basis_vector(i) for i in range(1, n - 1)))


def _divisibility(data: EquivalenceData, v: Vector, ns: Sublattice | None) -> int:
    """Gcd of pairings with the NS part when given, else with all of the target lattice.

    Problem files select the NS part for the genus-2 tally: over the whole Mukai
    lattice the pairing with the U summand is counted too, and class (ii) of
    the (0, 2H, 0) profile then has 48 divisibility-one vectors instead of 32.
    """
    if ns is not None:
        try:
            return divisibility(data.lattice_prime, v, against=ns)
        except LatticeError:
            logger.debug("%s is orthogonal to the NS part; using full divisibility", v)
    return divisibility(data.lattice_prime, v)


_ROMAN = ("i", "ii", "iii", "iv", "v", "vi", "vii", "viii", "ix", "x", "xi", "xii")


def _label(k: int) -> str:
    return f"({_ROMAN[k]})" if k < len(_ROMAN) else f"({k + 1})"


def _profile(records: Sequence[ComponentRecord]) -> list[ProfileClass]:
    classes: dict[tuple, list[ComponentRecord]] = {}
    for r in records:
        classes.setdefault(r.class_key, []).append(r)

    def order(key: tuple) -> tuple:
        sq, census, has_sym = key
        return (-sq, has_sym, -sum(c for _, c in census), census)

    profile = []
    for k, key in enumerate(sorted(classes, key=order)):
        members = classes[key]
        sq, census, has_sym = key
        profile.append(
            ProfileClass(
                label=_label(k),
                square=sq,
                dimension=sq + 2,
                census=census,
                sym_power=has_sym,
                count=len(members),
                divisibility_one=sum(1 for r in members if r.divisibility == 1),
                stability=members[0].stability,
            )
        )
    return profile


def fixed_locus_report(
    data: EquivalenceData,
    v: Sequence[int],
    decompositions: Sequence[Sequence[Sequence[int]]] | None = None,
    verify: bool = True,
) -> FixedLocusReport:
    """Classify the components of the fixed locus over v.

    Args:
        data: Equivalence data.
        v: Invariant Mukai vector.
        decompositions: Decompositions of v; defaults to those declared in the data.
        verify: Run verify_equivalence_data first.

    Returns:
        The report, with records ordered by descending square then representative.

    Raises:
        VerificationError: If verification is requested and fails.
    """
    target = tuple(v)
    if verify:
        check = verify_equivalence_data(data)
        if not check.passed:
            names = ", ".join(c.name for c in check.failures)
            raise VerificationError(f"Equivalence data failed verification: {names}")
    if decompositions is None:
        decompositions = data.declared_for(target)
    decomps = [tuple(tuple(u) for u in d) for d in decompositions]
    support = compute_Rv(data, target, decomps)
    orbits = dual_orbits(support, data.dual_generators)

    part_cache: dict[Vector, tuple[Vector, ...]] = {}
    census_inputs = []
    for parts in decomps:
        for u in parts:
            if u not in part_cache:
                part_cache[u] = _fiber_support(data, u)
        census_inputs.append([part_cache[u] for u in parts])
    all_parts = {w for s in part_cache.values() for w in s}

    ns = _ns_sublattice(data.lattice_prime) if data.divisibility_mode == "ns" else None
    records = []
    for rep, orbit in orbits:
        census: dict[tuple[int, ...], int] = {}
        for sets in census_inputs:
            for key, count in decomposition_census(data.lattice_prime, rep, sets).items():
                census[key] = census.get(key, 0) + count
        sq = int(square(data.lattice_prime, rep))
        records.append(
            ComponentRecord(
                representative=rep,
                orbit_size=len(orbit),
                square=sq,
                dimension=sq + 2,
                divisibility=_divisibility(data, rep, ns),
                census=tuple(sorted(census.items(), reverse=True)),
                sym_power=sym_power(rep, all_parts),
            )
        )
    records.sort(key=lambda r: (-r.square, r.representative))

    dual_order = (
        generate_group(data.dual_generators).order if data.dual_generators else 1
    )
    report = FixedLocusReport(
        vector=target,
        records=records,
        profile=_profile(records),
        notes=_notes(data, records, dual_order),
        support_size=len(support),
        group_order=data.group_order,
        dual_order=dual_order,
    )
    report.summary = _summary(report)
    logger.info(
        "Fixed locus over %s: %d components from %d vectors", target, len(records), len(support)
    )
    return report


def _notes(data: EquivalenceData, records: Sequence[ComponentRecord], dual_order: int) -> list[str]:
    notes = []
    if any(r.stability == SEMISTABLE for r in records):
        notes.append(
            "Components marked 'contains strictly semistable points' have square below -2, "
            "a nonempty decomposition census or a symmetric-power stratum"
        )
    if data.cyclic:
        notes.append("H^2(G, C*) = 0, so every G-invariant stable object is G-linearizable")
    else:
        notes.append(
            "H^2(G, C*) may be nonzero: invariant objects need not be linearizable, "
            "and components may be missing from this count"
        )
    if not data.brauer_trivial:
        notes.append("The quotient side carries a nontrivial Brauer class")
    sizes = sorted({r.orbit_size for r in records})
    if sizes and sizes != [dual_order]:
        notes.append(
            f"Orbit sizes {sizes} differ from the dual group order {dual_order}: "
            "the dual group does not act freely on the support"
        )
    return notes


def _summary(report: FixedLocusReport) -> dict[str, object]:
    stability: dict[str, int] = {}
    for r in report.records:
        stability[r.stability] = stability.get(r.stability, 0) + 1
    orbit_sizes: dict[int, int] = {}
    for r in report.records:
        orbit_sizes[r.orbit_size] = orbit_sizes.get(r.orbit_size, 0) + 1
    n = report.dual_order
    return {
        "components": len(report.records),
        "stability": dict(sorted(stability.items())),
        "divisibility_one": {c.label: c.divisibility_one for c in report.profile},
        "orbit_sizes": dict(sorted(orbit_sizes.items())),
        "linearizations": {
            "symmetric_square": math.comb(n + 1, 2),
            "distinct_pair": n * n,
        },
    }
