"""Finite isometry groups, invariant sublattices and frameshapes."""

import logging
import re
from collections import deque
from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass
from math import lcm

from sympy import Matrix as SympyMatrix
from sympy import Poly, Symbol, cyclotomic_poly, divisors, factorint, prod

from mukai_fixed.config import get_max_group
from mukai_fixed.exceptions import GroupActionError, ValidationError
from mukai_fixed.lattice import (
    Lattice,
    Matrix,
    Sublattice,
    Vector,
    identity_matrix,
    kernel_basis,
    mat_mul,
    mat_vec,
    transpose,
)

logger = logging.getLogger(__name__)

_T = Symbol("t")


@dataclass(frozen=True)
class Isometry:
    """An integral matrix acting on an ambient lattice.

    The matrix acts on column coordinate vectors: its j-th column is the image
    of the j-th basis vector.
    """

    ambient: Lattice
    matrix: Matrix
    label: str = ""

    def __post_init__(self) -> None:
        matrix = tuple(tuple(int(x) for x in row) for row in self.matrix)
        object.__setattr__(self, "matrix", matrix)
        n = self.ambient.rank
        if len(matrix) != n or any(len(row) != n for row in matrix):
            raise GroupActionError(f"Isometry of {self.ambient.describe()} must be {n} x {n}")

    def apply(self, v: Sequence[int]) -> Vector:
        return mat_vec(self.matrix, v)

    def compose(self, other: "Isometry") -> "Isometry":
        """self after other."""
        if other.ambient.gram != self.ambient.gram:
            raise GroupActionError("Cannot compose isometries of different lattices")
        return Isometry(self.ambient, mat_mul(self.matrix, other.matrix))

    def is_identity(self) -> bool:
        return self.matrix == identity_matrix(self.ambient.rank)

    def inverse(self) -> "Isometry":
        """Inverse matrix; must be integral."""
        inv = SympyMatrix(self.matrix).inv()
        if any(not x.is_integer for x in inv):
            raise GroupActionError("Matrix is not invertible over Z")
        rows = tuple(tuple(int(x) for x in inv.row(i)) for i in range(inv.rows))
        return Isometry(self.ambient, rows)

    def power(self, k: int) -> "Isometry":
        """g^k for any integer k."""
        base = self if k >= 0 else self.inverse()
        result = Isometry(self.ambient, identity_matrix(self.ambient.rank))
        for _ in range(abs(k)):
            result = base.compose(result)
        return result

    def conjugate(self, h: "Isometry") -> "Isometry":
        """h g h^-1."""
        return h.compose(self).compose(h.inverse())


@dataclass(frozen=True)
class GroupAction:
    """A finite group of isometries, closed under composition."""

    ambient: Lattice
    generators: tuple[Isometry, ...]
    elements: tuple[Isometry, ...]
    label: str = ""

    @property
    def order(self) -> int:
        return len(self.elements)


@dataclass(frozen=True)
class Frameshape:
    """Formal product of symbols a^m(a); zero multiplicities are dropped."""

    parts: tuple[tuple[int, int], ...]

    def __post_init__(self) -> None:
        merged: dict[int, int] = {}
        for a, m in self.parts:
            if a < 1:
                raise ValidationError(f"Frameshape base must be positive, got {a}")
            merged[a] = merged.get(a, 0) + m
        object.__setattr__(self, "parts", tuple(sorted((a, m) for a, m in merged.items() if m)))

    @classmethod
    def from_mapping(cls, mapping: Mapping[int, int]) -> "Frameshape":
        return cls(tuple(mapping.items()))

    def as_dict(self) -> dict[int, int]:
        return dict(self.parts)

    @property
    def weight(self) -> int:
        """sum a * m(a), the rank of the lattice the frameshape describes."""
        return sum(a * m for a, m in self.parts)

    @property
    def order(self) -> int:
        """Least common multiple of the bases."""
        return lcm(*(a for a, _ in self.parts)) if self.parts else 1

    def characteristic_polynomial(self) -> Poly:
        """prod (t^a - 1)^m(a); a polynomial whenever the frameshape comes from a matrix."""
        num = prod([(_T**a - 1) ** m for a, m in self.parts if m > 0])
        den = prod([(_T**a - 1) ** -m for a, m in self.parts if m < 0])
        q, r = Poly(num, _T).div(Poly(den, _T))
        if not r.is_zero:
            raise GroupActionError(f"Frameshape {self.render()} is not a characteristic polynomial")
        return q

    def render(self) -> str:
        """Canonical text form, e.g. '1^8 2^8'."""
        if not self.parts:
            return "1"
        return " ".join(f"{a}^{m}" for a, m in self.parts)

    def __str__(self) -> str:
        return self.render()


_SYMBOL = re.compile(r"^(\d+)(?:\^\{?(-?\d+)\}?)?$")


def parse_frameshape(text: str) -> Frameshape:
    """Parse text such as '1^8 2^8', '1^-8 2^16' or '1^2.11^2'.

    Raises:
        ValidationError: If a symbol cannot be read.
    """
    tokens = [t for t in re.split(r"[\s.*]+", text.strip()) if t]
    if not tokens:
        raise ValidationError("Empty frameshape")
    parts = []
    for token in tokens:
        match = _SYMBOL.match(token)
        if match is None:
            raise ValidationError(f"Cannot parse frameshape symbol {token!r} in {text!r}")
        parts.append((int(match.group(1)), int(match.group(2) or 1)))
    return Frameshape(tuple(parts))


# Frameshapes of order two symplectic actions on the 24-dimensional Mukai lattice
ORDER_TWO_FRAMESHAPES: tuple[Frameshape, ...] = (
    parse_frameshape("1^8 2^8"),
    parse_frameshape("1^-8 2^16"),
    parse_frameshape("2^12"),
)


def verify_isometry(g: Isometry) -> bool:
    """Check g^T G g == G and |det g| == 1."""
    gram = g.ambient.gram
    mt = transpose(g.matrix, g.ambient.rank)
    if mat_mul(mat_mul(mt, gram), g.matrix) != gram:
        return False
    if g.ambient.rank == 0:
        return True
    return abs(int(SympyMatrix(g.matrix).det())) == 1


def generate_group(
    generators: Sequence[Isometry], max_size: int | None = None, label: str = ""
) -> GroupAction:
    """Close a set of isometries under composition.

    Args:
        generators: Generating isometries of one lattice; at least one is required.
        max_size: Closure cap; defaults to the configured limit.
        label: Name used in reports.

    Returns:
        The generated finite group.

    Raises:
        GroupActionError: If a generator is not an isometry, or the closure
            exceeds the cap.
    """
    if not generators:
        raise GroupActionError("A group needs at least one generator")
    ambient = generators[0].ambient
    for g in generators:
        if g.ambient.gram != ambient.gram:
            raise GroupActionError("Generators act on different lattices")
        if not verify_isometry(g):
            raise GroupActionError(f"Generator {g.label or g.matrix} does not preserve the form")
    cap = max_size if max_size is not None else get_max_group()

    identity = Isometry(ambient, identity_matrix(ambient.rank))
    seen: dict[Matrix, Isometry] = {identity.matrix: identity}
    queue = deque([identity])
    while queue:
        h = queue.popleft()
        for g in generators:
            product = g.compose(h)
            if product.matrix not in seen:
                seen[product.matrix] = product
                if len(seen) > cap:
                    raise GroupActionError(
                        f"Group closure exceeded {cap} elements; the generators "
                        "may not generate a finite group"
                    )
                queue.append(product)
    elements = tuple(sorted(seen.values(), key=lambda e: (not e.is_identity(), e.matrix)))
    logger.debug("Generated group %s of order %d", label or "", len(elements))
    return GroupAction(ambient, tuple(generators), elements, label=label)


def element_order(g: Isometry, cap: int | None = None) -> int:
    """Smallest n >= 1 with g^n = id.

    Raises:
        GroupActionError: If no such n exists below the cap.
    """
    limit = cap if cap is not None else get_max_group()
    h = g
    for n in range(1, limit + 1):
        if h.is_identity():
            return n
        h = g.compose(h)
    raise GroupActionError(f"Element order exceeds {limit}")


def invariant_sublattice(group: GroupAction) -> Sublattice:
    """Saturated sublattice Lambda^G of vectors fixed by every generator."""
    n = group.ambient.rank
    rows: list[tuple[int, ...]] = []
    for g in group.generators:
        for i in range(n):
            rows.append(tuple(g.matrix[i][j] - (1 if i == j else 0) for j in range(n)))
    return Sublattice(group.ambient, kernel_basis(rows, n), saturated=True)


def is_invariant(group: GroupAction | Iterable[Isometry], v: Sequence[int]) -> bool:
    """Whether every generator fixes v."""
    gens = group.generators if isinstance(group, GroupAction) else tuple(group)
    target = tuple(v)
    return all(g.apply(v) == target for g in gens)


def sum_over_group(group: GroupAction) -> Matrix:
    """Matrix of sum_g g."""
    n = group.ambient.rank
    total = [[0] * n for _ in range(n)]
    for g in group.elements:
        for i in range(n):
            for j in range(n):
                total[i][j] += g.matrix[i][j]
    return tuple(map(tuple, total))


def _mobius(n: int) -> int:
    factors = factorint(n)
    if any(e > 1 for e in factors.values()):
        return 0
    return -1 if len(factors) % 2 else 1


def frameshape_of(g: Isometry) -> Frameshape:
    """Frameshape of a finite order isometry, read off its characteristic polynomial.

    The characteristic polynomial factors as prod_d Phi_d(t)^c(d) over the
    divisors d of the order. Since t^a - 1 = prod_{d | a} Phi_d, the
    multiplicities are m(a) = sum_{a | b} mu(b / a) c(b).

    Raises:
        GroupActionError: If g has infinite order or the factorisation fails.
    """
    n = element_order(g)
    if g.ambient.rank == 0:
        return Frameshape(())
    remaining = Poly(SympyMatrix(g.matrix).charpoly(_T).as_expr(), _T)
    cyclotomic: dict[int, int] = {}
    for d in divisors(n):
        phi = Poly(cyclotomic_poly(d, _T), _T)
        count = 0
        while True:
            q, r = remaining.div(phi)
            if not r.is_zero:
                break
            remaining = q
            count += 1
        cyclotomic[d] = count
    if remaining != Poly(1, _T):
        raise GroupActionError(
            f"Characteristic polynomial of an order {n} element is not a product "
            "of cyclotomic factors"
        )
    mult = {}
    for a in divisors(n):
        mult[a] = sum(_mobius(b // a) * cyclotomic[b] for b in divisors(n) if b % a == 0)
    fs = Frameshape.from_mapping(mult)
    logger.debug("Frameshape of order %d element: %s", n, fs)
    return fs
