"""Integral lattices, sublattices and exact integer linear algebra.

Vectors are tuples of ints in the coordinates of a lattice basis. Matrices
are tuples of rows. Everything here is exact: the echelon machinery works
over the integers with unimodular column operations, and sympy is used for
determinants and Smith normal forms.
"""

import math
from collections.abc import Sequence
from dataclasses import dataclass, field
from fractions import Fraction

from sympy import Matrix as SympyMatrix
from sympy.matrices.normalforms import smith_normal_form
from sympy.polys.domains import ZZ

from mukai_fixed.exceptions import LatticeError

Vector = tuple[int, ...]
Matrix = tuple[tuple[int, ...], ...]
Number = int | Fraction


@dataclass(frozen=True)
class Lattice:
    """A free abelian group with an integral symmetric bilinear form.

    Attributes:
        gram: Symmetric Gram matrix in the chosen basis.
        label: Human-readable name used in reports.
        names: Optional names of the basis vectors.
        classes: Extra named vectors, given in this lattice's coordinates.
        ns: For a Mukai lattice, the lattice placed between the two hyperbolic
            coordinates. None otherwise.
    """

    gram: Matrix
    label: str = ""
    names: tuple[str, ...] = ()
    classes: tuple[tuple[str, Vector], ...] = ()
    ns: "Lattice | None" = field(default=None, compare=False)

    def __post_init__(self) -> None:
        gram = tuple(tuple(int(x) for x in row) for row in self.gram)
        object.__setattr__(self, "gram", gram)
        n = len(gram)
        for i, row in enumerate(gram):
            if len(row) != n:
                raise LatticeError(f"Gram matrix row {i} has length {len(row)}, expected {n}")
        for i in range(n):
            for j in range(i + 1, n):
                if gram[i][j] != gram[j][i]:
                    raise LatticeError(f"Gram matrix is not symmetric at ({i}, {j})")
        if self.names and len(self.names) != n:
            raise LatticeError(f"{len(self.names)} basis names given for a rank {n} lattice")
        for name, vec in self.classes:
            if len(vec) != n:
                raise LatticeError(f"Named class {name!r} has {len(vec)} coordinates, expected {n}")

    @property
    def rank(self) -> int:
        """Number of basis vectors."""
        return len(self.gram)

    def basis_vector(self, i: int) -> Vector:
        """Return the i-th standard basis vector."""
        return tuple(1 if j == i else 0 for j in range(self.rank))

    def named(self) -> dict[str, Vector]:
        """Return every named vector: basis names first, then extra classes."""
        result = {name: self.basis_vector(i) for i, name in enumerate(self.names)}
        result.update(dict(self.classes))
        return result

    def describe(self) -> str:
        """Short description for logs and reports."""
        return self.label or f"rank {self.rank} lattice"


@dataclass(frozen=True)
class Sublattice:
    """A sublattice given by linearly independent integral rows in ambient coordinates."""

    ambient: Lattice
    basis: Matrix
    saturated: bool = False

    def __post_init__(self) -> None:
        basis = tuple(tuple(int(x) for x in row) for row in self.basis)
        object.__setattr__(self, "basis", basis)
        for row in basis:
            if len(row) != self.ambient.rank:
                raise LatticeError(
                    f"Sublattice row has {len(row)} coordinates, "
                    f"ambient {self.ambient.describe()} has rank {self.ambient.rank}"
                )
        if basis and SympyMatrix(basis).rank() != len(basis):
            raise LatticeError("Sublattice basis rows are linearly dependent")

    @property
    def rank(self) -> int:
        return len(self.basis)

    def gram(self) -> Matrix:
        """Gram matrix of the induced form on this basis."""
        return tuple(tuple(pair(self.ambient, a, b) for b in self.basis) for a in self.basis)

    def as_lattice(self, label: str = "") -> Lattice:
        """The sublattice as a standalone lattice in its own basis."""
        return Lattice(self.gram(), label=label)

    def coordinates(self, v: Sequence[int]) -> Vector | None:
        """Coordinates of an ambient vector in this basis, or None if v is not in its Z-span."""
        return solve_integral(transpose(self.basis, self.ambient.rank), v, self.rank)

    def contains(self, v: Sequence[int]) -> bool:
        """Check membership over Z."""
        return self.coordinates(v) is not None

    def embed(self, coords: Sequence[int]) -> Vector:
        """Ambient vector with the given coordinates in this basis."""
        return combine(self.basis, coords, self.ambient.rank)


# ---------------------------------------------------------------------------
# Matrix helpers
# ---------------------------------------------------------------------------


def identity_matrix(n: int) -> Matrix:
    """The n x n identity matrix."""
    return tuple(tuple(1 if i == j else 0 for j in range(n)) for i in range(n))


def transpose(rows: Sequence[Sequence[int]], ncols: int) -> Matrix:
    """Transpose a matrix whose column count is given explicitly (rows may be empty)."""
    return tuple(tuple(row[j] for row in rows) for j in range(ncols))


def mat_vec(m: Sequence[Sequence[Number]], v: Sequence[Number]) -> tuple:
    """Matrix times column vector."""
    return tuple(sum((a * b for a, b in zip(row, v, strict=True)), 0) for row in m)


def mat_mul(a: Sequence[Sequence[int]], b: Sequence[Sequence[int]]) -> Matrix:
    """Matrix product a * b."""
    cols = list(zip(*b, strict=True)) if b else []
    return tuple(
        tuple(sum(x * y for x, y in zip(row, col, strict=True)) for col in cols) for row in a
    )


def combine(rows: Sequence[Sequence[int]], coeffs: Sequence[int], n: int) -> Vector:
    """Integer combination sum(coeffs[i] * rows[i]) in dimension n."""
    out = [0] * n
    for c, row in zip(coeffs, rows, strict=True):
        if c:
            for j in range(n):
                out[j] += c * row[j]
    return tuple(out)


# ---------------------------------------------------------------------------
# Forms
# ---------------------------------------------------------------------------


def pair(lattice: Lattice, a: Sequence[Number], b: Sequence[Number]) -> Number:
    """Bilinear form <a, b> = a^T G b.

    Rational coordinates are accepted so that central charges can be paired
    with lattice vectors.
    """
    n = lattice.rank
    if len(a) != n or len(b) != n:
        raise LatticeError(
            f"Cannot pair vectors of length {len(a)} and {len(b)} in {lattice.describe()}"
        )
    total: Number = 0
    for i in range(n):
        ai = a[i]
        if not ai:
            continue
        row = lattice.gram[i]
        total += ai * sum((row[j] * b[j] for j in range(n) if b[j]), 0)
    return total


def square(lattice: Lattice, v: Sequence[Number]) -> Number:
    """<v, v>."""
    return pair(lattice, v, v)


def determinant(lattice: Lattice) -> int:
    """Determinant of the Gram matrix."""
    if lattice.rank == 0:
        return 1
    return int(SympyMatrix(lattice.gram).det())


def rescale(lattice: Lattice, n: int) -> Lattice:
    """Lattice with the form multiplied by n."""
    if n == 0:
        raise LatticeError("Cannot rescale a lattice by 0")
    label = f"{lattice.label}({n})" if lattice.label else ""
    return Lattice(
        tuple(tuple(n * x for x in row) for row in lattice.gram),
        label=label,
        names=lattice.names,
        classes=lattice.classes,
    )


def direct_sum(*parts: Lattice, label: str = "") -> Lattice:
    """Orthogonal direct sum, with basis names concatenated when every part has them."""
    n = sum(p.rank for p in parts)
    gram = [[0] * n for _ in range(n)]
    offset = 0
    names: list[str] = []
    for p in parts:
        for i in range(p.rank):
            for j in range(p.rank):
                gram[offset + i][offset + j] = p.gram[i][j]
        names.extend(p.names)
        offset += p.rank
    if len(names) != n:
        names = []
    if not label:
        label = " + ".join(p.label for p in parts if p.label)
    return Lattice(tuple(map(tuple, gram)), label=label, names=tuple(names))


def mukai_lattice(ns: Lattice, label: str = "") -> Lattice:
    """Extended Mukai lattice U + NS in coordinates (r, D, s).

    The pairing is <(r, D, s), (r', D', s')> = D.D' - r s' - r' s.

    Raises:
        LatticeError: If the middle lattice is degenerate.
    """
    if determinant(ns) == 0:
        raise LatticeError(f"Degenerate lattice {ns.describe()} cannot be extended")
    n = ns.rank + 2
    gram = [[0] * n for _ in range(n)]
    gram[0][n - 1] = -1
    gram[n - 1][0] = -1
    for i in range(ns.rank):
        for j in range(ns.rank):
            gram[i + 1][j + 1] = ns.gram[i][j]
    if not label:
        label = f"U + {ns.label}" if ns.label else ""
    return Lattice(tuple(map(tuple, gram)), label=label, ns=ns)


# ---------------------------------------------------------------------------
# Standard lattices
# ---------------------------------------------------------------------------

_E8_EDGES = ((0, 2), (1, 3), (2, 3), (3, 4), (4, 5), (5, 6), (6, 7))


def hyperbolic_plane() -> Lattice:
    """U, with Gram matrix [[0, 1], [1, 0]]."""
    return Lattice(((0, 1), (1, 0)), label="U")


def e8(scale: int = 1) -> Lattice:
    """The E8 root lattice (positive definite Cartan matrix), optionally rescaled."""
    gram = [[2 if i == j else 0 for j in range(8)] for i in range(8)]
    for i, j in _E8_EDGES:
        gram[i][j] = gram[j][i] = -1
    base = Lattice(tuple(map(tuple, gram)), label="E8")
    return base if scale == 1 else rescale(base, scale)


def a1(scale: int = 1) -> Lattice:
    """Rank one lattice <2>, optionally rescaled."""
    return Lattice(((2 * scale,),), label="A1" if scale == 1 else f"A1({scale})")


def diagonal(*entries: int, label: str = "") -> Lattice:
    """Lattice with a diagonal Gram matrix."""
    n = len(entries)
    gram = tuple(tuple(entries[i] if i == j else 0 for j in range(n)) for i in range(n))
    return Lattice(gram, label=label or "<" + ", ".join(str(e) for e in entries) + ">")


# ---------------------------------------------------------------------------
# Integer echelon machinery
# ---------------------------------------------------------------------------


def _extended_gcd(a: int, b: int) -> tuple[int, int, int]:
    """Return (g, x, y) with a*x + b*y = g = gcd(a, b) >= 0."""
    old_r, r = a, b
    old_x, x = 1, 0
    old_y, y = 0, 1
    while r:
        q = old_r // r
        old_r, r = r, old_r - q * r
        old_x, x = x, old_x - q * x
        old_y, y = y, old_y - q * y
    if old_r < 0:
        return -old_r, -old_x, -old_y
    return old_r, old_x, old_y


def _mix_columns(m: list[list[int]], p: int, q: int, a: int, b: int, c: int, d: int) -> None:
    # col_p <- a col_p + b col_q ; col_q <- c col_p + d col_q
    for row in m:
        vp, vq = row[p], row[q]
        row[p] = a * vp + b * vq
        row[q] = c * vp + d * vq


def _column_echelon(
    rows: Sequence[Sequence[int]], ncols: int
) -> tuple[list[list[int]], list[list[int]], list[int]]:
    """Reduce A by unimodular column operations to lower echelon form H = A U.

    Returns:
        (H, U, pivot_rows): pivot k of H sits in row pivot_rows[k] and column k,
        and is positive. Columns of U from len(pivot_rows) on span ker A.
    """
    h = [list(r) for r in rows]
    u = [list(r) for r in identity_matrix(ncols)]
    pivots: list[int] = []
    col = 0
    for i in range(len(h)):
        if col == ncols:
            break
        for j in range(col + 1, ncols):
            bj = h[i][j]
            if bj == 0:
                continue
            aj = h[i][col]
            g, x, y = _extended_gcd(aj, bj)
            coeffs = (x, y, -bj // g, aj // g)
            _mix_columns(h, col, j, *coeffs)
            _mix_columns(u, col, j, *coeffs)
        if h[i][col] != 0:
            if h[i][col] < 0:
                for m in (h, u):
                    for row in m:
                        row[col] = -row[col]
            pivots.append(i)
            col += 1
    return h, u, pivots


def kernel_basis(rows: Sequence[Sequence[int]], ncols: int) -> Matrix:
    """Basis of {x in Z^ncols : A x = 0}, returned as rows.

    The kernel of an integer matrix is automatically saturated in Z^ncols.
    """
    _, u, pivots = _column_echelon(rows, ncols)
    return tuple(tuple(u[r][c] for r in range(ncols)) for c in range(len(pivots), ncols))


def integer_rank(rows: Sequence[Sequence[int]], ncols: int) -> int:
    """Rank of an integer matrix."""
    return len(_column_echelon(rows, ncols)[2])


def solve_integral(
    rows: Sequence[Sequence[int]], rhs: Sequence[int], ncols: int
) -> Vector | None:
    """Find one integer x with A x = rhs, or None if there is none.

    Args:
        rows: The matrix A as rows; may be empty.
        rhs: Right-hand side, one entry per row of A.
        ncols: Number of unknowns.

    Returns:
        A particular solution, or None when the system has no integral solution.
    """
    if len(rhs) != len(rows):
        raise LatticeError(f"Right-hand side has {len(rhs)} entries for {len(rows)} equations")
    if not rows:
        return tuple([0] * ncols)
    h, u, pivots = _column_echelon(rows, ncols)
    y = [0] * ncols
    for k, i in enumerate(pivots):
        rest = rhs[i] - sum(h[i][col] * y[col] for col in range(k))
        if rest % h[i][k]:
            return None
        y[k] = rest // h[i][k]
    for i, row in enumerate(h):
        if sum(row[col] * y[col] for col in range(len(pivots))) != rhs[i]:
            return None
    return tuple(sum(u[r][c] * y[c] for c in range(ncols)) for r in range(ncols))


def solve_rational(rows: Sequence[Sequence[Number]], rhs: Sequence[Number]) -> tuple[Fraction, ...]:
    """Solve a square nonsingular rational system exactly."""
    n = len(rows)
    a = [[Fraction(x) for x in row] + [Fraction(rhs[i])] for i, row in enumerate(rows)]
    for c in range(n):
        piv = next((r for r in range(c, n) if a[r][c] != 0), None)
        if piv is None:
            raise LatticeError("Singular system")
        a[c], a[piv] = a[piv], a[c]
        for r in range(n):
            if r != c and a[r][c] != 0:
                f = a[r][c] / a[c][c]
                a[r] = [x - f * y for x, y in zip(a[r], a[c], strict=True)]
    return tuple(a[i][n] / a[i][i] for i in range(n))


# ---------------------------------------------------------------------------
# Sublattice operations
# ---------------------------------------------------------------------------


def _require_same_ambient(lattice: Lattice, sub: Sublattice) -> None:
    if sub.ambient.gram != lattice.gram:
        raise LatticeError(
            f"Sublattice lives in {sub.ambient.describe()}, not in {lattice.describe()}"
        )


def saturate(sub: Sublattice) -> Sublattice:
    """(S tensor Q) intersected with the ambient lattice."""
    n = sub.ambient.rank
    if sub.rank == 0:
        return Sublattice(sub.ambient, (), saturated=True)
    complement = kernel_basis(sub.basis, n)
    return Sublattice(sub.ambient, kernel_basis(complement, n), saturated=True)


def saturation_index(sub: Sublattice) -> int:
    """Index [sat(S) : S], read off the Smith normal form of S in a basis of sat(S)."""
    if sub.rank == 0:
        return 1
    sat = saturate(sub)
    coords = []
    for row in sub.basis:
        c = sat.coordinates(row)
        if c is None:
            raise LatticeError("Sublattice is not contained in its saturation")
        coords.append(c)
    snf = smith_normal_form(SympyMatrix(coords), domain=ZZ)
    index = 1
    for i in range(sub.rank):
        index *= int(snf[i, i])
    return abs(index)


def orthogonal_complement(lattice: Lattice, sub: Sublattice) -> Sublattice:
    """Saturated sublattice {x : <x, s> = 0 for every s in S}."""
    _require_same_ambient(lattice, sub)
    functionals = mat_mul(sub.basis, lattice.gram) if sub.basis else ()
    return Sublattice(lattice, kernel_basis(functionals, lattice.rank), saturated=True)


def is_primitive(v: Sequence[int]) -> bool:
    """Whether v is not a proper multiple of another lattice vector.

    Raises:
        LatticeError: For the zero vector.
    """
    g = math.gcd(*v)
    if g == 0:
        raise LatticeError("The zero vector has no primitivity")
    return g == 1


def divisibility(lattice: Lattice, v: Sequence[int], against: Sublattice | None = None) -> int:
    """Positive generator of <v, lattice>, or of <v, against> when a sublattice is given.

    Raises:
        LatticeError: If v pairs to zero with everything it is tested against.
    """
    basis = against.basis if against is not None else identity_matrix(lattice.rank)
    if against is not None:
        _require_same_ambient(lattice, against)
    g = math.gcd(*(pair(lattice, v, b) for b in basis)) if basis else 0
    if g == 0:
        raise LatticeError(f"Vector {tuple(v)} pairs to zero with the whole test lattice")
    return int(g)
