"""Exact linear algebra over the rationals.

Everything downstream (bases of graded pieces, differentials, induced maps
on cohomology) reduces to row reduction of matrices with Fraction entries,
so determinism here makes the whole package reproducible: pivots are always
the leftmost nonzero columns, kernel vectors are listed by ascending free
column, and quotient sections pick standard basis vectors at the non-pivot
coordinates of the echelonized subspace.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

from .errors import ValidationError

Q = Fraction

# Dense storage is the default; matrix products fall back to a dict-based
# kernel once operands are large and mostly zero.
SPARSE_SIZE = 64
SPARSE_DENSITY = Fraction(1, 8)


def as_q(x) -> Fraction:
    """Coerce ints, strings like '3/2', and Fractions to Fraction."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x)
    raise ValidationError(f"not an exact rational: {x!r}")


def vec(entries: Iterable) -> tuple[Fraction, ...]:
    return tuple(as_q(x) for x in entries)


def zero_vec(n: int) -> tuple[Fraction, ...]:
    return (Q(0),) * n


def unit_vec(n: int, i: int) -> tuple[Fraction, ...]:
    return tuple(Q(1) if j == i else Q(0) for j in range(n))


def add_vec(u: Sequence[Fraction], v: Sequence[Fraction]) -> tuple[Fraction, ...]:
    return tuple(a + b for a, b in zip(u, v, strict=True))


def scale_vec(c: Fraction, v: Sequence[Fraction]) -> tuple[Fraction, ...]:
    return tuple(c * a for a in v)


class RatMatrix:
    """Immutable dense matrix of Fractions, rows x cols, supporting 0-sized shapes."""

    __slots__ = ("rows", "cols", "data", "_rref")

    def __init__(self, rows: int, cols: int, data: Iterable[Iterable] | None = None):
        if rows < 0 or cols < 0:
            raise ValidationError("matrix shape must be non-negative")
        self.rows = rows
        self.cols = cols
        if data is None:
            self.data = tuple((Q(0),) * cols for _ in range(rows))
        else:
            self.data = tuple(tuple(as_q(x) for x in row) for row in data)
            if len(self.data) != rows or any(len(r) != cols for r in self.data):
                raise ValidationError("matrix data does not match declared shape")
        self._rref = None

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence]) -> "RatMatrix":
        r = len(rows)
        c = len(rows[0]) if r else 0
        return cls(r, c, rows)

    @classmethod
    def from_cols(cls, cols: Sequence[Sequence], nrows: int | None = None) -> "RatMatrix":
        if not cols:
            return cls(nrows or 0, 0)
        n = len(cols[0])
        return cls(n, len(cols), [[col[i] for col in cols] for i in range(n)])

    @classmethod
    def zero(cls, rows: int, cols: int) -> "RatMatrix":
        return cls(rows, cols)

    @classmethod
    def identity(cls, n: int) -> "RatMatrix":
        return cls(n, n, [[Q(1) if i == j else Q(0) for j in range(n)] for i in range(n)])

    def __getitem__(self, ij) -> Fraction:
        i, j = ij
        return self.data[i][j]

    def row(self, i: int) -> tuple[Fraction, ...]:
        return self.data[i]

    def col(self, j: int) -> tuple[Fraction, ...]:
        return tuple(self.data[i][j] for i in range(self.rows))

    def columns(self) -> list[tuple[Fraction, ...]]:
        return [self.col(j) for j in range(self.cols)]

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, RatMatrix)
            and self.rows == other.rows
            and self.cols == other.cols
            and self.data == other.data
        )

    def __hash__(self):
        return hash((self.rows, self.cols, self.data))

    def __repr__(self) -> str:
        body = "; ".join(" ".join(str(x) for x in row) for row in self.data)
        return f"RatMatrix({self.rows}x{self.cols}: {body})"

    def is_zero(self) -> bool:
        return all(x == 0 for row in self.data for x in row)

    def __add__(self, other: "RatMatrix") -> "RatMatrix":
        self._check_same_shape(other)
        return RatMatrix(
            self.rows,
            self.cols,
            [[a + b for a, b in zip(r1, r2)] for r1, r2 in zip(self.data, other.data)],
        )

    def __sub__(self, other: "RatMatrix") -> "RatMatrix":
        self._check_same_shape(other)
        return RatMatrix(
            self.rows,
            self.cols,
            [[a - b for a, b in zip(r1, r2)] for r1, r2 in zip(self.data, other.data)],
        )

    def __neg__(self) -> "RatMatrix":
        return self.scale(Q(-1))

    def scale(self, c) -> "RatMatrix":
        c = as_q(c)
        return RatMatrix(self.rows, self.cols, [[c * x for x in row] for row in self.data])

    def _check_same_shape(self, other: "RatMatrix") -> None:
        if self.rows != other.rows or self.cols != other.cols:
            raise ValidationError(
                f"shape mismatch: {self.rows}x{self.cols} vs {other.rows}x{other.cols}"
            )

    def __mul__(self, other: "RatMatrix") -> "RatMatrix":
        """Matrix product; uses a sparse kernel for large mostly-zero operands."""
        if not isinstance(other, RatMatrix):
            return NotImplemented
        if self.cols != other.rows:
            raise ValidationError(
                f"cannot multiply {self.rows}x{self.cols} by {other.rows}x{other.cols}"
            )
        if max(self.rows, self.cols, other.cols) >= SPARSE_SIZE and self._density() <= SPARSE_DENSITY:
            return self._sparse_mul(other)
        if not self.data or not other.data or other.cols == 0:
            return RatMatrix.zero(self.rows, other.cols)
        out = [
            [sum((a * b for a, b in zip(row, col)), Q(0)) for col in zip(*other.data)]
            for row in self.data
        ]
        return RatMatrix(self.rows, other.cols, out)

    def _density(self) -> Fraction:
        total = self.rows * self.cols
        if total == 0:
            return Q(0)
        nz = sum(1 for row in self.data for x in row if x != 0)
        return Fraction(nz, total)

    def _sparse_mul(self, other: "RatMatrix") -> "RatMatrix":
        out = [[Q(0)] * other.cols for _ in range(self.rows)]
        for i, row in enumerate(self.data):
            for k, a in enumerate(row):
                if a == 0:
                    continue
                orow = other.data[k]
                oi = out[i]
                for j, b in enumerate(orow):
                    if b != 0:
                        oi[j] += a * b
        return RatMatrix(self.rows, other.cols, out)

    def apply(self, v: Sequence[Fraction]) -> tuple[Fraction, ...]:
        if len(v) != self.cols:
            raise ValidationError("vector length does not match column count")
        return tuple(sum((a * b for a, b in zip(row, v)), Q(0)) for row in self.data)

    def transpose(self) -> "RatMatrix":
        return RatMatrix(
            self.cols,
            self.rows,
            [[self.data[j][i] for j in range(self.rows)] for i in range(self.cols)],
        )

    def hstack(self, other: "RatMatrix") -> "RatMatrix":
        if self.rows != other.rows:
            raise ValidationError("hstack needs equal row counts")
        return RatMatrix(
            self.rows,
            self.cols + other.cols,
            [r1 + r2 for r1, r2 in zip(self.data, other.data)],
        )

    def vstack(self, other: "RatMatrix") -> "RatMatrix":
        if self.cols != other.cols:
            raise ValidationError("vstack needs equal column counts")
        return RatMatrix(self.rows + other.rows, self.cols, self.data + other.data)

    @classmethod
    def block(cls, grid: Sequence[Sequence["RatMatrix"]]) -> "RatMatrix":
        rows = None
        for row in grid:
            stacked = row[0]
            for m in row[1:]:
                stacked = stacked.hstack(m)
            rows = stacked if rows is None else rows.vstack(stacked)
        return rows if rows is not None else cls.zero(0, 0)

    def to_lists(self) -> list[list[Fraction]]:
        return [list(row) for row in self.data]

    # --- echelon machinery ---

    def rref(self) -> tuple["RatMatrix", tuple[int, ...], "RatMatrix"]:
        """Reduced row echelon form.

        Returns (R, pivots, T) with T * self == R, T invertible, pivot columns
        strictly increasing and chosen leftmost-first.
        """
        if self._rref is not None:
            return self._rref
        work = [list(row) for row in self.data]
        trans = [[Q(1) if i == j else Q(0) for j in range(self.rows)] for i in range(self.rows)]
        pivots: list[int] = []
        r = 0
        for c in range(self.cols):
            pivot_row = None
            for i in range(r, self.rows):
                if work[i][c] != 0:
                    pivot_row = i
                    break
            if pivot_row is None:
                continue
            work[r], work[pivot_row] = work[pivot_row], work[r]
            trans[r], trans[pivot_row] = trans[pivot_row], trans[r]
            inv = Q(1) / work[r][c]
            work[r] = [inv * x for x in work[r]]
            trans[r] = [inv * x for x in trans[r]]
            for i in range(self.rows):
                if i != r and work[i][c] != 0:
                    f = work[i][c]
                    work[i] = [a - f * b for a, b in zip(work[i], work[r])]
                    trans[i] = [a - f * b for a, b in zip(trans[i], trans[r])]
            pivots.append(c)
            r += 1
            if r == self.rows:
                break
        result = (
            RatMatrix(self.rows, self.cols, work),
            tuple(pivots),
            RatMatrix(self.rows, self.rows, trans),
        )
        self._rref = result
        return result

    def rank(self) -> int:
        return len(self.rref()[1])

    def kernel_basis(self) -> list[tuple[Fraction, ...]]:
        """Basis of the right kernel, one vector per free column, ascending."""
        reduced, pivots, _ = self.rref()
        pivot_set = set(pivots)
        basis = []
        for free in range(self.cols):
            if free in pivot_set:
                continue
            v = [Q(0)] * self.cols
            v[free] = Q(1)
            for r, p in enumerate(pivots):
                v[p] = -reduced.data[r][free]
            basis.append(tuple(v))
        return basis

    def solve(self, b: Sequence[Fraction]) -> tuple[Fraction, ...] | None:
        """A particular solution of self * x = b (free variables 0), or None."""
        if len(b) != self.rows:
            raise ValidationError("rhs length does not match row count")
        reduced, pivots, trans = self.rref()
        tb = trans.apply(vec(b))
        x = [Q(0)] * self.cols
        for r, p in enumerate(pivots):
            x[p] = tb[r]
        for r in range(len(pivots), self.rows):
            if tb[r] != 0:
                return None
        # rows within rank satisfy the system by construction of rref
        return tuple(x)

    def column_span_matrix(self) -> "RatMatrix":
        """Matrix whose columns are a deterministic basis of the column space."""
        cols = independent_subset(self.columns())
        return RatMatrix.from_cols(cols, nrows=self.rows)


def kron(a: "RatMatrix", b: "RatMatrix") -> "RatMatrix":
    """Kronecker product; row/column blocks are a-major."""
    out = [[Q(0)] * (a.cols * b.cols) for _ in range(a.rows * b.rows)]
    for i1 in range(a.rows):
        for j1 in range(a.cols):
            c = a.data[i1][j1]
            if not c:
                continue
            for i2 in range(b.rows):
                row = out[i1 * b.rows + i2]
                brow = b.data[i2]
                for j2 in range(b.cols):
                    if brow[j2]:
                        row[j1 * b.cols + j2] = c * brow[j2]
    return RatMatrix(a.rows * b.rows, a.cols * b.cols, out)


def independent_subset(vectors: Sequence[Sequence[Fraction]]) -> list[tuple[Fraction, ...]]:
    """Greedy maximal independent subset, keeping first occurrences."""
    chosen: list[tuple[Fraction, ...]] = []
    pivot_rows: dict[int, list[Fraction]] = {}
    for v in vectors:
        w = list(v)
        while True:
            lead = next((j for j, x in enumerate(w) if x != 0), None)
            if lead is None or lead not in pivot_rows:
                break
            row = pivot_rows[lead]
            f = w[lead] / row[lead]
            w = [a - f * b for a, b in zip(w, row)]
        if lead is not None:
            pivot_rows[lead] = w
            chosen.append(vec(v))
    return chosen


def span_dim(vectors: Sequence[Sequence[Fraction]]) -> int:
    return len(independent_subset(vectors))


def in_span(vectors: Sequence[Sequence[Fraction]], v: Sequence[Fraction]) -> bool:
    if not vectors:
        return all(x == 0 for x in v)
    m = RatMatrix.from_cols(list(vectors))
    return m.solve(vec(v)) is not None


def quotient_with_section(
    sub: Sequence[Sequence[Fraction]], ambient_dim: int
) -> tuple[list[tuple[Fraction, ...]], RatMatrix]:
    """Quotient of Q^ambient_dim by span(sub).

    Returns (reps, projection): reps are standard basis vectors at the
    non-pivot coordinates of the echelonized subspace, and projection maps a
    vector to its coset coordinates, so projection annihilates the subspace
    and sends reps[i] to the i-th coordinate vector.
    """
    sub = [vec(v) for v in sub]
    for v in sub:
        if len(v) != ambient_dim:
            raise ValidationError("subspace vector has wrong length")
    basis = independent_subset(sub)
    if basis:
        reduced, pivots, _ = RatMatrix.from_rows(basis).rref()
        sub_basis = [reduced.row(i) for i in range(len(pivots))]
    else:
        pivots = ()
        sub_basis = []
    pivot_set = set(pivots)
    free = [j for j in range(ambient_dim) if j not in pivot_set]
    reps = [unit_vec(ambient_dim, j) for j in free]
    # [sub_basis | reps] is a basis of the ambient space; coset coordinates of v
    # are the rep-components of v in that basis.
    change = RatMatrix.from_cols(sub_basis + reps, nrows=ambient_dim)
    _, _, trans = change.rref()
    # change is square invertible, so trans = change^{-1}
    proj_rows = [trans.row(len(sub_basis) + i) for i in range(len(reps))]
    projection = RatMatrix(len(reps), ambient_dim, proj_rows)
    return reps, projection


@dataclass
class GradedDims:
    """Dimensions per degree over a window [0, top]."""

    dims: dict[int, int]
    top: int

    def get(self, n: int) -> int:
        return self.dims.get(n, 0)

    def as_list(self) -> list[int]:
        return [self.get(n) for n in range(self.top + 1)]

    def support_max(self) -> int | None:
        nonzero = [n for n in range(self.top + 1) if self.get(n)]
        return max(nonzero) if nonzero else None


@dataclass
class PoincareSeries:
    """Truncated power series sum c_n t^n, certified through degree top."""

    coeffs: list[int]
    top: int

    @classmethod
    def from_dims(cls, dims: GradedDims, top: int | None = None) -> "PoincareSeries":
        t = dims.top if top is None else top
        return cls([dims.get(n) for n in range(t + 1)], t)

    def coeff(self, n: int) -> int:
        return self.coeffs[n] if 0 <= n <= self.top else 0

    def mul_poly(self, poly: dict[int, int]) -> "PoincareSeries":
        """Multiply by a polynomial given as {exponent: coefficient}."""
        out = [0] * (self.top + 1)
        for e, c in poly.items():
            for n in range(self.top + 1 - e):
                out[n + e] += c * self.coeffs[n]
        return PoincareSeries(out, self.top)

    def add_const(self, c: int, at: int = 0) -> "PoincareSeries":
        out = list(self.coeffs)
        if 0 <= at <= self.top:
            out[at] += c
        return PoincareSeries(out, self.top)

    def agrees_with(self, other: "PoincareSeries", through: int) -> bool:
        return all(self.coeff(n) == other.coeff(n) for n in range(through + 1))

    def first_disagreement(self, other: "PoincareSeries", through: int) -> int | None:
        for n in range(through + 1):
            if self.coeff(n) != other.coeff(n):
                return n
        return None

    def __str__(self) -> str:
        terms = []
        for n, c in enumerate(self.coeffs):
            if c == 0:
                continue
            if n == 0:
                terms.append(str(c))
            elif n == 1:
                terms.append(f"{c}*t" if c != 1 else "t")
            else:
                terms.append(f"{c}*t^{n}" if c != 1 else f"t^{n}")
        return " + ".join(terms) if terms else "0"


@dataclass
class CohomologyData:
    """Cohomology of a complex at one degree, with explicit witnesses."""

    degree: int
    betti: int
    representatives: list[tuple[Fraction, ...]] = field(default_factory=list)
    boundaries: list[tuple[Fraction, ...]] = field(default_factory=list)
    cocycle_dim: int = 0

    def coords_of(self, z: Sequence[Fraction]) -> tuple[Fraction, ...]:
        """Coordinates of a cocycle in the representative basis, mod boundaries."""
        cols = list(self.boundaries) + list(self.representatives)
        if not cols:
            if any(x != 0 for x in z):
                raise ValidationError("vector is not in the recorded cocycle space")
            return ()
        m = RatMatrix.from_cols(cols)
        sol = m.solve(vec(z))
        if sol is None:
            raise ValidationError("vector is not a cocycle modulo recorded boundaries")
        return tuple(sol[len(self.boundaries):])


def cohomology_at(
    dims: dict[int, int], d_mats: dict[int, RatMatrix], n: int
) -> CohomologyData:
    """Cohomology at degree n of a complex given by per-degree matrices.

    d_mats[k] maps degree k to degree k+1 and must have shape
    dims[k+1] x dims[k]; d(d(x)) = 0 is checked at the degrees involved.
    """
    dim_n = dims.get(n, 0)
    d_n = d_mats.get(n)
    d_prev = d_mats.get(n - 1)
    if d_n is None:
        d_n = RatMatrix.zero(dims.get(n + 1, 0), dim_n)
    if d_prev is None:
        d_prev = RatMatrix.zero(dim_n, dims.get(n - 1, 0))
    if d_n.cols != dim_n or d_prev.rows != dim_n:
        raise ValidationError(f"differential shapes do not match dims at degree {n}")
    if d_n.rows != dims.get(n + 1, 0) or d_prev.cols != dims.get(n - 1, 0):
        raise ValidationError(f"differential shapes do not match dims at degree {n}")
    if d_prev.cols and d_n.cols and not (d_n * d_prev).is_zero():
        raise ValidationError(f"d o d != 0 between degrees {n - 1} and {n + 1}")
    kernel = d_n.kernel_basis()
    image = independent_subset([d_prev.col(j) for j in range(d_prev.cols)])
    # complete the boundary basis to the kernel, deterministically
    reps = []
    echelon = list(image)
    for v in kernel:
        if not in_span(echelon, v):
            reps.append(v)
            echelon.append(v)
    betti = len(kernel) - len(image)
    if betti != len(reps):
        raise ValidationError("boundary space is not contained in the cocycle space")
    return CohomologyData(n, betti, reps, list(image), cocycle_dim=len(kernel))
