"""Exact rational linear algebra and linear feasibility.

Everything here works over :class:`fractions.Fraction` with Python's
arbitrary-precision integers; no floating point is involved. Matrices are
small (desk-scale networks), so plain nested lists are used throughout.
"""

from __future__ import annotations

from fractions import Fraction
from math import lcm
from numbers import Rational
from typing import Iterable, Sequence

from .errors import DimensionMismatch

Vector = tuple  # tuple of Fractions


def to_fraction(x) -> Fraction:
    """Convert ``x`` to an exact Fraction.

    Floats are converted exactly (their binary value); strings such as
    ``"1/3"`` and ``"0.25"`` are parsed as rationals.
    """
    if isinstance(x, Fraction):
        return x
    if isinstance(x, (int, Rational)):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x.strip())
    if isinstance(x, float):
        return Fraction(x)
    # numpy scalars and friends
    if hasattr(x, "item"):
        return to_fraction(x.item())
    raise TypeError(f"cannot convert {x!r} to an exact rational")


class RationalMatrix:
    """Dense matrix of exact rationals.

    Immutable by convention: operations return new matrices.
    """

    __slots__ = ("rows", "cols", "_data")

    def __init__(self, entries: Iterable[Iterable], cols: int | None = None):
        data = [tuple(to_fraction(x) for x in row) for row in entries]
        if cols is None:
            cols = len(data[0]) if data else 0
        for row in data:
            if len(row) != cols:
                raise DimensionMismatch(
                    f"ragged matrix: expected {cols} columns, got {len(row)}"
                )
        self.rows = len(data)
        self.cols = cols
        self._data = tuple(data)

    @classmethod
    def zeros(cls, rows: int, cols: int) -> "RationalMatrix":
        return cls([[0] * cols for _ in range(rows)], cols=cols)

    @classmethod
    def identity(cls, n: int) -> "RationalMatrix":
        return cls([[int(i == j) for j in range(n)] for i in range(n)], cols=n)

    @classmethod
    def from_columns(cls, columns: Sequence[Sequence], rows: int | None = None):
        if not columns:
            return cls.zeros(rows or 0, 0)
        return cls(zip(*columns), cols=len(columns))

    @property
    def shape(self) -> tuple[int, int]:
        return self.rows, self.cols

    def __getitem__(self, idx):
        i, j = idx
        return self._data[i][j]

    def row(self, i: int) -> Vector:
        return self._data[i]

    def column(self, j: int) -> Vector:
        return tuple(r[j] for r in self._data)

    def tolist(self) -> list[list[Fraction]]:
        return [list(r) for r in self._data]

    @property
    def T(self) -> "RationalMatrix":
        return RationalMatrix(zip(*self._data), cols=self.rows) if self.rows else (
            RationalMatrix.zeros(self.cols, 0)
        )

    def __matmul__(self, other):
        if isinstance(other, RationalMatrix):
            if self.cols != other.rows:
                raise DimensionMismatch(f"{self.shape} @ {other.shape}")
            ocols = [other.column(j) for j in range(other.cols)]
            return RationalMatrix(
                [[sum((a * b for a, b in zip(r, c)), Fraction(0)) for c in ocols]
                 for r in self._data],
                cols=other.cols,
            )
        vec = [to_fraction(x) for x in other]
        if len(vec) != self.cols:
            raise DimensionMismatch(f"{self.shape} @ vector of length {len(vec)}")
        return tuple(sum((a * b for a, b in zip(r, vec)), Fraction(0)) for r in self._data)

    def __sub__(self, other: "RationalMatrix") -> "RationalMatrix":
        if self.shape != other.shape:
            raise DimensionMismatch(f"{self.shape} - {other.shape}")
        return RationalMatrix(
            [[a - b for a, b in zip(r, s)] for r, s in zip(self._data, other._data)],
            cols=self.cols,
        )

    def __eq__(self, other) -> bool:
        if not isinstance(other, RationalMatrix):
            return NotImplemented
        return self.shape == other.shape and self._data == other._data

    def __hash__(self):
        return hash((self.shape, self._data))

    def __repr__(self) -> str:
        body = "; ".join(" ".join(str(x) for x in r) for r in self._data)
        return f"RationalMatrix({self.rows}x{self.cols}: [{body}])"


def as_matrix(M) -> RationalMatrix:
    return M if isinstance(M, RationalMatrix) else RationalMatrix(M)


def _integer_rows(M: RationalMatrix) -> list[list[int]]:
    """Scale every row by the lcm of its denominators (rank-preserving)."""
    out = []
    for row in M.tolist():
        d = lcm(*(x.denominator for x in row)) if row else 1
        out.append([int(x * d) for x in row])
    return out


def rank(M) -> int:
    """Rank by fraction-free (Bareiss) elimination on an integer-scaled copy."""
    M = as_matrix(M)
    a = _integer_rows(M)
    nrows, ncols = M.rows, M.cols
    r = 0
    prev = 1
    for c in range(ncols):
        if r == nrows:
            break
        piv = next((i for i in range(r, nrows) if a[i][c] != 0), None)
        if piv is None:
            continue
        a[r], a[piv] = a[piv], a[r]
        p = a[r][c]
        pivot_row = a[r]
        for i in range(r + 1, nrows):
            row = a[i]
            f = row[c]
            for j in range(c + 1, ncols):
                # exact by Sylvester's identity
                row[j] = (row[j] * p - f * pivot_row[j]) // prev
            row[c] = 0
        prev = p
        r += 1
    return r


def rref(M) -> tuple[RationalMatrix, list[int]]:
    """Reduced row echelon form and pivot columns (Gauss-Jordan over Q)."""
    M = as_matrix(M)
    a = M.tolist()
    nrows, ncols = M.rows, M.cols
    pivots: list[int] = []
    r = 0
    for c in range(ncols):
        if r == nrows:
            break
        piv = next((i for i in range(r, nrows) if a[i][c] != 0), None)
        if piv is None:
            continue
        a[r], a[piv] = a[piv], a[r]
        p = a[r][c]
        a[r] = [x / p for x in a[r]]
        for i in range(nrows):
            if i != r and a[i][c] != 0:
                f = a[i][c]
                a[i] = [x - f * y for x, y in zip(a[i], a[r])]
        pivots.append(c)
        r += 1
    return RationalMatrix(a, cols=ncols), pivots


def nullspace(M) -> list[Vector]:
    """Basis of ``{v : M v = 0}``.

    One vector per free column of the RREF, with a 1 in that free position,
    so the basis is canonical for a given matrix.
    """
    M = as_matrix(M)
    R, pivots = rref(M)
    pivot_set = set(pivots)
    basis = []
    for free in range(M.cols):
        if free in pivot_set:
            continue
        v = [Fraction(0)] * M.cols
        v[free] = Fraction(1)
        for i, pc in enumerate(pivots):
            v[pc] = -R[i, free]
        basis.append(tuple(v))
    return basis


def row_space_basis(vectors: Sequence[Sequence], dim: int | None = None) -> list[Vector]:
    """Independent spanning set (nonzero RREF rows) of the given vectors."""
    vectors = [tuple(to_fraction(x) for x in v) for v in vectors]
    if not vectors:
        return []
    R, pivots = rref(RationalMatrix(vectors, cols=dim))
    return [R.row(i) for i in range(len(pivots))]


def orthogonal_complement(vectors: Sequence[Sequence], dim: int) -> list[Vector]:
    """Basis of the orthogonal complement of ``span(vectors)`` in Q^dim."""
    vectors = [v for v in vectors]
    if not vectors:
        return [tuple(Fraction(int(i == j)) for j in range(dim)) for i in range(dim)]
    return nullspace(RationalMatrix(vectors, cols=dim))


def span_contains(basis: Sequence[Sequence], v: Sequence, dim: int | None = None) -> bool:
    """Whether ``v`` lies in ``span(basis)`` (exact)."""
    v = tuple(to_fraction(x) for x in v)
    dim = len(v) if dim is None else dim
    if not basis:
        return all(x == 0 for x in v)
    r0 = rank(RationalMatrix(basis, cols=dim))
    return rank(RationalMatrix(list(basis) + [v], cols=dim)) == r0


def sign(v: Iterable) -> tuple[int, ...]:
    return tuple((x > 0) - (x < 0) for x in v)


def lp_feasible(A: Sequence[Sequence], b: Sequence) -> list[Fraction] | None:
    """Find ``x >= 0`` with ``A x = b`` by exact phase-one simplex.

    Bland's rule guarantees termination. Returns ``None`` when infeasible.
    """
    A = [[to_fraction(x) for x in row] for row in A]
    b = [to_fraction(x) for x in b]
    m = len(A)
    n = len(A[0]) if A else 0
    if m == 0:
        return [Fraction(0)] * n
    # tableau [A | I | b] with b >= 0
    T = []
    for i in range(m):
        s = -1 if b[i] < 0 else 1
        row = [s * x for x in A[i]] + [Fraction(int(i == k)) for k in range(m)] + [s * b[i]]
        T.append(row)
    width = n + m
    basis = [n + i for i in range(m)]
    # reduced costs for min sum(artificials)
    cost = [-sum((T[i][j] for i in range(m)), Fraction(0)) for j in range(width)]
    for j in range(n, width):
        cost[j] = Fraction(0)
    while True:
        enter = next((j for j in range(width) if cost[j] < 0), None)
        if enter is None:
            break
        leave = None
        best = None
        for i in range(m):
            if T[i][enter] > 0:
                ratio = T[i][-1] / T[i][enter]
                if best is None or ratio < best or (ratio == best and basis[i] < basis[leave]):
                    best, leave = ratio, i
        if leave is None:  # unbounded direction; cannot happen in phase one
            break
        p = T[leave][enter]
        T[leave] = [x / p for x in T[leave]]
        for i in range(m):
            if i != leave and T[i][enter] != 0:
                f = T[i][enter]
                T[i] = [x - f * y for x, y in zip(T[i], T[leave])]
        f = cost[enter]
        cost = [c - f * y for c, y in zip(cost, T[leave][:width])]
        basis[leave] = enter
    x = [Fraction(0)] * width
    for i, j in enumerate(basis):
        x[j] = T[i][-1]
    if any(x[j] != 0 for j in range(n, width)):
        return None
    return x[:n]


def _signed_in_kernel(C: Sequence[Sequence[Fraction]], pattern: Sequence[int], dim: int):
    """Vector v with C v = 0 and sign(v) == pattern, or None.

    Uses v_i = s_i (1 + p_i), p_i >= 0 on the support and v_i = 0 off it;
    by homogeneity of the cone the unit threshold loses nothing.
    """
    support = [i for i in range(dim) if pattern[i] != 0]
    if not support:
        return tuple(Fraction(0) for _ in range(dim))
    rows, rhs = [], []
    for c in C:
        rows.append([c[i] * pattern[i] for i in support])
        rhs.append(-sum((c[i] * pattern[i] for i in support), Fraction(0)))
    p = lp_feasible(rows, rhs) if rows else [Fraction(0)] * len(support)
    if p is None:
        return None
    v = [Fraction(0)] * dim
    for k, i in enumerate(support):
        v[i] = pattern[i] * (1 + p[k])
    return tuple(v)


def _check_pattern(pattern, dim):
    pattern = tuple(int(s) for s in pattern)
    if len(pattern) != dim:
        raise DimensionMismatch(f"pattern has length {len(pattern)}, ambient dimension is {dim}")
    if any(s not in (-1, 0, 1) for s in pattern):
        raise ValueError(f"sign pattern entries must be -1, 0 or 1: {pattern}")
    return pattern


def feasible_signed(basis: Sequence[Sequence], pattern: Sequence[int], dim: int | None = None):
    """Find a vector of ``span(basis)`` whose sign vector equals ``pattern``.

    Args:
        basis: spanning vectors (rows); may be empty, meaning the zero space.
        pattern: entries in {-1, 0, 1}.
        dim: ambient dimension, required only when ``basis`` is empty.

    Returns:
        An exact witness tuple, or ``None`` if the pattern is not realized.
    """
    if dim is None:
        if not basis:
            dim = len(pattern)
        else:
            dim = len(basis[0])
    pattern = _check_pattern(pattern, dim)
    for v in basis:
        if len(v) != dim:
            raise DimensionMismatch(f"basis vector of length {len(v)} in dimension {dim}")
    C = orthogonal_complement([tuple(to_fraction(x) for x in v) for v in basis], dim)
    return _signed_in_kernel(C, pattern, dim)


def kernel_signed(A, pattern: Sequence[int]):
    """Find ``v`` with ``A v = 0`` and ``sign(v) == pattern``, or ``None``."""
    A = as_matrix(A)
    pattern = _check_pattern(pattern, A.cols)
    return _signed_in_kernel([A.row(i) for i in range(A.rows)], pattern, A.cols)
