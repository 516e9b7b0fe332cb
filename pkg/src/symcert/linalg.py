"""Small exact dense matrices over ring-like entries.

The matrices here hold exact values — :class:`~symcert.fields.FieldElement`
scalars for group/projector work, or parameter-dependent ring elements for
the configuration matrix — and only ever use ring operations plus structural
zero tests, so every product, inverse, and rank decision is exact.  Entries
are duck-typed: anything with ``+``, ``-``, ``*`` and an ``is_zero``
property works; ``inverse()`` on entries is needed only by matrix inversion.

Sizes stay small (at most 48x48), so the implementations are the plain
O(n^3) schoolbook ones; no pivot-growth or sparsity tricks are warranted.
"""

from __future__ import annotations

from typing import Callable, Sequence

__all__ = ["Matrix"]


def _is_zero(x) -> bool:
    return x.is_zero


class Matrix:
    """Immutable dense matrix with exact ring entries.

    Parameters
    ----------
    rows : sequence of sequences
        Entries in row-major order; all rows must have equal length.
    """

    __slots__ = ("_rows", "_nrows", "_ncols")

    def __init__(self, rows: Sequence[Sequence]):
        rows = [list(r) for r in rows]
        if not rows or not rows[0]:
            raise ValueError("matrix needs at least one row and one column")
        width = len(rows[0])
        if any(len(r) != width for r in rows):
            raise ValueError("ragged rows")
        self._rows = rows
        self._nrows = len(rows)
        self._ncols = width

    # -- constructors ------------------------------------------------------

    @classmethod
    def zeros(cls, nrows: int, ncols: int, zero) -> "Matrix":
        return cls([[zero for _ in range(ncols)] for _ in range(nrows)])

    @classmethod
    def identity(cls, n: int, zero, one) -> "Matrix":
        return cls([[one if i == j else zero for j in range(n)] for i in range(n)])

    @classmethod
    def from_columns(cls, columns: Sequence[Sequence]) -> "Matrix":
        cols = [list(c) for c in columns]
        return cls([[cols[j][i] for j in range(len(cols))] for i in range(len(cols[0]))])

    # -- shape and access --------------------------------------------------

    @property
    def nrows(self) -> int:
        return self._nrows

    @property
    def ncols(self) -> int:
        return self._ncols

    @property
    def shape(self) -> tuple[int, int]:
        return (self._nrows, self._ncols)

    def __getitem__(self, key: tuple[int, int]):
        i, j = key
        return self._rows[i][j]

    def row(self, i: int) -> list:
        return list(self._rows[i])

    def col(self, j: int) -> list:
        return [self._rows[i][j] for i in range(self._nrows)]

    def rows(self) -> list[list]:
        return [list(r) for r in self._rows]

    def submatrix(self, row_idx: Sequence[int], col_idx: Sequence[int]) -> "Matrix":
        return Matrix([[self._rows[i][j] for j in col_idx] for i in row_idx])

    # -- arithmetic --------------------------------------------------------

    def __add__(self, other: "Matrix") -> "Matrix":
        if self.shape != other.shape:
            raise ValueError("shape mismatch")
        return Matrix(
            [
                [self._rows[i][j] + other._rows[i][j] for j in range(self._ncols)]
                for i in range(self._nrows)
            ]
        )

    def __sub__(self, other: "Matrix") -> "Matrix":
        if self.shape != other.shape:
            raise ValueError("shape mismatch")
        return Matrix(
            [
                [self._rows[i][j] - other._rows[i][j] for j in range(self._ncols)]
                for i in range(self._nrows)
            ]
        )

    def __neg__(self) -> "Matrix":
        return Matrix([[-x for x in r] for r in self._rows])

    def scale(self, s) -> "Matrix":
        return Matrix([[s * x for x in r] for r in self._rows])

    def __matmul__(self, other: "Matrix") -> "Matrix":
        if self._ncols != other._nrows:
            raise ValueError("inner dimension mismatch")
        out = []
        brows = other._rows
        for arow in self._rows:
            row = []
            for j in range(other._ncols):
                acc = None
                for k, a in enumerate(arow):
                    if _is_zero(a):
                        continue
                    term = a * brows[k][j]
                    acc = term if acc is None else acc + term
                if acc is None:
                    acc = arow[0] * brows[0][j]  # structural zero of the right ring
                row.append(acc)
            out.append(row)
        return Matrix(out)

    def transpose(self) -> "Matrix":
        return Matrix(
            [[self._rows[i][j] for i in range(self._nrows)] for j in range(self._ncols)]
        )

    def kron(self, other: "Matrix") -> "Matrix":
        """Kronecker product; row ``i*p + k`` column ``j*q + l`` holds A[i,j]*B[k,l]."""
        p, q = other.shape
        out = []
        for i in range(self._nrows):
            for k in range(p):
                row = []
                for j in range(self._ncols):
                    a = self._rows[i][j]
                    row.extend(a * other._rows[k][l] for l in range(q))
                out.append(row)
        return Matrix(out)

    def map(self, fn: Callable) -> "Matrix":
        return Matrix([[fn(x) for x in r] for r in self._rows])

    # -- predicates --------------------------------------------------------

    @property
    def is_zero(self) -> bool:
        return all(_is_zero(x) for r in self._rows for x in r)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Matrix):
            return NotImplemented
        if self.shape != other.shape:
            return False
        return all(
            self._rows[i][j] == other._rows[i][j]
            for i in range(self._nrows)
            for j in range(self._ncols)
        )

    __hash__ = None

    # -- elimination-based queries -----------------------------------------

    def inverse(self) -> "Matrix":
        """Gauss–Jordan inverse over a field (entries must support inverse()).

        Pivots on the first structurally nonzero entry per column — exact
        arithmetic needs no pivot-size heuristics.  Raises ZeroDivisionError
        when the matrix is singular.
        """
        if self._nrows != self._ncols:
            raise ValueError("inverse of a non-square matrix")
        some = self._rows[0][0]
        if not hasattr(some, "tower"):
            raise TypeError("inverse needs field entries")
        n = self._nrows
        zero, one = some.tower.zero(), some.tower.one()
        a = [list(r) for r in self._rows]
        inv = [[one if i == j else zero for j in range(n)] for i in range(n)]
        for col in range(n):
            pivot = next(
                (r for r in range(col, n) if not _is_zero(a[r][col])), None
            )
            if pivot is None:
                raise ZeroDivisionError("matrix is singular")
            if pivot != col:
                a[col], a[pivot] = a[pivot], a[col]
                inv[col], inv[pivot] = inv[pivot], inv[col]
            p = a[col][col].inverse()
            a[col] = [p * x for x in a[col]]
            inv[col] = [p * x for x in inv[col]]
            for r in range(n):
                if r == col or _is_zero(a[r][col]):
                    continue
                f = a[r][col]
                a[r] = [x - f * y for x, y in zip(a[r], a[col])]
                inv[r] = [x - f * y for x, y in zip(inv[r], inv[col])]
        return Matrix(inv)

    def independent_columns(self) -> list[int]:
        """Lexicographically first maximal linearly independent column set.

        Scans columns left to right, reducing each against the echelon rows
        accumulated so far and keeping the column exactly when a nonzero
        residue survives.
        """
        echelon: list[tuple[int, list]] = []  # (pivot position, normalized row)
        chosen: list[int] = []
        for j in range(self._ncols):
            v = self.col(j)
            for pos, row in echelon:
                f = v[pos]
                if not _is_zero(f):
                    v = [x - f * y for x, y in zip(v, row)]
            pos = next((i for i, x in enumerate(v) if not _is_zero(x)), None)
            if pos is None:
                continue
            p = v[pos].inverse()
            v = [p * x for x in v]
            echelon.append((pos, v))
            chosen.append(j)
        return chosen

    def rank(self) -> int:
        return len(self.independent_columns())

    def det2(self):
        """Determinant of a 2x2 matrix (the only size the pipelines need)."""
        if self.shape != (2, 2):
            raise ValueError("det2 needs a 2x2 matrix")
        r = self._rows
        return r[0][0] * r[1][1] - r[0][1] * r[1][0]

    def __repr__(self) -> str:
        return f"Matrix({self._nrows}x{self._ncols})"
