"""Dense exact linear algebra over GF(q).

Matrices are immutable values: every operation returns a fresh matrix, so
protocol code can compose products and differences without aliasing
hazards.  Entries are stored canonically (ints in [0, q)) in a flat
row-major ``array('Q')``; the inner loops run in the kernel backend
selected by :mod:`pmsr.kernels`.

Gauss-Jordan elimination pivots on the first nonzero entry in a column.
Arithmetic is exact, so there is no stability pivoting and no tolerance
anywhere: solutions satisfy their systems exactly or an error is raised.
"""

from __future__ import annotations

from array import array
from typing import Iterable, Sequence

from pmsr import kernels
from pmsr.field import Field, FieldElement


class SingularMatrixError(ValueError):
    """Raised when inversion or solving meets a rank-deficient matrix."""

    def __init__(self, rank: int, size: int):
        super().__init__(f"singular: rank {rank} < {size}")
        self.rank = rank


class Matrix:
    """An immutable rows x cols matrix over a prime :class:`Field`."""

    __slots__ = ("field", "rows", "cols", "_data")

    def __init__(self, field: Field, rows: int, cols: int, data: array):
        if rows < 0 or cols < 0 or len(data) != rows * cols:
            raise ValueError(f"shape {rows}x{cols} does not match {len(data)} entries")
        object.__setattr__(self, "field", field)
        object.__setattr__(self, "rows", rows)
        object.__setattr__(self, "cols", cols)
        object.__setattr__(self, "_data", data)

    def __setattr__(self, name, value):
        raise AttributeError("Matrix is immutable")

    # -- construction -----------------------------------------------------

    @classmethod
    def zeros(cls, field: Field, rows: int, cols: int) -> "Matrix":
        return cls(field, rows, cols, array("Q", bytes(8 * rows * cols)))

    @classmethod
    def identity(cls, field: Field, n: int) -> "Matrix":
        data = array("Q", bytes(8 * n * n))
        for i in range(n):
            data[i * n + i] = 1
        return cls(field, n, n, data)

    @classmethod
    def from_rows(cls, field: Field, rows: Iterable[Sequence[int]]) -> "Matrix":
        """Build from an iterable of equal-length rows of ints/elements."""
        q = field.modulus
        rows = list(rows)
        ncols = len(rows[0]) if rows else 0
        data = array("Q")
        for row in rows:
            if len(row) != ncols:
                raise ValueError("ragged rows")
            data.extend(int(v) % q for v in row)
        return cls(field, len(rows), ncols, data)

    @classmethod
    def column(cls, field: Field, values: Sequence[int]) -> "Matrix":
        q = field.modulus
        return cls(field, len(values), 1, array("Q", (int(v) % q for v in values)))

    @classmethod
    def random(cls, field: Field, rows: int, cols: int, rng) -> "Matrix":
        """Uniform matrix from a seeded ``random.Random`` source."""
        return cls(field, rows, cols, array("Q", field.sample_ints(rng, rows * cols)))

    # -- accessors ---------------------------------------------------------

    def entry(self, i: int, j: int) -> int:
        if not (0 <= i < self.rows and 0 <= j < self.cols):
            raise IndexError(f"entry ({i}, {j}) out of range for {self.rows}x{self.cols}")
        return self._data[i * self.cols + j]

    def element(self, i: int, j: int) -> FieldElement:
        return FieldElement(self.entry(i, j), self.field)

    def row(self, i: int) -> list[int]:
        if not 0 <= i < self.rows:
            raise IndexError(f"row {i} out of range")
        return list(self._data[i * self.cols:(i + 1) * self.cols])

    def col(self, j: int) -> list[int]:
        if not 0 <= j < self.cols:
            raise IndexError(f"col {j} out of range")
        return list(self._data[j::self.cols])

    def to_rows(self) -> list[list[int]]:
        return [self.row(i) for i in range(self.rows)]

    def flat(self) -> tuple[int, ...]:
        return tuple(self._data)

    @property
    def shape(self) -> tuple[int, int]:
        return (self.rows, self.cols)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Matrix):
            return NotImplemented
        return (self.field == other.field and self.rows == other.rows
                and self.cols == other.cols and self._data == other._data)

    def __hash__(self):
        return hash((self.field.modulus, self.rows, self.cols, self._data.tobytes()))

    def __repr__(self) -> str:
        return f"Matrix({self.rows}x{self.cols} mod {self.field.modulus}: {self.to_rows()})"

    # -- arithmetic ---------------------------------------------------------

    def _check_field(self, other: "Matrix") -> None:
        if self.field != other.field:
            raise ValueError("incompatible fields")

    def __matmul__(self, other: "Matrix") -> "Matrix":
        self._check_field(other)
        if self.cols != other.rows:
            raise ValueError(f"dimension mismatch: {self.shape} @ {other.shape}")
        out = array("Q", bytes(8 * self.rows * other.cols))
        kernels.mat_mul(self._data, other._data, out,
                        self.rows, self.cols, other.cols, self.field.modulus)
        return Matrix(self.field, self.rows, other.cols, out)

    __mul__ = __matmul__

    def __add__(self, other: "Matrix") -> "Matrix":
        self._check_field(other)
        if self.shape != other.shape:
            raise ValueError(f"dimension mismatch: {self.shape} + {other.shape}")
        out = array("Q", bytes(8 * len(self._data)))
        kernels.mat_add(self._data, other._data, out, len(self._data), self.field.modulus)
        return Matrix(self.field, self.rows, self.cols, out)

    def __sub__(self, other: "Matrix") -> "Matrix":
        self._check_field(other)
        if self.shape != other.shape:
            raise ValueError(f"dimension mismatch: {self.shape} - {other.shape}")
        out = array("Q", bytes(8 * len(self._data)))
        kernels.mat_sub(self._data, other._data, out, len(self._data), self.field.modulus)
        return Matrix(self.field, self.rows, self.cols, out)

    def scale(self, c: int) -> "Matrix":
        q = self.field.modulus
        c %= q
        return Matrix(self.field, self.rows, self.cols,
                      array("Q", (v * c % q for v in self._data)))

    def transpose(self) -> "Matrix":
        out = array("Q", bytes(8 * len(self._data)))
        r, c = self.rows, self.cols
        for i in range(r):
            for j in range(c):
                out[j * r + i] = self._data[i * c + j]
        return Matrix(self.field, c, r, out)

    # -- elimination-based operations ---------------------------------------

    def inverse(self) -> "Matrix":
        """Gauss-Jordan inverse; raises :class:`SingularMatrixError` with the
        rank found if the matrix is not invertible."""
        if self.rows != self.cols:
            raise ValueError(f"inverse needs a square matrix, got {self.shape}")
        n = self.rows
        aug = _augment(self, Matrix.identity(self.field, n))
        rank = kernels.gauss_jordan(aug, n, 2 * n, n, self.field.modulus)
        if rank < n:
            raise SingularMatrixError(rank, n)
        return _right_block(self.field, aug, n, 2 * n, n)

    def solve(self, rhs: "Matrix") -> "Matrix":
        """Solve self @ x = rhs exactly; self must be square and invertible."""
        self._check_field(rhs)
        if self.rows != self.cols:
            raise ValueError(f"solve needs a square matrix, got {self.shape}")
        if rhs.rows != self.rows:
            raise ValueError(f"dimension mismatch: {self.shape} vs rhs {rhs.shape}")
        n = self.rows
        aug = _augment(self, rhs)
        width = n + rhs.cols
        rank = kernels.gauss_jordan(aug, n, width, n, self.field.modulus)
        if rank < n:
            raise SingularMatrixError(rank, n)
        return _right_block(self.field, aug, n, width, rhs.cols)

    def rank(self) -> int:
        data = array("Q", self._data)
        return kernels.gauss_jordan(data, self.rows, self.cols, self.cols, self.field.modulus)

    # -- selection ------------------------------------------------------------

    def submatrix_rows(self, indices: Sequence[int]) -> "Matrix":
        """The selected rows, in the given order; indices must be distinct."""
        if len(set(indices)) != len(indices):
            raise ValueError("duplicate row index")
        out = array("Q")
        c = self.cols
        for i in indices:
            if not 0 <= i < self.rows:
                raise IndexError(f"row {i} out of range for {self.rows} rows")
            out.extend(self._data[i * c:(i + 1) * c])
        return Matrix(self.field, len(indices), c, out)

    def hstack(self, other: "Matrix") -> "Matrix":
        self._check_field(other)
        if self.rows != other.rows:
            raise ValueError("row count mismatch in hstack")
        out = array("Q")
        for i in range(self.rows):
            out.extend(self._data[i * self.cols:(i + 1) * self.cols])
            out.extend(other._data[i * other.cols:(i + 1) * other.cols])
        return Matrix(self.field, self.rows, self.cols + other.cols, out)

    def is_zero(self) -> bool:
        return not any(self._data)


def vandermonde(field: Field, points: Sequence[int], cols: int) -> Matrix:
    """Rows (1, x, x^2, ..., x^(cols-1)) for each evaluation point x.

    Points must be pairwise distinct and nonzero, which makes every square
    row-submatrix invertible.
    """
    if cols < 1:
        raise ValueError("cols must be >= 1")
    q = field.modulus
    pts = [int(p) % q for p in points]
    if len(set(pts)) != len(pts) or 0 in pts:
        raise ValueError("degenerate points: must be pairwise distinct and nonzero")
    data = array("Q")
    for x in pts:
        v = 1
        for _ in range(cols):
            data.append(v)
            v = v * x % q
    return Matrix(field, len(pts), cols, data)


def _augment(a: Matrix, b: Matrix) -> array:
    """Flat [a | b] buffer for elimination."""
    out = array("Q")
    for i in range(a.rows):
        out.extend(a._data[i * a.cols:(i + 1) * a.cols])
        out.extend(b._data[i * b.cols:(i + 1) * b.cols])
    return out


def _right_block(field: Field, aug: array, rows: int, width: int, cols: int) -> Matrix:
    out = array("Q")
    off = width - cols
    for i in range(rows):
        out.extend(aug[i * width + off:i * width + width])
    return Matrix(field, rows, cols, out)
