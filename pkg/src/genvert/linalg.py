"""Dense real vectors and matrices with finiteness-validated constructors.

All containers are immutable after construction (the backing numpy arrays are
write-protected), so they can be shared freely between concurrent trial
runners.  Operations are pure functions.  Solvers are backed by LAPACK via
numpy/scipy but keep explicit pivot and residual tolerances so that singular
and rank-deficient inputs fail loudly instead of returning garbage.
"""

from __future__ import annotations

from typing import Iterable, Sequence

import numpy as np
import scipy.linalg

SOLVE_TOLERANCE = 1e-9
PIVOT_TOLERANCE = 1e-12


class LinalgError(ValueError):
    """Base class for linear-algebra failures."""


class DimensionMismatch(LinalgError):
    pass


class SingularMatrix(LinalgError):
    pass


class RankDeficient(LinalgError):
    pass


def _validated(arr: np.ndarray, what: str) -> np.ndarray:
    if not np.all(np.isfinite(arr)):
        raise LinalgError(f"{what} contains non-finite entries")
    arr.flags.writeable = False
    return arr


class Vector:
    """Immutable 1-D array of finite floats."""

    __slots__ = ("data",)

    def __init__(self, entries: Iterable[float]):
        arr = np.array(list(entries) if not isinstance(entries, np.ndarray) else entries,
                       dtype=float)
        if arr.ndim != 1:
            raise DimensionMismatch(f"vector entries must be 1-D, got shape {arr.shape}")
        self.data = _validated(arr, "vector")

    @property
    def dim(self) -> int:
        return self.data.shape[0]

    def __len__(self) -> int:
        return self.dim

    def __iter__(self):
        return iter(self.data)

    def __getitem__(self, i):
        return self.data[i]

    def __eq__(self, other) -> bool:
        return isinstance(other, Vector) and np.array_equal(self.data, other.data)

    def __hash__(self):
        return hash((self.dim, self.data.tobytes()))

    def __repr__(self) -> str:
        return f"Vector({self.data.tolist()!r})"

    def tolist(self) -> list[float]:
        return self.data.tolist()


class Matrix:
    """Immutable dense matrix stored row-major.  Zero-sized shapes are legal
    (the hardness gadgets build genuinely empty layers for empty formulas)."""

    __slots__ = ("data",)

    def __init__(self, rows: int, cols: int, entries: Iterable[float]):
        arr = np.array(list(entries) if not isinstance(entries, np.ndarray) else entries,
                       dtype=float)
        if arr.ndim == 2:
            arr = arr.reshape(-1)
        if rows < 0 or cols < 0:
            raise DimensionMismatch("matrix dimensions must be nonnegative")
        if arr.size != rows * cols:
            raise DimensionMismatch(
                f"expected {rows * cols} entries for a {rows}x{cols} matrix, got {arr.size}")
        self.data = _validated(arr.reshape(rows, cols), "matrix")

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence[float]]) -> "Matrix":
        arr = np.array(rows, dtype=float)
        if arr.ndim != 2:
            raise DimensionMismatch("from_rows expects a rectangular list of rows")
        return cls(arr.shape[0], arr.shape[1], arr)

    @classmethod
    def from_array(cls, arr: np.ndarray) -> "Matrix":
        arr = np.asarray(arr, dtype=float)
        if arr.ndim != 2:
            raise DimensionMismatch(f"expected a 2-D array, got shape {arr.shape}")
        return cls(arr.shape[0], arr.shape[1], arr.reshape(-1).copy())

    @property
    def rows(self) -> int:
        return self.data.shape[0]

    @property
    def cols(self) -> int:
        return self.data.shape[1]

    def row(self, i: int) -> np.ndarray:
        return self.data[i]

    def __eq__(self, other) -> bool:
        return (isinstance(other, Matrix)
                and self.data.shape == other.data.shape
                and np.array_equal(self.data, other.data))

    def __hash__(self):
        return hash((self.data.shape, self.data.tobytes()))

    def __repr__(self) -> str:
        return f"Matrix.from_rows({self.data.tolist()!r})"


def identity(n: int) -> Matrix:
    return Matrix.from_array(np.eye(n))


def matvec(m: Matrix, v: Vector) -> Vector:
    if m.cols != v.dim:
        raise DimensionMismatch(f"matvec: {m.rows}x{m.cols} matrix with dim-{v.dim} vector")
    return Vector(m.data @ v.data)


def solve_square(m: Matrix, rhs: Vector) -> Vector:
    """Solve m @ y = rhs by pivoted LU elimination.

    Raises SingularMatrix when any pivot falls below PIVOT_TOLERANCE or when
    the back-substituted residual exceeds SOLVE_TOLERANCE * (1 + ||rhs||_inf).
    """
    if m.rows != m.cols:
        raise DimensionMismatch(f"solve_square needs a square matrix, got {m.rows}x{m.cols}")
    if rhs.dim != m.rows:
        raise DimensionMismatch(f"rhs dim {rhs.dim} does not match matrix size {m.rows}")
    if m.rows == 0:
        return Vector(np.zeros(0))
    lu, piv = scipy.linalg.lu_factor(m.data, check_finite=False)
    if np.min(np.abs(np.diag(lu))) < PIVOT_TOLERANCE:
        raise SingularMatrix("matrix is singular to working precision")
    y = scipy.linalg.lu_solve((lu, piv), rhs.data, check_finite=False)
    residual = np.max(np.abs(m.data @ y - rhs.data))
    if residual > SOLVE_TOLERANCE * (1.0 + np.max(np.abs(rhs.data), initial=0.0)):
        raise SingularMatrix(f"solve residual {residual:.3e} exceeds tolerance; "
                             "matrix is effectively singular")
    return Vector(y)


def least_squares(m: Matrix, rhs: Vector) -> tuple[Vector, float]:
    """Minimize ||m @ y - rhs||_2 for a tall full-column-rank matrix.

    Returns (minimizer, l2 residual).  Raises RankDeficient when the numerical
    rank is below the column count.
    """
    if m.rows < m.cols:
        raise DimensionMismatch(f"least_squares needs rows >= cols, got {m.rows}x{m.cols}")
    if rhs.dim != m.rows:
        raise DimensionMismatch(f"rhs dim {rhs.dim} does not match row count {m.rows}")
    if m.cols == 0:
        return Vector(np.zeros(0)), float(np.linalg.norm(rhs.data))
    y, _, rank, _ = np.linalg.lstsq(m.data, rhs.data, rcond=None)
    if rank < m.cols:
        raise RankDeficient(f"matrix has rank {rank} < {m.cols} columns")
    residual = float(np.linalg.norm(m.data @ y - rhs.data))
    return Vector(y), residual


def norm_linf(v: np.ndarray | Vector) -> float:
    a = v.data if isinstance(v, Vector) else v
    return float(np.max(np.abs(a), initial=0.0))


def norm_l1(v: np.ndarray | Vector) -> float:
    a = v.data if isinstance(v, Vector) else v
    return float(np.sum(np.abs(a)))


def norm_l2(v: np.ndarray | Vector) -> float:
    a = v.data if isinstance(v, Vector) else v
    return float(np.linalg.norm(a))
