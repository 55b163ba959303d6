"""Dense matrices over Z_p: echelon forms, kernels, solving, inversion, Kronecker products."""

from __future__ import annotations

from collections.abc import Iterable

import numpy as np

from .field import FieldSpec, Scalar, inv_mod

_INT64_LIMIT = 2**63


def _coerce_field(field: FieldSpec | int) -> FieldSpec:
    return field if isinstance(field, FieldSpec) else FieldSpec(int(field))


class Matrix:
    """Immutable matrix with entries in Z_p, stored row-major as a numpy array."""

    __slots__ = ("data", "field")

    def __init__(self, data, field: FieldSpec | int):
        field = _coerce_field(field)
        if isinstance(data, Matrix):
            data = data.data
        arr = np.array(
            [[int(x) for x in row] for row in data] if _is_nested_scalars(data) else data,
            dtype=np.int64 if field.p < 2**31 else object,
        )
        if arr.ndim == 1:
            arr = arr.reshape(1, -1) if arr.size else arr.reshape(0, 0)
        if arr.ndim != 2:
            raise ValueError(f"matrix data must be 2-dimensional, got shape {arr.shape}")
        arr = arr % field.p
        arr.flags.writeable = False
        self.data = arr
        self.field = field

    @classmethod
    def identity(cls, n: int, field: FieldSpec | int) -> Matrix:
        return cls(np.eye(n, dtype=np.int64), field)

    @classmethod
    def zeros(cls, rows: int, cols: int, field: FieldSpec | int) -> Matrix:
        return cls(np.zeros((rows, cols), dtype=np.int64), field)

    @property
    def p(self) -> int:
        return self.field.p

    @property
    def shape(self) -> tuple[int, int]:
        return self.data.shape

    @property
    def rows(self) -> int:
        return self.data.shape[0]

    @property
    def cols(self) -> int:
        return self.data.shape[1]

    @property
    def T(self) -> Matrix:
        return Matrix(self.data.T, self.field)

    def entry(self, i: int, j: int) -> Scalar:
        return Scalar(int(self.data[i, j]), self.field)

    def tolist(self) -> list[list[int]]:
        return [[int(x) for x in row] for row in self.data]

    def is_zero(self) -> bool:
        return not self.data.any()

    def _same_field(self, other: Matrix):
        if self.field != other.field:
            raise ValueError(f"modulus mismatch: {self.field} vs {other.field}")

    def __matmul__(self, other: Matrix) -> Matrix:
        self._same_field(other)
        if self.cols != other.rows:
            raise ValueError(f"shape mismatch: {self.shape} @ {other.shape}")
        return Matrix(matmul_mod(self.data, other.data, self.p), self.field)

    def __add__(self, other: Matrix) -> Matrix:
        self._same_field(other)
        return Matrix(self.data + other.data, self.field)

    def __sub__(self, other: Matrix) -> Matrix:
        self._same_field(other)
        return Matrix(self.data - other.data, self.field)

    def __neg__(self) -> Matrix:
        return Matrix(-self.data, self.field)

    def scale(self, c: int | Scalar) -> Matrix:
        return Matrix(self.data * (int(c) % self.p), self.field)

    def __eq__(self, other):
        if not isinstance(other, Matrix):
            return NotImplemented
        return (
            self.field == other.field
            and self.shape == other.shape
            and bool(np.array_equal(self.data, other.data))
        )

    def __hash__(self):
        return hash((self.field.p, self.shape, tuple(int(x) for x in self.data.flat)))

    def __repr__(self):
        return f"Matrix({self.tolist()}, {self.field!r})"


def _is_nested_scalars(data) -> bool:
    if isinstance(data, np.ndarray):
        return False
    try:
        first_row = next(iter(data))
        first = next(iter(first_row))
    except (StopIteration, TypeError):
        return False
    return isinstance(first, Scalar)


def matmul_mod(a: np.ndarray, b: np.ndarray, p: int) -> np.ndarray:
    """``a @ b`` reduced mod p; falls back to Python integers if int64 could overflow."""
    k = a.shape[-1]
    if (p - 1) ** 2 * max(k, 1) < _INT64_LIMIT and a.dtype != object and b.dtype != object:
        return (a @ b) % p
    return (a.astype(object) @ b.astype(object)) % p


def _rref_array(a: np.ndarray, p: int) -> tuple[np.ndarray, list[int]]:
    m = a.copy() if a.dtype == object else a.astype(np.int64, copy=True)
    m %= p
    n_rows, n_cols = m.shape
    pivots: list[int] = []
    r = 0
    for c in range(n_cols):
        if r == n_rows:
            break
        nz = np.nonzero(m[r:, c])[0]
        if nz.size == 0:
            continue
        i = r + int(nz[0])
        if i != r:
            m[[r, i]] = m[[i, r]]
        m[r] = (m[r] * inv_mod(int(m[r, c]), p)) % p
        for i in range(n_rows):
            if i != r and m[i, c]:
                m[i] = (m[i] - m[i, c] * m[r]) % p
        pivots.append(c)
        r += 1
    return m, pivots


def rref(m: Matrix) -> tuple[Matrix, int, list[int]]:
    """Reduced row echelon form, rank and pivot columns."""
    red, pivots = _rref_array(m.data, m.p)
    return Matrix(red, m.field), len(pivots), pivots


def rank(m: Matrix) -> int:
    return len(_rref_array(m.data, m.p)[1])


def row_space(m: Matrix) -> Matrix:
    """Canonical basis (RREF without zero rows) of the row space."""
    red, pivots = _rref_array(m.data, m.p)
    return Matrix(red[: len(pivots)].reshape(len(pivots), m.cols), m.field)


def kernel(m: Matrix) -> Matrix:
    """Rows spanning {x : m x^T = 0}."""
    red, pivots = _rref_array(m.data, m.p)
    n = m.cols
    free = [c for c in range(n) if c not in pivots]
    basis = np.zeros((len(free), n), dtype=red.dtype)
    for k, f in enumerate(free):
        basis[k, f] = 1
        for i, pc in enumerate(pivots):
            basis[k, pc] = -red[i, f]
    return Matrix(basis, m.field)


def solve(a: Matrix, b) -> Matrix | None:
    """Some x with a x = b (as a column), or None when the system is inconsistent."""
    b_arr = b.data.reshape(-1) if isinstance(b, Matrix) else np.asarray([int(x) for x in b])
    if b_arr.shape[0] != a.rows:
        raise ValueError(f"right-hand side has length {b_arr.shape[0]}, expected {a.rows}")
    aug = np.concatenate([a.data, b_arr.reshape(-1, 1).astype(a.data.dtype)], axis=1)
    red, pivots = _rref_array(aug, a.p)
    if pivots and pivots[-1] == a.cols:
        return None
    x = np.zeros((a.cols, 1), dtype=red.dtype)
    for i, pc in enumerate(pivots):
        x[pc, 0] = red[i, -1]
    return Matrix(x, a.field)


def invert(m: Matrix) -> Matrix | None:
    n, k = m.shape
    if n != k:
        raise ValueError(f"cannot invert non-square {m.shape} matrix")
    aug = np.concatenate([m.data, np.eye(n, dtype=m.data.dtype)], axis=1)
    red, pivots = _rref_array(aug, m.p)
    if len(pivots) < n or pivots[n - 1] >= n:
        return None
    return Matrix(red[:, n:], m.field)


def kron(a: Matrix, b: Matrix) -> Matrix:
    """Kronecker product, left factor major."""
    a._same_field(b)
    return Matrix(np.kron(a.data, b.data), a.field)


def in_span(rows: Matrix, v) -> bool:
    v = np.asarray(v.data if isinstance(v, Matrix) else v).reshape(1, -1)
    return rank(Matrix(np.concatenate([rows.data, v.astype(rows.data.dtype)]), rows.field)) == rank(rows)


def extend_to_basis(rows: Matrix, dim: int | None = None) -> Matrix:
    """Complete independent rows to an invertible square matrix.

    Missing rows are standard basis vectors, taken greedily in index order.
    """
    n = rows.cols if dim is None else dim
    data = rows.data.reshape(rows.rows, n) if rows.rows else np.zeros((0, n), dtype=np.int64)
    if rank(Matrix(data, rows.field)) != data.shape[0]:
        raise ValueError("rows are linearly dependent")
    current = [np.array(r) for r in data]
    red, pivots = _rref_array(data, rows.p) if len(current) else (data, [])
    span_rank = len(pivots)
    for i in range(n):
        if span_rank == n:
            break
        e = np.zeros(n, dtype=data.dtype)
        e[i] = 1
        trial = np.vstack(current + [e]) if current else e.reshape(1, n)
        r = len(_rref_array(trial, rows.p)[1])
        if r > span_rank:
            current.append(e)
            span_rank = r
    return Matrix(np.vstack(current), rows.field)


def stack(mats: Iterable[Matrix], field: FieldSpec | int, cols: int) -> Matrix:
    """Vertically stack matrices with ``cols`` columns; an empty stack has zero rows."""
    arrs = [m.data for m in mats if m.rows]
    if not arrs:
        return Matrix(np.zeros((0, cols), dtype=np.int64), field)
    return Matrix(np.vstack(arrs), field)
