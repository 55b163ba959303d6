import itertools

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from modalqt.field import FieldSpec
from modalqt.linalg import Matrix, extend_to_basis, in_span, invert, kernel, kron, rank, rref, row_space, solve


def M(rows, p):
    return Matrix(rows, FieldSpec(p))


def matrices(p, max_rows=4, max_cols=4):
    return st.integers(1, max_rows).flatmap(
        lambda r: st.integers(1, max_cols).flatmap(
            lambda c: st.lists(st.lists(st.integers(0, p - 1), min_size=c, max_size=c), min_size=r, max_size=r)
        )
    ).map(lambda rows: M(rows, p))


def all_matrices(p, r, c):
    for entries in itertools.product(range(p), repeat=r * c):
        yield M(np.array(entries).reshape(r, c), p)


@pytest.mark.parametrize(
    "rows,p,red,rk",
    [
        ([[1, 1], [0, 1]], 2, [[1, 0], [0, 1]], 2),
        ([[1, 1], [1, 1]], 2, [[1, 1], [0, 0]], 1),
        ([[2, 4], [1, 2]], 5, [[1, 2], [0, 0]], 1),
    ],
)
def test_rref_examples(rows, p, red, rk):
    r, k, _ = rref(M(rows, p))
    assert r.tolist() == red and k == rk


def test_kernel_examples():
    assert kernel(Matrix.identity(2, 2)).rows == 0
    assert kernel(M([[1, 1]], 2)).tolist() == [[1, 1]]
    assert kernel(Matrix.zeros(1, 3, 3)).rows == 3


def test_solve_examples():
    assert solve(Matrix.identity(2, 2), [1, 0]).tolist() == [[1], [0]]
    assert solve(M([[1, 1], [1, 1]], 2), [1, 0]) is None
    assert solve(M([[1, 1], [0, 1]], 3), [2, 1]).tolist() == [[1], [1]]


def test_invert_examples():
    assert invert(Matrix.identity(3, 5)) == Matrix.identity(3, 5)
    assert invert(M([[0, 1], [1, 0]], 2)) == M([[0, 1], [1, 0]], 2)
    assert invert(M([[1, 1], [0, 1]], 2)) == M([[1, 1], [0, 1]], 2)
    assert invert(M([[1, 1], [1, 1]], 2)) is None
    with pytest.raises(ValueError):
        invert(M([[1, 0, 0], [0, 1, 0]], 2))


def test_kron_examples():
    assert kron(Matrix.identity(2, 2), Matrix.identity(2, 2)) == Matrix.identity(4, 2)
    assert kron(M([[1], [0]], 2), M([[0], [1]], 2)).tolist() == [[0], [1], [0], [0]]
    assert kron(M([[1], [1]], 2), M([[1], [1]], 2)).tolist() == [[1]] * 4
    with pytest.raises(ValueError):
        kron(Matrix.identity(2, 2), Matrix.identity(2, 3))


def test_extend_to_basis_examples():
    assert extend_to_basis(M([[1, 1]], 2)).tolist() == [[1, 1], [1, 0]]
    full = M([[0, 1], [1, 0]], 3)
    assert extend_to_basis(full) == full
    assert extend_to_basis(Matrix(np.zeros((0, 2), dtype=np.int64), FieldSpec(2)), dim=2) == Matrix.identity(2, 2)
    with pytest.raises(ValueError):
        extend_to_basis(M([[1, 1], [1, 1]], 2))


@pytest.mark.parametrize("shape", [(2, 2), (2, 3)])
def test_rank_nullity_exhaustive(shape):
    for m in all_matrices(2, *shape):
        assert rank(m) + kernel(m).rows == m.cols
        assert (m @ kernel(m).T).is_zero()


def test_rref_is_canonical_for_row_spaces():
    # two row sets over Z_2 span the same space iff their reduced forms agree
    mats = list(all_matrices(2, 2, 3))
    for a, b in itertools.combinations(mats[::3], 2):
        same = all(in_span(a, r) for r in b.tolist()) and all(in_span(b, r) for r in a.tolist())
        assert same == (row_space(a) == row_space(b))


@given(st.sampled_from([2, 3, 5, 7]).flatmap(matrices))
def test_rref_properties(m):
    red, k, pivots = rref(m)
    assert rref(red)[0] == red
    data = red.data
    assert not data[k:].any()
    for r, c in enumerate(pivots):
        assert data[r, c] == 1
        assert np.count_nonzero(data[:, c]) == 1
    assert pivots == sorted(pivots)


@given(st.sampled_from([2, 3, 5]).flatmap(lambda p: matrices(p, 4, 4)))
def test_invert_contract(m):
    if m.rows != m.cols:
        return
    inverse = invert(m)
    if inverse is None:
        assert rank(m) < m.rows
    else:
        assert inverse @ m == Matrix.identity(m.rows, m.field)


@given(st.data())
def test_kron_mixed_product(data):
    p = data.draw(st.sampled_from([2, 3, 5]))
    n1, n2, n3, m1, m2, m3 = (data.draw(st.integers(1, 3)) for _ in range(6))

    def draw(r, c):
        return M(data.draw(st.lists(st.lists(st.integers(0, p - 1), min_size=c, max_size=c), min_size=r, max_size=r)), p)

    a, c = draw(n1, n2), draw(n2, n3)
    b, d = draw(m1, m2), draw(m2, m3)
    assert kron(a, b) @ kron(c, d) == kron(a @ c, b @ d)


@given(st.sampled_from([2, 3, 5]).flatmap(matrices), st.data())
def test_solve_contract(a, data):
    b = data.draw(st.lists(st.integers(0, a.p - 1), min_size=a.rows, max_size=a.rows))
    x = solve(a, b)
    if x is None:
        aug = Matrix(np.hstack([a.data, np.array(b).reshape(-1, 1)]), a.field)
        assert rank(aug) > rank(a)
    else:
        assert (a @ x).tolist() == [[v] for v in b]


@given(st.sampled_from([2, 3, 5]).flatmap(matrices))
def test_extend_to_basis_contract(m):
    rows = row_space(m)
    full = extend_to_basis(rows, dim=m.cols)
    assert full.shape == (m.cols, m.cols)
    assert invert(full) is not None
    assert full.data[: rows.rows].tolist() == rows.tolist()


def test_large_prime_uses_exact_arithmetic():
    p = 2**31 - 1
    a = M([[p - 1, p - 2], [3, p - 1]], p)
    inverse = invert(a)
    assert inverse @ a == Matrix.identity(2, p)
