import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from gist.linalg import (DimensionError, SparseMatrix, axpy, dot, matvec,
                         matvec_transpose, norm_sq, sub)

from helpers import random_sparse


def test_identity_matvec():
    eye = SparseMatrix(2, 2, [0, 1, 2], [0, 1], [1.0, 1.0])
    np.testing.assert_array_equal(matvec(eye, np.array([3.0, -1.0])), [3.0, -1.0])
    np.testing.assert_array_equal(matvec_transpose(eye, np.array([3.0, -1.0])), [3.0, -1.0])


def test_zero_row_gives_zero_entry():
    A = SparseMatrix(3, 2, [0, 1, 1, 2], [0, 1], [2.0, 5.0])
    out = matvec(A, np.array([1.5, -2.0]))
    assert out[1] == 0.0
    np.testing.assert_array_equal(out, [3.0, 0.0, -10.0])


def test_single_row_transpose():
    A = SparseMatrix.from_dense([[1.0, 2.0, 0.0]])
    np.testing.assert_array_equal(matvec_transpose(A, np.array([2.0])), [2.0, 4.0, 0.0])


def _loop_matvec(dense, v):
    out = np.zeros(dense.shape[0])
    for i in range(dense.shape[0]):
        for j in range(dense.shape[1]):
            out[i] += dense[i, j] * v[j]
    return out


def test_random_against_dense_loops():
    rng = np.random.default_rng(3)
    # 5x4 with exactly 6 nonzeros
    dense = np.zeros((5, 4))
    idx = rng.choice(20, 6, replace=False)
    dense.flat[idx] = rng.standard_normal(6)
    A = SparseMatrix.from_dense(dense)
    assert A.nnz == 6
    v = rng.standard_normal(4)
    np.testing.assert_allclose(matvec(A, v), _loop_matvec(dense, v), rtol=1e-14, atol=1e-14)
    u = rng.standard_normal(5)
    np.testing.assert_allclose(matvec_transpose(A, u), _loop_matvec(dense.T, u),
                               rtol=1e-14, atol=1e-14)


@settings(max_examples=60, deadline=None)
@given(n=st.integers(1, 12), d=st.integers(1, 12), seed=st.integers(0, 10**6))
def test_adjointness(n, d, seed):
    rng = np.random.default_rng(seed)
    A = random_sparse(rng, n, d, 0.4)
    u, v = rng.standard_normal(n), rng.standard_normal(d)
    lhs, rhs = dot(matvec(A, v), u), dot(v, matvec_transpose(A, u))
    assert abs(lhs - rhs) <= 1e-10 * max(1.0, abs(lhs))


def test_all_zero_values():
    A = SparseMatrix(2, 3, [0, 2, 3], [0, 2, 1], [0.0, 0.0, 0.0])
    np.testing.assert_array_equal(matvec(A, np.ones(3)), np.zeros(2))


def test_vector_kernels():
    assert dot(np.array([1.0, 0.0]), np.array([0.0, 1.0])) == 0.0
    assert norm_sq(np.array([3.0, 4.0])) == 25.0
    np.testing.assert_array_equal(axpy(2.0, np.array([1.0, 2.0]), np.array([1.0, 1.0])),
                                  [3.0, 5.0])
    np.testing.assert_array_equal(sub(np.array([1.0, 2.0]), np.array([0.5, 4.0])), [0.5, -2.0])
    rng = np.random.default_rng(0)
    a, b = rng.standard_normal(50), rng.standard_normal(50)
    ref = 0.0
    for x, y in zip(a, b):
        ref += x * y
    assert dot(a, b) == pytest.approx(ref, rel=1e-12)


@pytest.mark.parametrize("fn", [dot, sub])
def test_length_mismatch(fn):
    with pytest.raises(DimensionError):
        fn(np.ones(2), np.ones(3))


def test_matvec_dimension_errors():
    A = SparseMatrix.from_dense(np.eye(3)[:2])
    with pytest.raises(DimensionError):
        matvec(A, np.ones(2))
    with pytest.raises(DimensionError):
        matvec_transpose(A, np.ones(3))


@pytest.mark.parametrize("args", [
    (2, 2, [1, 1, 2], [0, 1], [1.0, 1.0]),        # offsets[0] != 0
    (2, 2, [0, 2, 1], [0, 1], [1.0, 1.0]),        # decreasing offsets
    (1, 2, [0, 2], [1, 1], [1.0, 1.0]),           # duplicate column
    (1, 3, [0, 2], [2, 0], [1.0, 1.0]),           # unsorted columns
    (1, 2, [0, 1], [2], [1.0]),                   # column out of range
    (1, 2, [0, 2], [0], [1.0]),                   # wrong nnz
])
def test_invalid_csr(args):
    with pytest.raises(ValueError):
        SparseMatrix(*args)


def test_columns_may_restart_across_rows():
    A = SparseMatrix(2, 3, [0, 2, 4], [1, 2, 0, 1], [1.0, 2.0, 3.0, 4.0])
    np.testing.assert_array_equal(A.to_dense(), [[0, 1, 2], [3, 4, 0]])


def test_immutable_storage():
    A = SparseMatrix.from_dense(np.eye(2))
    with pytest.raises(ValueError):
        A.nonzero_values[0] = 5.0
