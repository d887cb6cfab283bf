"""Dense vector kernels and a compressed sparse-row design matrix.

Dense vectors are plain float64 ``numpy`` arrays. :class:`SparseMatrix` validates
its CSR triplet on construction and delegates products to ``scipy.sparse``.
"""

import numpy as np
import scipy.sparse as sp

__all__ = ["DimensionError", "SparseMatrix", "as_vector", "matvec",
           "matvec_transpose", "dot", "axpy", "norm_sq", "sub"]


class DimensionError(ValueError):
    """Raised when operand lengths do not conform."""


def as_vector(values, check_finite=True):
    """Return ``values`` as a 1-d float64 array, rejecting NaN/Inf if asked."""
    v = np.asarray(values, dtype=np.float64)
    if v.ndim != 1:
        raise DimensionError("expected a 1-d vector, got shape %s" % (v.shape,))
    if check_finite and not np.all(np.isfinite(v)):
        raise ValueError("vector contains non-finite entries")
    return v


class SparseMatrix:
    """Immutable CSR matrix with ``n_rows`` samples and ``n_cols`` features.

    Parameters
    ----------
    n_rows, n_cols : int
        Shape of the matrix.
    row_offsets : array of int, length ``n_rows + 1``
        ``row_offsets[i]:row_offsets[i+1]`` slices the entries of row ``i``.
    col_indices : array of int
        Column of each stored entry; strictly increasing within a row.
    nonzero_values : array of float
        Value of each stored entry.
    """

    def __init__(self, n_rows, n_cols, row_offsets, col_indices, nonzero_values):
        n_rows, n_cols = int(n_rows), int(n_cols)
        if n_rows < 0 or n_cols < 0:
            raise ValueError("matrix dimensions must be nonnegative")
        offsets = np.asarray(row_offsets, dtype=np.int64)
        cols = np.asarray(col_indices, dtype=np.int64)
        vals = np.asarray(nonzero_values, dtype=np.float64)

        if offsets.shape != (n_rows + 1,):
            raise ValueError("row_offsets must have length n_rows + 1")
        if offsets[0] != 0:
            raise ValueError("row_offsets[0] must be 0")
        if np.any(np.diff(offsets) < 0):
            raise ValueError("row_offsets must be non-decreasing")
        nnz = int(offsets[-1])
        if cols.shape != (nnz,) or vals.shape != (nnz,):
            raise ValueError("col_indices and nonzero_values must hold "
                             "exactly row_offsets[-1] = %d entries" % nnz)
        if nnz:
            if cols.min() < 0 or cols.max() >= n_cols:
                raise ValueError("column index out of range [0, %d)" % n_cols)
            rows = np.repeat(np.arange(n_rows), np.diff(offsets))
            same_row = rows[1:] == rows[:-1]
            if np.any((np.diff(cols) <= 0) & same_row):
                raise ValueError("column indices must be strictly increasing "
                                 "within each row (duplicates are rejected)")

        self._n_rows = n_rows
        self._n_cols = n_cols
        self._csr = sp.csr_matrix((vals, cols, offsets), shape=(n_rows, n_cols))
        self._csr_t = self._csr.T.tocsr()
        for arr in (self._csr.data, self._csr.indices, self._csr.indptr):
            arr.flags.writeable = False

    @classmethod
    def from_dense(cls, dense):
        """Build from a 2-d array, storing only the nonzero entries."""
        m = sp.csr_matrix(np.asarray(dense, dtype=np.float64))
        m.sort_indices()
        return cls(m.shape[0], m.shape[1], m.indptr, m.indices, m.data)

    @classmethod
    def from_scipy(cls, matrix):
        m = sp.csr_matrix(matrix, dtype=np.float64)
        m.sum_duplicates()
        m.sort_indices()
        return cls(m.shape[0], m.shape[1], m.indptr, m.indices, m.data)

    @property
    def n_rows(self):
        return self._n_rows

    @property
    def n_cols(self):
        return self._n_cols

    @property
    def shape(self):
        return (self._n_rows, self._n_cols)

    @property
    def nnz(self):
        return int(self._csr.indptr[-1])

    @property
    def row_offsets(self):
        return self._csr.indptr

    @property
    def col_indices(self):
        return self._csr.indices

    @property
    def nonzero_values(self):
        return self._csr.data

    def to_dense(self):
        return self._csr.toarray()

    def to_scipy(self):
        """Return a copy as a ``scipy.sparse.csr_matrix``."""
        return self._csr.copy()

    def triplets(self):
        """Yield ``(row, col, value)`` for every stored entry in row order."""
        offsets = self.row_offsets
        for i in range(self._n_rows):
            for j in range(offsets[i], offsets[i + 1]):
                yield i, int(self.col_indices[j]), float(self.nonzero_values[j])

    def matvec(self, v):
        v = np.asarray(v, dtype=np.float64)
        if v.shape != (self._n_cols,):
            raise DimensionError("matvec: expected length %d, got %s"
                                 % (self._n_cols, v.shape))
        return self._csr @ v

    def rmatvec(self, v):
        v = np.asarray(v, dtype=np.float64)
        if v.shape != (self._n_rows,):
            raise DimensionError("matvec_transpose: expected length %d, got %s"
                                 % (self._n_rows, v.shape))
        return self._csr_t @ v

    def __repr__(self):
        return "SparseMatrix(%d x %d, nnz=%d)" % (self._n_rows, self._n_cols, self.nnz)


def matvec(A, v):
    """Return ``A @ v``."""
    return A.matvec(v)


def matvec_transpose(A, v):
    """Return ``A.T @ v``."""
    return A.rmatvec(v)


def _check_same(a, b, name):
    if a.shape != b.shape:
        raise DimensionError("%s: length mismatch %s vs %s" % (name, a.shape, b.shape))


def dot(a, b):
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    _check_same(a, b, "dot")
    return float(np.dot(a, b))


def axpy(alpha, x, y):
    """Return ``alpha * x + y`` as a new array."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    _check_same(x, y, "axpy")
    return alpha * x + y


def norm_sq(a):
    a = np.asarray(a, dtype=np.float64)
    return float(np.dot(a, a))


def sub(a, b):
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    _check_same(a, b, "sub")
    return a - b
