"""LIBSVM text I/O, multi-class to binary labels, synthetic sparse problems."""

import io
import math
from dataclasses import dataclass

import numpy as np
from scipy.special import expit

from .linalg import SparseMatrix

__all__ = ["Dataset", "LibsvmParseError", "parse_libsvm", "load_libsvm",
           "dump_libsvm", "binarize_multiclass", "synthesize"]


class LibsvmParseError(ValueError):
    def __init__(self, line_no, message):
        super().__init__("line %d: %s" % (line_no, message))
        self.line_no = line_no


@dataclass(frozen=True)
class Dataset:
    X: SparseMatrix
    y: np.ndarray
    feature_count: int
    class_labels_seen: tuple

    def __post_init__(self):
        if self.y.shape != (self.X.n_rows,):
            raise ValueError("y must have one entry per row of X")

    @property
    def n_samples(self):
        return self.X.n_rows


def _lines(source):
    if isinstance(source, str):
        source = io.StringIO(source)
    for line in source:
        if isinstance(line, bytes):
            line = line.decode("utf-8")
        yield line


def parse_libsvm(source, expected_dims=None):
    """Parse ``<label> <idx>:<val> ...`` lines into a :class:`Dataset`.

    Indices are 1-based and must be strictly increasing within a line. Blank
    lines and lines starting with ``#`` are skipped.

    Parameters
    ----------
    source : str or iterable of lines
        Text of the file, or an open text/binary stream.
    expected_dims : int, optional
        Number of features. The result has ``max(expected_dims, max index)``
        columns; an index above ``expected_dims`` is an error.

    Raises
    ------
    LibsvmParseError
        On malformed tokens, non-increasing or non-positive indices, non-finite
        values, or when no samples are present.
    """
    labels = []
    offsets = [0]
    cols = []
    vals = []
    max_idx = 0
    last_line = 0
    for line_no, raw in enumerate(_lines(source), start=1):
        last_line = line_no
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        tokens = line.split()
        try:
            label = float(tokens[0])
        except ValueError:
            raise LibsvmParseError(line_no, "bad label %r" % tokens[0]) from None
        if not math.isfinite(label):
            raise LibsvmParseError(line_no, "non-finite label")
        prev = 0
        for tok in tokens[1:]:
            idx_s, sep, val_s = tok.partition(":")
            if not sep:
                raise LibsvmParseError(line_no, "expected idx:value, got %r" % tok)
            try:
                idx = int(idx_s)
                val = float(val_s)
            except ValueError:
                raise LibsvmParseError(line_no, "malformed token %r" % tok) from None
            if idx < 1:
                raise LibsvmParseError(line_no, "index %d is below 1" % idx)
            if idx <= prev:
                raise LibsvmParseError(line_no, "index %d does not increase" % idx)
            if not math.isfinite(val):
                raise LibsvmParseError(line_no, "non-finite value in %r" % tok)
            if expected_dims is not None and idx > expected_dims:
                raise LibsvmParseError(line_no, "index %d exceeds %d features"
                                       % (idx, expected_dims))
            prev = idx
            cols.append(idx - 1)
            vals.append(val)
        max_idx = max(max_idx, prev)
        labels.append(label)
        offsets.append(len(cols))
    if not labels:
        raise LibsvmParseError(last_line, "no samples found")
    d = max_idx if expected_dims is None else max(max_idx, int(expected_dims))
    X = SparseMatrix(len(labels), d, offsets, cols, vals)
    y = np.array(labels, dtype=np.float64)
    return Dataset(X=X, y=y, feature_count=d, class_labels_seen=tuple(sorted(set(labels))))


def load_libsvm(path, expected_dims=None):
    with open(path, "r", encoding="utf-8") as fh:
        return parse_libsvm(fh, expected_dims)


def _fmt(x):
    if float(x).is_integer() and abs(x) < 1e15:
        return "%d" % x
    return repr(float(x))


def dump_libsvm(ds, stream=None):
    """Write ``ds`` in LIBSVM format; returns the text when ``stream`` is None."""
    out = io.StringIO() if stream is None else stream
    X = ds.X
    offsets, cols, vals = X.row_offsets, X.col_indices, X.nonzero_values
    for i in range(X.n_rows):
        parts = [_fmt(ds.y[i])]
        for j in range(offsets[i], offsets[i + 1]):
            parts.append("%d:%s" % (cols[j] + 1, repr(float(vals[j]))))
        out.write(" ".join(parts) + "\n")
    if stream is None:
        return out.getvalue()
    return None


def binarize_multiclass(ds):
    """Map labels to +/-1: the first ``ceil(c/2)`` classes (ascending) become +1.

    Data already labelled with exactly -1 and +1 is returned unchanged.
    """
    classes = sorted(set(ds.y.tolist()))
    if len(classes) < 2:
        raise ValueError("binarization needs at least two classes, found %d" % len(classes))
    if set(classes) == {-1.0, 1.0}:
        return ds
    positive = set(classes[:math.ceil(len(classes) / 2)])
    y = np.array([1.0 if v in positive else -1.0 for v in ds.y.tolist()])
    return Dataset(X=ds.X, y=y, feature_count=ds.feature_count,
                   class_labels_seen=ds.class_labels_seen)


def synthesize(n, d, density, sparsity_of_truth, noise=0.0, seed=0, task="logistic",
               scale=1.0):
    """Random sparse problem with a planted sparse weight vector.

    Each row keeps a Binomial(d, density) subset of columns with entries
    ``+/-scale``.
    ``true_w`` has ``sparsity_of_truth`` standard-normal nonzeros. Logistic
    labels are drawn from the model's class probabilities; least-squares
    targets are ``X true_w`` plus ``noise`` times standard normal noise.

    Returns
    -------
    (Dataset, true_w)
    """
    if n < 1 or d < 1:
        raise ValueError("n and d must be positive")
    if not 0 < density <= 1:
        raise ValueError("density must lie in (0, 1]")
    if not 0 <= sparsity_of_truth <= d:
        raise ValueError("sparsity_of_truth must lie in [0, d]")
    if not scale > 0:
        raise ValueError("scale must be positive")
    if not noise >= 0:
        raise ValueError("noise must be nonnegative")
    if task not in ("logistic", "least_squares"):
        raise ValueError("task must be 'logistic' or 'least_squares'")

    rng = np.random.default_rng(seed)
    counts = rng.binomial(d, density, size=n)
    offsets = np.concatenate([[0], np.cumsum(counts)])
    cols = np.empty(offsets[-1], dtype=np.int64)
    for i in range(n):
        cols[offsets[i]:offsets[i + 1]] = np.sort(rng.choice(d, counts[i], replace=False))
    vals = scale * rng.choice([-1.0, 1.0], size=offsets[-1])
    X = SparseMatrix(n, d, offsets, cols, vals)

    true_w = np.zeros(d)
    support = rng.choice(d, sparsity_of_truth, replace=False)
    true_w[support] = rng.standard_normal(sparsity_of_truth)
    margin = X.matvec(true_w)
    if task == "logistic":
        y = np.where(rng.random(n) < expit(margin), 1.0, -1.0)
    else:
        y = margin + noise * rng.standard_normal(n)
    labels = tuple(sorted(set(y.tolist()))) if task == "logistic" else ()
    return Dataset(X=X, y=y, feature_count=d, class_labels_seen=labels), true_w
