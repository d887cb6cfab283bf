"""Smooth data-fitting terms: averaged least squares and logistic loss."""

import enum
from dataclasses import dataclass

import numpy as np
from scipy.special import expit

from .linalg import DimensionError, SparseMatrix, as_vector

__all__ = ["LossKind", "Loss", "LipschitzBound", "loss_value", "loss_gradient",
           "lipschitz_bound", "power_iteration"]

POWER_SEED = 20130617
POWER_MAX_ITERS = 200
POWER_TOL = 1e-8
LIPSCHITZ_INFLATION = 1.01


class LossKind(str, enum.Enum):
    LEAST_SQUARES = "least_squares"
    LOGISTIC = "logistic"


@dataclass(frozen=True)
class LipschitzBound:
    beta: float

    def __post_init__(self):
        if not self.beta >= 0:
            raise ValueError("Lipschitz bound must be nonnegative")


class Loss:
    """``l(w) = (1/2n)||Xw - y||^2`` or ``(1/n) sum log(1 + exp(-y_i x_i.w))``.

    Parameters
    ----------
    kind : LossKind or str
    X : SparseMatrix
        Design matrix, one sample per row.
    y : array_like
        Targets. For the logistic loss every entry must be exactly -1 or +1.
    """

    def __init__(self, kind, X, y):
        self.kind = LossKind(kind)
        if not isinstance(X, SparseMatrix):
            X = SparseMatrix.from_scipy(X)
        y = as_vector(y)
        if X.n_rows < 1 or X.n_cols < 1:
            raise ValueError("need at least one sample and one feature")
        if y.shape[0] != X.n_rows:
            raise DimensionError("y has length %d, X has %d rows" % (y.shape[0], X.n_rows))
        if self.kind is LossKind.LOGISTIC and not np.all(np.abs(y) == 1.0):
            raise ValueError("logistic labels must be -1 or +1")
        self.X = X
        self.y = y
        self.y.flags.writeable = False
        self._beta = None

    @property
    def n_samples(self):
        return self.X.n_rows

    @property
    def n_features(self):
        return self.X.n_cols

    def _check(self, w):
        w = np.asarray(w, dtype=np.float64)
        if w.shape != (self.X.n_cols,):
            raise DimensionError("w has shape %s, expected (%d,)" % (w.shape, self.X.n_cols))
        return w

    def value(self, w):
        w = self._check(w)
        Xw = self.X.matvec(w)
        n = self.X.n_rows
        if self.kind is LossKind.LEAST_SQUARES:
            r = Xw - self.y
            return float(r @ r) / (2 * n)
        z = -self.y * Xw
        # log(1 + e^z) without overflow: z + log1p(e^-z) for z > 0.
        pos = z > 0
        terms = np.empty_like(z)
        terms[pos] = z[pos] + np.log1p(np.exp(-z[pos]))
        terms[~pos] = np.log1p(np.exp(z[~pos]))
        return float(np.sum(terms)) / n

    def gradient(self, w):
        w = self._check(w)
        Xw = self.X.matvec(w)
        n = self.X.n_rows
        if self.kind is LossKind.LEAST_SQUARES:
            return self.X.rmatvec(Xw - self.y) / n
        coef = -self.y * expit(-self.y * Xw)
        return self.X.rmatvec(coef) / n

    def lipschitz_bound(self):
        """Upper bound on the Lipschitz constant of the gradient (cached)."""
        if self._beta is None:
            lmax = power_iteration(self.X)
            scale = 1.0 if self.kind is LossKind.LEAST_SQUARES else 0.25
            self._beta = LipschitzBound(LIPSCHITZ_INFLATION * scale * lmax / self.X.n_rows)
        return self._beta

    def __repr__(self):
        return "Loss(%s, n=%d, d=%d)" % (self.kind.value, self.n_samples, self.n_features)


def power_iteration(X, max_iters=POWER_MAX_ITERS, tol=POWER_TOL, seed=POWER_SEED):
    """Largest eigenvalue of ``X^T X`` by power iteration on a fixed seed."""
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(X.n_cols)
    v /= np.linalg.norm(v)
    est = 0.0
    for _ in range(max_iters):
        z = X.rmatvec(X.matvec(v))
        new = float(v @ z)
        nz = np.linalg.norm(z)
        if nz == 0.0:
            return 0.0
        v = z / nz
        if abs(new - est) <= tol * max(abs(new), 1e-300):
            est = new
            break
        est = new
    # Rayleigh quotient of the final iterate is the tighter lower estimate.
    z = X.rmatvec(X.matvec(v))
    return max(est, float(v @ z))


def loss_value(L, w):
    return L.value(w)


def loss_gradient(L, w):
    return L.gradient(w)


def lipschitz_bound(L):
    return L.lipschitz_bound()
