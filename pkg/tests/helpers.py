"""Shared builders for small random problems."""

import numpy as np
import scipy.sparse as sp

from gist.linalg import SparseMatrix
from gist.losses import Loss


def random_sparse(rng, n, d, density=0.3):
    m = sp.random(n, d, density=density, random_state=rng, format="csr",
                  data_rvs=rng.standard_normal)
    return SparseMatrix.from_scipy(m)


def random_loss(rng, kind, n=30, d=10, density=0.4):
    X = random_sparse(rng, n, d, density)
    if kind == "logistic":
        y = rng.choice([-1.0, 1.0], size=n)
    else:
        y = rng.standard_normal(n)
    return Loss(kind, X, y)


def ista(loss, lam, iters, step=None):
    """Fixed-step proximal gradient for ``loss + lam ||w||_1``, written
    independently of the package's solver."""
    L = loss.lipschitz_bound().beta if step is None else 1.0 / step
    w = np.zeros(loss.n_features)
    for _ in range(iters):
        u = w - loss.gradient(w) / L
        w = np.sign(u) * np.maximum(np.abs(u) - lam / L, 0.0)
    return w
