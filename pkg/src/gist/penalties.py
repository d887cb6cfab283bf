"""Separable sparsity penalties and their closed-form proximal maps.

Every penalty is ``r(w) = sum_i r_i(w_i)`` with ``r_i`` even and nondecreasing
in ``|w_i|``, written as a difference of convex functions ``r1 - r2`` where
``r1 = l1_weight * ||w||_1``.

The proximal problem solved per coordinate is::

    h(w) = 0.5 * (w - u)**2 + r_i(w) / t

Non-convex families are handled by enumerating a small candidate set (the
minimizers of ``h`` restricted to each smooth piece of ``r_i``) and keeping the
candidate with the lowest ``h``.
"""

import enum
import math
from dataclasses import dataclass

import numba
import numpy as np

__all__ = ["Family", "Penalty", "ProxScalarProblem", "penalty_value",
           "dc_parts", "r2_subgradient", "prox_scalar", "prox",
           "prox_candidates", "surrogate", "soft_threshold",
           "brute_force_prox_oracle"]

# Candidates whose h differs from the best by less than this (relative to
# max(1, |h_min|)) are treated as ties.
TIE_RTOL = 1e-12


class Family(str, enum.Enum):
    L1 = "l1"
    LSP = "lsp"
    SCAD = "scad"
    MCP = "mcp"
    CAPPED_L1 = "capped_l1"


_CODE = {Family.L1: 0, Family.LSP: 1, Family.SCAD: 2, Family.MCP: 3,
         Family.CAPPED_L1: 4}


@numba.njit(cache=True)
def _r_scalar(code, lam, theta, a):
    # a = |w|
    if code == 0:
        return lam * a
    if code == 1:
        return lam * math.log1p(a / theta)
    if code == 2:
        if a <= lam:
            return lam * a
        if a <= theta * lam:
            return (-a * a + 2 * theta * lam * a - lam * lam) / (2 * (theta - 1))
        return (theta + 1) * lam * lam / 2
    if code == 3:
        if a <= theta * lam:
            return lam * a - a * a / (2 * theta)
        return theta * lam * lam / 2
    return lam * min(a, theta)


@numba.njit(cache=True)
def _r_array(code, lam, theta, w):
    out = np.empty(w.shape[0])
    for i in range(w.shape[0]):
        out[i] = _r_scalar(code, lam, theta, abs(w[i]))
    return out


@numba.njit(cache=True)
def _grid_scan(code, lam, theta, u, t, B, step, k_lo, k_hi):
    best_w = 0.0
    best_h = np.inf
    for k in range(k_lo, k_hi + 1):
        w = -B + k * step
        h = 0.5 * (w - u) ** 2 + _r_scalar(code, lam, theta, abs(w)) / t
        if h < best_h:
            best_h = h
            best_w = w
    return best_w


@dataclass(frozen=True)
class Penalty:
    """A penalty family with regularization weight ``lam`` and shape ``theta``.

    ``theta`` is ignored for L1. SCAD requires ``theta > 2``; the other
    non-convex families require ``theta > 0``.
    """

    family: Family
    lam: float
    theta: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "family", Family(self.family))
        lam = float(self.lam)
        theta = float(self.theta)
        if not (np.isfinite(lam) and lam > 0):
            raise ValueError("lambda must be a positive finite number, got %r" % self.lam)
        if self.family is not Family.L1:
            if not np.isfinite(theta):
                raise ValueError("theta must be finite")
            if self.family is Family.SCAD and not theta > 2:
                raise ValueError("SCAD requires theta > 2, got %r" % self.theta)
            if not theta > 0:
                raise ValueError("%s requires theta > 0, got %r"
                                 % (self.family.value, self.theta))
        object.__setattr__(self, "lam", lam)
        object.__setattr__(self, "theta", theta)

    @property
    def l1_weight(self):
        """Weight of the convex part ``r1 = l1_weight * ||w||_1``.

        Equal to ``lam`` except for LSP with ``theta < 1``: there
        ``lam * |w|`` minus the log-sum term is not convex at 0 (the log term
        has slope ``lam / theta`` there), so ``r1`` must be steepened to
        ``lam / theta`` for ``r2`` to stay convex.
        """
        if self.family is Family.LSP and self.theta < 1:
            return self.lam / self.theta
        return self.lam

    # -- coordinate-wise pieces -------------------------------------------

    def coord_values(self, w):
        """``r_i(w_i)`` for every coordinate."""
        w = np.asarray(w, dtype=np.float64)
        out = _r_array(_CODE[self.family], self.lam, self.theta, w.ravel())
        return out.reshape(w.shape)

    def coord_r2(self, w):
        """``r2_i(w_i)``, the concave correction, per coordinate."""
        a = np.abs(np.asarray(w, dtype=np.float64))
        lam, theta = self.lam, self.theta
        fam = self.family
        if fam is Family.L1:
            return np.zeros_like(a)
        if fam is Family.LSP:
            return self.l1_weight * a - lam * np.log1p(a / theta)
        if fam is Family.SCAD:
            mid = (a * a - 2 * lam * a + lam * lam) / (2 * (theta - 1))
            return np.where(a <= lam, 0.0,
                            np.where(a <= theta * lam, mid,
                                     lam * a - (theta + 1) * lam * lam / 2))
        if fam is Family.MCP:
            return np.where(a <= theta * lam, a * a / (2 * theta),
                            lam * a - theta * lam * lam / 2)
        return lam * np.maximum(a - theta, 0.0)

    def coord_r2_subgradient(self, w):
        w = np.asarray(w, dtype=np.float64)
        a = np.abs(w)
        s = np.sign(w)
        lam, theta = self.lam, self.theta
        fam = self.family
        if fam is Family.L1:
            return np.zeros_like(w)
        if fam is Family.LSP:
            # r2 has a kink at 0 when theta > 1; 0 lies in its subdifferential.
            return s * (self.l1_weight - lam / (theta + a))
        if fam is Family.SCAD:
            return s * np.where(a <= lam, 0.0,
                                np.where(a <= theta * lam, (a - lam) / (theta - 1), lam))
        if fam is Family.MCP:
            return np.where(a <= theta * lam, w / theta, lam * s)
        # Kink at |w| = theta: take the outer slope, which makes iterates parked
        # exactly on the cap with zero loss gradient stationary.
        return np.where(a >= theta, lam * s, 0.0)

    # -- public vector operations ----------------------------------------

    def value(self, w):
        return float(np.sum(self.coord_values(w)))

    def dc_parts(self, w):
        a = np.abs(np.asarray(w, dtype=np.float64))
        return float(self.l1_weight * np.sum(a)), float(np.sum(self.coord_r2(w)))

    def r2_subgradient(self, w):
        return self.coord_r2_subgradient(w)

    def prox(self, u, t):
        return prox(self, u, t)


@dataclass(frozen=True)
class ProxScalarProblem:
    u: float
    t: float
    penalty: Penalty

    def __post_init__(self):
        if not (self.t > 0):
            raise ValueError("t must be positive")
        if not np.isfinite(self.u):
            raise ValueError("u must be finite")


def penalty_value(p, w):
    return p.value(w)


def dc_parts(p, w):
    """Return ``(r1(w), r2(w))`` with ``r1 - r2 == r``."""
    return p.dc_parts(w)


def r2_subgradient(p, w):
    return p.r2_subgradient(w)


def surrogate(p, w, u, t):
    """Scalar proximal objective ``0.5 (w - u)^2 + r_i(w) / t`` (elementwise)."""
    w = np.asarray(w, dtype=np.float64)
    return 0.5 * (w - u) ** 2 + p.coord_values(w) / t


def soft_threshold(u, thresh):
    u = np.asarray(u, dtype=np.float64) + 0.0
    return np.sign(u) * np.maximum(np.abs(u) - thresh, 0.0)


def _candidates(p, a, t):
    """Candidate minimizers of h on ``w >= 0`` for ``|u| = a``; shape (n, k)."""
    lam, theta = p.lam, p.theta
    fam = p.family
    if fam is Family.LSP:
        disc = t * t * (a - theta) ** 2 - 4 * t * (lam - t * a * theta)
        ok = disc >= 0
        root = np.sqrt(np.where(ok, disc, 0.0))
        hi = np.where(ok, np.maximum((t * (a - theta) + root) / (2 * t), 0.0), 0.0)
        lo = np.where(ok, np.maximum((t * (a - theta) - root) / (2 * t), 0.0), 0.0)
        return np.stack([np.zeros_like(a), hi, lo], axis=1)
    if fam is Family.SCAD:
        x1 = np.minimum(lam, np.maximum(0.0, a - lam / t))
        # On lam <= w <= theta*lam, h'' = 1 - 1/(t (theta - 1)); the stationary
        # point only matters when that piece is strictly convex, otherwise its
        # minimum sits on an endpoint already covered by x1 or x3.
        denom = t * (theta - 1) - 1
        if denom > 0:
            x2 = np.minimum(theta * lam,
                            np.maximum(lam, (t * a * (theta - 1) - theta * lam) / denom))
        else:
            x2 = np.full_like(a, lam)
        x3 = np.maximum(theta * lam, a)
        return np.stack([x1, x2, x3], axis=1)
    if fam is Family.MCP:
        zero = np.zeros_like(a)
        edge = np.full_like(a, theta * lam)
        x2 = np.maximum(theta * lam, a)
        denom = theta * t - 1
        if denom > 0:
            z = np.minimum(theta * lam, np.maximum(0.0, theta * (t * a - lam) / denom))
            return np.stack([zero, edge, z, x2], axis=1)
        return np.stack([zero, edge, x2], axis=1)
    raise ValueError("no candidate set for %s" % fam.value)


def _argmin_candidates(p, cand, a, t):
    h = 0.5 * (cand - a[:, None]) ** 2 + p.coord_values(cand) / t
    hmin = h.min(axis=1, keepdims=True)
    tol = TIE_RTOL * np.maximum(1.0, np.abs(hmin))
    # Candidates are nonnegative here, so "smallest |x| among ties" is a min.
    return np.where(h <= hmin + tol, cand, np.inf).min(axis=1)


def prox(p, u, t):
    """Coordinate-wise global minimizer of ``0.5||w - u||^2 + r(w) / t``.

    Parameters
    ----------
    p : Penalty
    u : array_like
        Point to shrink, typically ``w - grad / t``.
    t : float
        Positive step parameter (inverse step size).

    Returns
    -------
    ndarray
        Same shape as ``u``; every entry has the sign of the matching ``u``.
    """
    t = float(t)
    if not t > 0:
        raise ValueError("t must be positive, got %r" % t)
    u = np.asarray(u, dtype=np.float64) + 0.0  # folds -0.0 into +0.0
    shape = u.shape
    u = u.ravel()
    a = np.abs(u)
    fam = p.family
    lam, theta = p.lam, p.theta

    if fam is Family.L1:
        x = np.maximum(a - lam / t, 0.0)
    elif fam is Family.CAPPED_L1:
        x1 = np.maximum(theta, a)
        x2 = np.minimum(theta, np.maximum(0.0, a - lam / t))
        h1 = 0.5 * (x1 - a) ** 2 + lam * np.minimum(x1, theta) / t
        h2 = 0.5 * (x2 - a) ** 2 + lam * np.minimum(x2, theta) / t
        x = np.where(h1 <= h2, x1, x2)
    else:
        x = _argmin_candidates(p, _candidates(p, a, t), a, t)
    return (np.sign(u) * x).reshape(shape)


def prox_scalar(prob, *args):
    """Scalar prox. Accepts a :class:`ProxScalarProblem` or ``(penalty, u, t)``."""
    if not isinstance(prob, ProxScalarProblem):
        prob = ProxScalarProblem(u=float(args[0]), t=float(args[1]), penalty=prob)
    return float(prox(prob.penalty, np.array([prob.u]), prob.t)[0])


def prox_candidates(p, u, t):
    """The candidate set examined for a scalar ``u`` (signs restored)."""
    u = float(u) + 0.0
    a = np.array([abs(u)])
    s = np.sign(u)
    if p.family is Family.L1:
        cand = [max(abs(u) - p.lam / t, 0.0)]
    elif p.family is Family.CAPPED_L1:
        cand = [max(p.theta, abs(u)), min(p.theta, max(0.0, abs(u) - p.lam / t))]
    else:
        cand = list(_candidates(p, a, t)[0])
    return [float(s * c) for c in cand]


def brute_force_prox_oracle(prob, grid_step, bracket=False):
    """Minimize the scalar prox objective by exhaustive grid search.

    The grid is ``-B, -B + grid_step, ...`` up to ``B`` with
    ``B = |u| + lam/t + theta + 1``; ``h`` is evaluated with the same
    per-coordinate kernel as :func:`penalty_value` and never touches the
    closed-form candidate sets.

    With ``bracket=True`` only the grid points between 0 and ``u`` (padded by
    one step) are scanned. Since every ``r_i`` is even and nondecreasing in
    ``|w|``, no point outside that bracket can beat its projection onto it.
    """
    if not grid_step > 0:
        raise ValueError("grid_step must be positive")
    p, u, t = prob.penalty, float(prob.u), float(prob.t)
    theta = 0.0 if p.family is Family.L1 else p.theta
    B = abs(u) + p.lam / t + theta + 1.0
    k_lo, k_hi = 0, int(np.floor(2 * B / grid_step))
    if bracket:
        lo, hi = min(0.0, u) - grid_step, max(0.0, u) + grid_step
        k_lo = max(k_lo, int(np.floor((lo + B) / grid_step)))
        k_hi = min(k_hi, int(np.ceil((hi + B) / grid_step)))
    return float(_grid_scan(_CODE[p.family], p.lam, p.theta, u, t, B,
                            float(grid_step), k_lo, k_hi))
