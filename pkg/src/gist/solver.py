"""General iterative shrinkage and thresholding (GIST).

Each outer iteration takes a gradient step of length ``1/t`` on the loss and
then applies the penalty's proximal map. ``t`` starts from a constant, the
previous accepted value or a Barzilai-Borwein estimate, and is multiplied by
``eta`` until a monotone or non-monotone sufficient-decrease test accepts the
step.
"""

import enum
import time
from collections import deque
from dataclasses import dataclass, field, replace

import numpy as np

from .linalg import DimensionError
from .penalties import prox

__all__ = ["StepInit", "LineSearch", "Termination", "SolverConfig",
           "IterationRecord", "SolveResult", "bb_init", "check_monotone",
           "check_nonmonotone", "gist_step", "solve", "objective",
           "critical_point_residual", "iterate", "replay_line_search",
           "rate_bound_holds", "start_point"]


class StepInit(str, enum.Enum):
    CONSTANT_ONE = "constant_one"
    PREVIOUS_T = "previous_t"
    BARZILAI_BORWEIN = "barzilai_borwein"


class LineSearch(str, enum.Enum):
    MONOTONE = "monotone"
    NONMONOTONE = "nonmonotone"


class Termination(str, enum.Enum):
    RELATIVE_CHANGE = "relative_change"
    MAX_ITERS = "max_iters"
    LINE_SEARCH_EXHAUSTED = "line_search_exhausted"


@dataclass(frozen=True)
class SolverConfig:
    """Knobs of the outer loop and line search. Defaults follow the usual
    experimental protocol: sigma=1e-5, m=5, eta=2, t in [1e-30, 1e30],
    relative objective change 1e-5, at most 1000 iterations."""

    eta: float = 2.0
    sigma: float = 1e-5
    window_m: int = 5
    t_min: float = 1e-30
    t_max: float = 1e30
    step_init: StepInit = StepInit.BARZILAI_BORWEIN
    line_search: LineSearch = LineSearch.NONMONOTONE
    max_outer_iters: int = 1000
    rel_tol: float = 1e-5
    max_line_search_trials: int = 100

    def __post_init__(self):
        object.__setattr__(self, "step_init", StepInit(self.step_init))
        object.__setattr__(self, "line_search", LineSearch(self.line_search))
        if not self.eta > 1:
            raise ValueError("eta must be > 1")
        if not 0 < self.sigma < 1:
            raise ValueError("sigma must lie in (0, 1)")
        if not (int(self.window_m) == self.window_m and self.window_m > 1):
            raise ValueError("window_m must be an integer > 1")
        if not 0 < self.t_min < self.t_max:
            raise ValueError("need 0 < t_min < t_max")
        if self.max_outer_iters < 1 or self.max_line_search_trials < 1:
            raise ValueError("iteration limits must be positive")
        if not self.rel_tol > 0:
            raise ValueError("rel_tol must be positive")

    def replace(self, **changes):
        return replace(self, **changes)


@dataclass(frozen=True)
class IterationRecord:
    k: int
    objective: float
    t_accepted: float
    line_search_trials: int
    delta_w_norm_sq: float
    elapsed_seconds: float
    t_initial: float
    stage: int = 0


@dataclass
class SolveResult:
    w_final: np.ndarray
    trace: list
    termination: Termination
    critical_point_residual: float
    initial_objective: float
    # Inner solves of a multi-stage run, one SolveResult per stage.
    stages: list = field(default_factory=list)

    @property
    def final_objective(self):
        return self.trace[-1].objective if self.trace else self.initial_objective

    @property
    def iterations(self):
        return len(self.trace)

    @property
    def total_line_search_trials(self):
        return sum(r.line_search_trials for r in self.trace)

    def objectives(self):
        """``[f(w0), f(w1), ...]`` as recorded."""
        return [self.initial_objective] + [r.objective for r in self.trace]


def bb_init(x_k, y_k, t_min, t_max):
    """Barzilai-Borwein estimate ``<x, y> / <x, x>`` clamped to ``[t_min, t_max]``.

    Falls back to ``t_min`` (the longest step) when the curvature estimate is
    zero, negative or undefined.
    """
    x_k = np.asarray(x_k, dtype=np.float64)
    y_k = np.asarray(y_k, dtype=np.float64)
    if x_k.shape != y_k.shape:
        raise DimensionError("bb_init: length mismatch")
    xx = float(x_k @ x_k)
    if xx == 0.0:
        return t_min
    t = float(x_k @ y_k) / xx
    if not np.isfinite(t) or t <= 0:
        return t_min
    return min(max(t, t_min), t_max)


def check_monotone(f_next, f_curr, t, delta_sq, sigma):
    return f_next <= f_curr - 0.5 * sigma * t * delta_sq


def check_nonmonotone(f_next, recent_objectives, t, delta_sq, sigma):
    """Accept if ``f_next`` beats the max of the recent accepted objectives."""
    if len(recent_objectives) == 0:
        raise ValueError("recent_objectives must not be empty")
    return f_next <= max(recent_objectives) - 0.5 * sigma * t * delta_sq


def objective(loss, penalty, w):
    return loss.value(w) + penalty.value(w)


def gist_step(loss, penalty, w_k, t, grad=None):
    """Minimizer of the linearized-loss surrogate: ``prox(w_k - grad/t, t)``."""
    if grad is None:
        grad = loss.gradient(w_k)
    return prox(penalty, w_k - grad / t, t)


def critical_point_residual(loss, penalty, w, grad=None):
    """Violation of ``0 in grad l(w) + d r1(w) - d r2(w)`` in the sup norm.

    ``r1`` is the weighted l1 norm, so its subdifferential is exact. For ``r2``
    only the single subgradient returned by ``r2_subgradient`` is tried, which
    makes the value an upper bound on the true distance to stationarity.
    """
    w = np.asarray(w, dtype=np.float64)
    if grad is None:
        grad = loss.gradient(w)
    g = grad - penalty.r2_subgradient(w)
    lam1 = penalty.l1_weight
    nz = w != 0
    res = np.where(nz, np.abs(g + lam1 * np.sign(w)), np.maximum(np.abs(g) - lam1, 0.0))
    return float(res.max()) if res.size else 0.0


def _initial_t(config, k, t_prev, x_k, y_k):
    if k == 0 or config.step_init is StepInit.CONSTANT_ONE:
        t = 1.0
    elif config.step_init is StepInit.PREVIOUS_T:
        t = t_prev
    else:
        return bb_init(x_k, y_k, config.t_min, config.t_max)
    return min(max(t, config.t_min), config.t_max)


def iterate(func, grad, step, config, w0, clock_start=None, stage=0, on_accept=None):
    """Run the outer loop on an arbitrary smooth-plus-proximable problem.

    Parameters
    ----------
    func : callable
        ``func(w)`` returns the objective tested by the line search.
    grad : callable
        ``grad(w)`` returns the gradient of the smooth part.
    step : callable
        ``step(w, g, t)`` returns the next trial iterate.
    config : SolverConfig
    w0 : ndarray
    clock_start : float, optional
        ``time.perf_counter()`` origin for elapsed times.
    on_accept : callable, optional
        Called as ``on_accept(record, w_next)`` after each accepted step.

    Returns
    -------
    w, trace, termination, initial objective, gradient at ``w``
    """
    start = time.perf_counter() if clock_start is None else clock_start
    w = np.array(w0, dtype=np.float64)
    f = func(w)
    g = grad(w)
    history = deque([f], maxlen=config.window_m)
    monotone = config.line_search is LineSearch.MONOTONE
    f0 = f
    trace = []
    t_prev = None
    x_k = y_k = None
    termination = Termination.MAX_ITERS

    for k in range(config.max_outer_iters):
        t = t0 = _initial_t(config, k, t_prev, x_k, y_k)
        for trial in range(1, config.max_line_search_trials + 1):
            w_new = step(w, g, t)
            f_new = func(w_new)
            d = w_new - w
            delta = float(d @ d)
            if monotone:
                ok = check_monotone(f_new, f, t, delta, config.sigma)
            else:
                ok = check_nonmonotone(f_new, history, t, delta, config.sigma)
            if ok:
                break
            t *= config.eta
        else:
            termination = Termination.LINE_SEARCH_EXHAUSTED
            break

        rec = IterationRecord(k=k, objective=f_new, t_accepted=t, line_search_trials=trial,
                              delta_w_norm_sq=delta, elapsed_seconds=time.perf_counter() - start,
                              t_initial=t0, stage=stage)
        trace.append(rec)
        if on_accept is not None:
            on_accept(rec, w_new)
        g_new = grad(w_new)
        x_k, y_k = d, g_new - g
        w, g, t_prev = w_new, g_new, t
        f_old, f = f, f_new
        history.append(f)
        if abs(f - f_old) / max(1.0, abs(f_old)) < config.rel_tol:
            termination = Termination.RELATIVE_CHANGE
            break
    return w, trace, termination, f0, g


def solve(loss, penalty, config=None, w0=None):
    """Minimize ``loss(w) + penalty(w)`` with GIST.

    Parameters
    ----------
    loss : Loss
    penalty : Penalty
    config : SolverConfig, optional
        Defaults to BB initialization with the non-monotone line search.
    w0 : array_like, optional
        Starting point, zero by default.

    Returns
    -------
    SolveResult
    """
    config = SolverConfig() if config is None else config
    w0 = start_point(loss, w0)

    def step(w, g, t):
        return prox(penalty, w - g / t, t)

    w, trace, term, f0, g = iterate(lambda w: objective(loss, penalty, w), loss.gradient,
                                    step, config, w0)
    return SolveResult(w_final=w, trace=trace, termination=term,
                       critical_point_residual=critical_point_residual(loss, penalty, w, g),
                       initial_objective=f0)


def start_point(loss, w0):
    if w0 is None:
        return np.zeros(loss.n_features)
    w0 = np.array(w0, dtype=np.float64)
    if w0.shape != (loss.n_features,):
        raise DimensionError("w0 has shape %s, expected (%d,)" % (w0.shape, loss.n_features))
    if not np.all(np.isfinite(w0)):
        raise ValueError("w0 must be finite")
    return w0


def replay_line_search(result, config):
    """Indices of records whose acceptance test fails when recomputed.

    Windows for the non-monotone test are rebuilt from the recorded
    objectives, so an empty list means the trace is self-consistent.
    """
    objs = result.objectives()
    m = config.window_m
    bad = []
    for i, rec in enumerate(result.trace):
        if config.line_search is LineSearch.MONOTONE:
            ok = check_monotone(rec.objective, objs[i], rec.t_accepted,
                                rec.delta_w_norm_sq, config.sigma)
        else:
            ok = check_nonmonotone(rec.objective, objs[max(0, i - m + 1):i + 1],
                                   rec.t_accepted, rec.delta_w_norm_sq, config.sigma)
        if not ok:
            bad.append(i)
    return bad


def rate_bound_holds(result, sigma):
    """Check ``min_{k<=n} |dw_k|^2 <= 2 (f0 - f_final) / (n sigma t_lo)`` for all n >= 1.

    ``t_lo`` is the smallest accepted ``t`` in the trace. Only meaningful for
    monotone traces.
    """
    if len(result.trace) < 2:
        return True
    deltas = np.array([r.delta_w_norm_sq for r in result.trace])
    t_lo = min(r.t_accepted for r in result.trace)
    drop = result.initial_objective - result.final_objective
    running_min = np.minimum.accumulate(deltas)
    for n in range(1, len(deltas)):
        if running_min[n] > 2 * drop / (n * sigma * t_lo):
            return False
    return True
