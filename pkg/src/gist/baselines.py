"""Comparison methods built on the same outer loop.

SCP linearizes the concave part ``-r2`` at every iterate and keeps a plain
soft-threshold step. Multi-stage convex relaxation (DC programming) freezes the
linearization for a whole stage and solves the resulting weighted-l1 problem
to tolerance before relinearizing.
"""

import time
from dataclasses import dataclass, field, replace

import numpy as np

from .penalties import Family, Penalty, soft_threshold
from .solver import (LineSearch, SolveResult, SolverConfig, Termination, start_point,
                     critical_point_residual, iterate, objective)

__all__ = ["MsConfig", "scp_step", "scp_solve", "ms_solve"]


@dataclass(frozen=True)
class MsConfig:
    outer_iters: int = 10
    inner: SolverConfig = field(
        default_factory=lambda: SolverConfig(line_search=LineSearch.MONOTONE))

    def __post_init__(self):
        if self.outer_iters < 1:
            raise ValueError("outer_iters must be >= 1")


def scp_step(loss, penalty, w_k, t, grad=None):
    """Soft-threshold step on ``r1`` with ``r2`` linearized at ``w_k``."""
    w_k = np.asarray(w_k, dtype=np.float64)
    if grad is None:
        grad = loss.gradient(w_k)
    s2 = penalty.r2_subgradient(w_k)
    return soft_threshold(w_k - (grad - s2) / t, penalty.l1_weight / t)


def scp_solve(loss, penalty, config=None, w0=None):
    config = SolverConfig() if config is None else config
    w0 = start_point(loss, w0)

    def step(w, g, t):
        return scp_step(loss, penalty, w, t, grad=g)

    w, trace, term, f0, g = iterate(lambda w: objective(loss, penalty, w), loss.gradient,
                                    step, config, w0)
    return SolveResult(w_final=w, trace=trace, termination=term,
                       critical_point_residual=critical_point_residual(loss, penalty, w, g),
                       initial_objective=f0)


def ms_solve(loss, penalty, ms_config=None, w0=None):
    """Multi-stage convex relaxation.

    Stage ``k`` freezes ``s2 = r2_subgradient(w_k)`` and minimizes
    ``l(w) + l1_weight * ||w||_1 - <s2, w>`` from ``w_k`` with the monotone
    proximal-gradient loop. Stages stop once the true objective changes by less
    than the inner ``rel_tol`` (relative) between stages, or when the new
    linearization equals the previous one, since the next stage would then
    re-solve the same convex problem.

    The returned trace concatenates all inner iterations with their true
    objective values; ``stages`` holds each inner solve with the surrogate
    objective its line search actually tested.
    """
    ms_config = MsConfig() if ms_config is None else ms_config
    inner = ms_config.inner
    if inner.line_search is not LineSearch.MONOTONE:
        raise ValueError("multi-stage inner solves must use the monotone line search")
    w = start_point(loss, w0)
    r1 = Penalty(Family.L1, penalty.l1_weight)
    thresh = penalty.l1_weight
    start = time.perf_counter()

    f = objective(loss, penalty, w)
    f0 = f
    trace = []
    stages = []
    termination = Termination.MAX_ITERS

    s2_prev = None
    for stage in range(ms_config.outer_iters):
        s2 = penalty.r2_subgradient(w)
        if s2_prev is not None and np.array_equal(s2, s2_prev):
            termination = Termination.RELATIVE_CHANGE
            break
        s2_prev = s2
        linear = np.any(s2 != 0)

        def func(v, s2=s2, linear=linear):
            val = loss.value(v) + r1.value(v)
            return val - float(s2 @ v) if linear else val

        def grad(v, s2=s2, linear=linear):
            gv = loss.gradient(v)
            return gv - s2 if linear else gv

        def step(v, gv, t):
            return soft_threshold(v - gv / t, thresh / t)

        def on_accept(rec, v):
            trace.append(replace(rec, k=len(trace), objective=objective(loss, penalty, v)))

        w_new, inner_trace, inner_term, inner_f0, _ = iterate(
            func, grad, step, inner, w, clock_start=start, stage=stage, on_accept=on_accept)
        stages.append(SolveResult(w_final=w_new, trace=inner_trace, termination=inner_term,
                                  critical_point_residual=float("nan"),
                                  initial_objective=inner_f0))
        w = w_new
        if inner_term is Termination.LINE_SEARCH_EXHAUSTED:
            termination = inner_term
            break
        f_old, f = f, objective(loss, penalty, w)
        if abs(f - f_old) / max(1.0, abs(f_old)) < inner.rel_tol:
            termination = Termination.RELATIVE_CHANGE
            break

    g = loss.gradient(w)
    return SolveResult(w_final=w, trace=trace, termination=termination,
                       critical_point_residual=critical_point_residual(loss, penalty, w, g),
                       initial_objective=f0, stages=stages)

