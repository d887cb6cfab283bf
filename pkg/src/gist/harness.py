"""Benchmark variants, trace serialization and the randomized prox self-test."""

import csv
import io
import json
import math
from dataclasses import asdict

import numpy as np

from .baselines import MsConfig, ms_solve, scp_solve
from .penalties import (Family, Penalty, ProxScalarProblem,
                        brute_force_prox_oracle, prox_scalar, surrogate)
from .solver import LineSearch, SolverConfig, StepInit, solve

__all__ = ["VARIANTS", "run_variant", "trace_csv", "summary", "prox_oracle_gap",
           "sample_prox_problem", "TRACE_HEADER"]

TRACE_HEADER = ["iter", "objective", "t_accepted", "ls_trials", "delta_w_sq", "elapsed_s"]

# token -> (algorithm, step initialization, line search)
VARIANTS = {
    "gist_1": ("gist", StepInit.CONSTANT_ONE, LineSearch.MONOTONE),
    "gist_prev": ("gist", StepInit.PREVIOUS_T, LineSearch.MONOTONE),
    "gistbb_m": ("gist", StepInit.BARZILAI_BORWEIN, LineSearch.MONOTONE),
    "gistbb_nm": ("gist", StepInit.BARZILAI_BORWEIN, LineSearch.NONMONOTONE),
    "scpbb_nm": ("scp", StepInit.BARZILAI_BORWEIN, LineSearch.NONMONOTONE),
    "ms": ("ms", StepInit.BARZILAI_BORWEIN, LineSearch.MONOTONE),
}


def variant_config(name, base):
    algo, init, search = VARIANTS[name]
    return base.replace(step_init=init, line_search=search)


def run_variant(name, loss, penalty, base=None, ms_stages=10, w0=None):
    """Run one named variant; ``base`` supplies everything but init/search mode."""
    if name not in VARIANTS:
        raise KeyError("unknown variant %r (choose from %s)" % (name, ", ".join(VARIANTS)))
    base = SolverConfig() if base is None else base
    config = variant_config(name, base)
    algo = VARIANTS[name][0]
    if algo == "gist":
        return solve(loss, penalty, config, w0)
    if algo == "scp":
        return scp_solve(loss, penalty, config, w0)
    return ms_solve(loss, penalty, MsConfig(outer_iters=ms_stages, inner=config), w0)


def _num(x):
    return repr(float(x))


def trace_csv(result, with_stage=False, stream=None):
    """Write the per-iteration trace as CSV; returns the text if no stream."""
    out = io.StringIO() if stream is None else stream
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(TRACE_HEADER + (["stage"] if with_stage else []))
    for rec in result.trace:
        row = [rec.k + 1, _num(rec.objective), _num(rec.t_accepted), rec.line_search_trials,
               _num(rec.delta_w_norm_sq), "%.6f" % rec.elapsed_seconds]
        if with_stage:
            row.append(rec.stage)
        writer.writerow(row)
    return out.getvalue() if stream is None else None


def summary(name, result, config_echo):
    return {
        "variant": name,
        "final_objective": result.final_objective,
        "iterations": result.iterations,
        "termination": result.termination.value,
        "residual": result.critical_point_residual,
        "config": config_echo,
    }


def config_echo(base, **extra):
    echo = {k: (v.value if hasattr(v, "value") else v) for k, v in asdict(base).items()}
    echo.update(extra)
    return echo


def dumps(obj):
    return json.dumps(obj, indent=2, sort_keys=True)


# -- prox self-test -------------------------------------------------------

def _log_uniform(rng, lo, hi):
    return float(10 ** rng.uniform(math.log10(lo), math.log10(hi)))


def sample_prox_problem(rng, family):
    """Random scalar prox instance: lam in [0.01, 10], t in [0.01, 100] (both
    log-uniform), u uniform in [-20, 20], theta log-uniform in [0.01, 10]
    (``2 + `` that for SCAD)."""
    family = Family(family)
    lam = _log_uniform(rng, 0.01, 10.0)
    t = _log_uniform(rng, 0.01, 100.0)
    u = float(rng.uniform(-20.0, 20.0))
    theta = _log_uniform(rng, 0.01, 10.0)
    if family is Family.SCAD:
        theta = 2.0 + _log_uniform(rng, 1e-3, 10.0)
    return ProxScalarProblem(u=u, t=t, penalty=Penalty(family, lam, theta))


def prox_oracle_gap(samples, seed=0, grid_step=1e-4, families=tuple(Family), full_grid=False):
    """Compare closed-form prox values with the grid oracle.

    Returns ``{family: (max_gap, min_gap)}`` where gap is
    ``h(closed form) - h(grid minimizer)``; a positive gap means the grid
    found a strictly better point.
    """
    rng = np.random.default_rng(seed)
    out = {}
    for fam in families:
        fam = Family(fam)
        worst, slack = -np.inf, np.inf
        for _ in range(samples):
            prob = sample_prox_problem(rng, fam)
            p, u, t = prob.penalty, prob.u, prob.t
            x = prox_scalar(prob)
            g = brute_force_prox_oracle(prob, grid_step, bracket=not full_grid)
            gap = float(surrogate(p, x, u, t) - surrogate(p, g, u, t))
            worst, slack = max(worst, gap), min(slack, gap)
        out[fam.value] = (worst, slack)
    return out
