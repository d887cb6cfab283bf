"""Session-wide trace audit.

Every run of the outer loop made anywhere in the test session is recorded, and
the terminal summary re-checks each accepted step and, for monotone runs, the
sufficient-decrease rate bound. A violation turns the session red.
"""

import math

import gist.baselines
import gist.solver
from gist.solver import LineSearch, SolveResult, rate_bound_holds, replay_line_search

RUNS = []
ACCEPTANCE_LINES = []
_orig_iterate = gist.solver.iterate


def _recording_iterate(func, grad, step, config, w0, *args, **kwargs):
    out = _orig_iterate(func, grad, step, config, w0, *args, **kwargs)
    RUNS.append((config, list(out[1]), out[3]))
    return out


def pytest_configure(config):
    gist.solver.iterate = _recording_iterate
    gist.baselines.iterate = _recording_iterate


def audit_runs():
    """``(n_runs, n_monotone, replay_failures, rate_failures)`` over all recorded runs."""
    replay_bad = rate_bad = n_mono = 0
    for cfg, trace, f0 in RUNS:
        res = SolveResult(w_final=None, trace=trace, termination=None,
                          critical_point_residual=math.nan, initial_objective=f0)
        if replay_line_search(res, cfg):
            replay_bad += 1
        if cfg.line_search is LineSearch.MONOTONE:
            n_mono += 1
            if not rate_bound_holds(res, cfg.sigma):
                rate_bad += 1
    return len(RUNS), n_mono, replay_bad, rate_bad


def pytest_sessionfinish(session, exitstatus):
    n, n_mono, replay_bad, rate_bad = audit_runs()
    session.config._gist_audit = (n, n_mono, replay_bad, rate_bad)
    if (replay_bad or rate_bad) and session.exitstatus == 0:
        session.exitstatus = 1


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    tr = terminalreporter
    if ACCEPTANCE_LINES:
        tr.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            tr.write_line(line)
    audit = getattr(config, "_gist_audit", None)
    if audit and audit[0]:
        n, n_mono, replay_bad, rate_bad = audit
        tr.section("session trace audit")
        tr.write_line("line-search replay: %s (%d runs, %d failing)"
                      % ("PASS" if not replay_bad else "FAIL", n, replay_bad))
        tr.write_line("monotone rate bound: %s (%d runs, %d failing)"
                      % ("PASS" if not rate_bad else "FAIL", n_mono, rate_bad))
