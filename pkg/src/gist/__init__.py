"""Non-convex regularized sparse learning by general iterative shrinkage and
thresholding, with closed-form proximal maps for l1, LSP, SCAD, MCP and
capped-l1 penalties."""

from .baselines import MsConfig, ms_solve, scp_solve, scp_step
from .data_io import (Dataset, LibsvmParseError, binarize_multiclass, dump_libsvm,
                      load_libsvm, parse_libsvm, synthesize)
from .linalg import DimensionError, SparseMatrix
from .losses import Loss, LossKind, lipschitz_bound, loss_gradient, loss_value
from .penalties import (Family, Penalty, ProxScalarProblem, brute_force_prox_oracle,
                        dc_parts, penalty_value, prox, prox_scalar, r2_subgradient)
from .solver import (IterationRecord, LineSearch, SolveResult, SolverConfig, StepInit,
                     Termination, bb_init, check_monotone, check_nonmonotone,
                     critical_point_residual, gist_step, solve)

__version__ = "0.1.0"
