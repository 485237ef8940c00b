"""Projection-free second-order conditional gradient sliding (SOCGS) and baselines."""

__version__ = "0.1.0"

from .core import (
    ActiveSet,
    InvariantError,
    IterateState,
    SolveTrace,
    StoppingCriterion,
    TraceRecord,
    Vertex,
    convex_combination,
    weighted_norm_sq,
)
from .regions import (
    Birkhoff,
    FeasibleRegion,
    L1Ball,
    Simplex,
    away_vertex,
    hungarian_assignment,
    make_region,
)
from .objectives import (
    LogisticObjective,
    Objective,
    QuadraticObjective,
    SparseCodingObjective,
    load_sparse_samples,
    logistic_data,
    logistic_objective,
    quadratic_objective,
    random_quadratic,
    sparse_coding_data,
    sparse_coding_objective,
)
from .linesearch import LineSearchConfig, exact_quadratic_step, golden_section
from .cg import StepOutcome, acg_step, cg_step, fw_gap, run_acg, run_cg
from .quadmodel import (
    HessianEstimate,
    QuadraticModel,
    eta_of,
    exact_hessian_oracle,
    identity_hessian_oracle,
    model_gradient,
    model_value,
    perturbed_hessian_oracle,
)
from .driver import (
    CGProbe,
    KnownOptimum,
    SocgsConfig,
    SocgsState,
    epsilon_k,
    inexact_pvm_step,
    lower_bound,
    run_socgs,
    socgs_outer_iteration,
)

from types import ModuleType as _Module

__all__ = [n for n, v in dict(globals()).items() if not n.startswith("_") and not isinstance(v, _Module)]
