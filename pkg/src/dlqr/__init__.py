"""Exact cost, gradients, similarity orbits, stationary controllers and
safeguarded descent for dynamic output-feedback LQR (dLQR) problems."""

from .cost import CostReport, block_lyapunov_residuals, evaluate
from .descent import (
    CONVERGED,
    MAX_ITER,
    STABILITY_BOUNDARY,
    DescentConfig,
    DescentStep,
    DescentTrace,
    descend,
    random_stabilizing_init,
)
from .errors import (
    AssumptionViolated,
    DimensionMismatch,
    DlqrError,
    InitFailed,
    NonSquare,
    NotObservable,
    NotStabilizing,
    OptimalTransformNotFound,
    SchemaError,
    SingularInnovation,
    SingularTransform,
    SingularX12,
    SolverDiverged,
    Unstable,
)
from .gradient import (
    GradientTriple,
    analytic_gradient,
    finite_difference_gradient,
    gradient_from_report,
    stationarity_residual,
)
from .matops import (
    DEFAULT_CONFIG,
    SolverConfig,
    controllability_matrix,
    dlyap_doubling,
    dlyap_kron,
    filter_gain,
    has_full_row_rank,
    is_controllable,
    is_observable,
    lqr_gain,
    psd_sqrt,
    rank_tests,
    solve_dare_control,
    solve_dare_filter,
    solve_dlyap_dual,
    solve_dlyap_primal,
    spectral_radius,
)
from .model import (
    ClosedLoop,
    Controller,
    Plant,
    Problem,
    SecondMoment,
    as_second_moment,
    assemble,
    controller_from_vector,
    controller_from_wire,
    controller_to_vector,
    is_observable_controller,
    is_stabilizing,
    load_problem,
    matrix_from_wire,
    matrix_to_wire,
    observer_based,
    parse_problem,
    rollout_cost,
)
from .similarity import (
    Transform,
    apply,
    g_gradient,
    g_hessian_form,
    g_surrogate,
    optimal_transform,
    transformed_cost,
)
from .stationary import StationaryCertificate, stationary_candidate, verify_stationary

__version__ = "0.1.0"

__all__ = [
    "AssumptionViolated",
    "CONVERGED",
    "ClosedLoop",
    "Controller",
    "CostReport",
    "DEFAULT_CONFIG",
    "DescentConfig",
    "DescentStep",
    "DescentTrace",
    "DimensionMismatch",
    "DlqrError",
    "GradientTriple",
    "InitFailed",
    "MAX_ITER",
    "NonSquare",
    "NotObservable",
    "NotStabilizing",
    "OptimalTransformNotFound",
    "Plant",
    "Problem",
    "STABILITY_BOUNDARY",
    "SchemaError",
    "SecondMoment",
    "SingularInnovation",
    "SingularTransform",
    "SingularX12",
    "SolverConfig",
    "SolverDiverged",
    "StationaryCertificate",
    "Transform",
    "Unstable",
    "analytic_gradient",
    "apply",
    "as_second_moment",
    "assemble",
    "block_lyapunov_residuals",
    "controllability_matrix",
    "controller_from_vector",
    "controller_from_wire",
    "controller_to_vector",
    "descend",
    "dlyap_doubling",
    "dlyap_kron",
    "evaluate",
    "filter_gain",
    "finite_difference_gradient",
    "g_gradient",
    "g_hessian_form",
    "g_surrogate",
    "gradient_from_report",
    "has_full_row_rank",
    "is_controllable",
    "is_observable",
    "is_observable_controller",
    "is_stabilizing",
    "load_problem",
    "lqr_gain",
    "matrix_from_wire",
    "matrix_to_wire",
    "observer_based",
    "optimal_transform",
    "parse_problem",
    "psd_sqrt",
    "random_stabilizing_init",
    "rank_tests",
    "rollout_cost",
    "solve_dare_control",
    "solve_dare_filter",
    "solve_dlyap_dual",
    "solve_dlyap_primal",
    "spectral_radius",
    "stationarity_residual",
    "stationary_candidate",
    "transformed_cost",
    "verify_stationary",
]
