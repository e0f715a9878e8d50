"""Low-rank factorized ADMM solver for diagonally and block-diagonally
constrained semidefinite programs, with negative-curvature escapes, dual
certification, and a Riemannian gradient descent baseline."""

from .certify import (
    Certificate,
    OracleResult,
    brute_force_maxcut,
    dual_certificate,
    oracle_sdp,
    relative_gap,
)
from .curvature import (
    CurvatureReport,
    escape_step,
    hess_quadform,
    negative_curvature_direction,
    objective,
    riemannian_grad,
    solve_with_curvature,
)
from .errors import (
    AssumptionViolated,
    BmadmmError,
    DegenerateProjection,
    DimensionMismatch,
    EigenEstimateError,
    GsetFormatError,
    InvariantViolation,
    OffManifold,
    UnsupportedManifold,
)
from .manifold import (
    ManifoldSpec,
    geodesic_step,
    manifold_violation,
    normalize_rows,
    project,
    project_block,
    random_point,
    tangent_project,
)
from .problems import (
    GraphInstance,
    generate_so3,
    load_gset,
    maxcut_cost,
    parse_gset,
    read_problem,
    serialize_gset,
    write_problem,
)
from .rgd import RgdOptions, rgd_solve, rgd_step
from .solver import (
    ProblemSpec,
    SolveResult,
    SolverOptions,
    SolverState,
    Status,
    default_rho,
    gamma,
    init_state,
    kappa_constant,
    merit_value,
    residuals,
    solve,
    step,
)
from .sparse import (
    SparseSymMatrix,
    inf_norm,
    min_eig_estimate,
    spmm,
    two_norm_estimate,
)
from .trace import BASE_COLUMNS, CURVATURE_COLUMNS, Trace, TraceRecord

__version__ = "0.1.0"

__all__ = [
    "AssumptionViolated",
    "BASE_COLUMNS",
    "BmadmmError",
    "CURVATURE_COLUMNS",
    "Certificate",
    "CurvatureReport",
    "DegenerateProjection",
    "DimensionMismatch",
    "EigenEstimateError",
    "GraphInstance",
    "GsetFormatError",
    "InvariantViolation",
    "ManifoldSpec",
    "OffManifold",
    "OracleResult",
    "ProblemSpec",
    "RgdOptions",
    "SolveResult",
    "SolverOptions",
    "SolverState",
    "SparseSymMatrix",
    "Status",
    "Trace",
    "TraceRecord",
    "UnsupportedManifold",
    "brute_force_maxcut",
    "default_rho",
    "dual_certificate",
    "escape_step",
    "gamma",
    "generate_so3",
    "geodesic_step",
    "hess_quadform",
    "inf_norm",
    "init_state",
    "kappa_constant",
    "load_gset",
    "manifold_violation",
    "maxcut_cost",
    "merit_value",
    "min_eig_estimate",
    "negative_curvature_direction",
    "normalize_rows",
    "objective",
    "oracle_sdp",
    "parse_gset",
    "project",
    "project_block",
    "random_point",
    "read_problem",
    "relative_gap",
    "residuals",
    "rgd_solve",
    "rgd_step",
    "riemannian_grad",
    "serialize_gset",
    "solve",
    "solve_with_curvature",
    "spmm",
    "step",
    "tangent_project",
    "two_norm_estimate",
    "write_problem",
]
