"""ridgekit: dimension-reducing subspace discovery for expensive black-box
functions, ridge surrogates, and constrained multi-point design generation."""

from .doe import (
    DesignOfExperiments,
    synth_exp_ridge,
    synth_poly_ridge,
    synth_quadratic,
)
from .errors import (
    DegenerateInputError,
    EmptyAccumulatorError,
    InfeasibleRegionError,
    NumericalFailureError,
    PreconditionError,
)
from .polybasis import (
    MultiIndexSet,
    eval_basis_gradient,
    eval_basis_matrix,
    eval_univariate,
    make_index_set,
)
from .quadsurf import (
    EigenReport,
    QuadraticModel,
    active_subspace,
    bootstrap_eigenvalues,
    coefficient_count,
    fit_quadratic,
    gradient_covariance,
)
from .sdr import (
    SliceAssignment,
    Standardization,
    contour_regression,
    phd,
    save,
    sir,
    slice_outputs,
    standardize,
)
from .subspace import (
    ResponseSurface,
    Subspace,
    contour_grid,
    fit_response_surface,
    null_complement,
    orthonormalize,
    project,
    subspace_angle,
)
from .varpro import RidgeModel, VarproOptions, jacobian, residual, varpro_fit
from .design import (
    DesignBatch,
    LinearProgram,
    LPResult,
    chebyshev_center,
    crossproject,
    feasible_box,
    generate_designs,
    simplex_solve,
)
from .metrics import StationState, StreamState, perf_metrics

__version__ = "0.1.0"
