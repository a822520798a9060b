"""Geometry of symmetric positive definite matrices under the S-divergence.

``S(X, Y) = log det((X+Y)/2) - 1/2 log det(XY)`` and its square root, a
metric, are compared with the affine-invariant Riemannian distance. The
package also provides means, determinant kernels and randomized checks of
the inequalities relating them. Hot loops run in a compiled extension when
it is built and fall back to numpy otherwise (see ``spdkit.BACKEND``).
"""

from ._backend import BACKEND
from .bench import BenchResult, run_bench, time_op
from .bundle import MatrixBundle, dumps_bundle, loads_bundle, parse_bundle, write_bundle
from .divergences import (
    GENERATORS,
    DivergenceKind,
    bregman,
    delta_s_metric,
    divergence,
    eig_matrix,
    jensen_div,
    log_euclidean,
    riemannian,
    s_div,
    s_div_grad,
    s_div_hessian,
    scalar_delta_s,
    thompson,
)
from .errors import (
    ConvergenceFailure,
    DimensionMismatch,
    DimensionOverflow,
    InputError,
    InvalidParameter,
    MaxItersExceeded,
    NonPositiveInput,
    NotPositiveDefinite,
    NotSquare,
    NotSymmetric,
    NumericalError,
    Overflow,
    ParseError,
    SpdError,
    UnknownLaw,
    ValidationError,
)
from .kernels import (
    GramReport,
    GramSpec,
    beta_admissible,
    counterexample_bundle,
    gram_matrix,
    scalar_gram,
    search_indefinite,
)
from .laws import LAW_IDS, LawReport, LawSpec, evaluate_law, run_all, run_law
from .means import (
    HessianCheck,
    MeanProblem,
    MeanReport,
    SolverConfig,
    geodesic_point,
    geometric_mean,
    karcher_mean,
    le_mean,
    objective,
    picard_step,
    s_mean,
    s_mean_hessian_psd,
    smean_hessian,
    stationarity_residual,
)
from .pdcore import (
    CongruencePair,
    EigenDecomposition,
    SpdMatrix,
    cholesky,
    expm,
    invm,
    kron,
    log_relative_spectrum,
    logdet,
    logm,
    loewner_leq,
    make_spd,
    mat_fn,
    powm,
    random_spd,
    simultaneous_diagonalize,
    sqrtm,
    sym_eig,
)

__version__ = "0.1.0"
