"""Matrix means of SPD matrices.

``s_mean`` minimizes ``h(X) = sum_i w_i S(X, A_i)`` by the fixed-point
(Picard) iteration ``X <- [sum_i w_i ((X + A_i)/2)^{-1}]^{-1}``. The
geometric mean and geodesic points, the closed-form log-Euclidean mean and
a Riemannian (Karcher) baseline are included for comparison.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import solve_triangular

from ._backend import kernels
from .divergences import _s_div, _spd_inv
from .errors import (
    DimensionMismatch,
    InvalidParameter,
    MaxItersExceeded,
    NumericalError,
)
from .pdcore import (
    SpdMatrix,
    _eigh,
    _spectral,
    _sym,
    as_array,
    check_same_dim,
    kron,
    make_spd,
)

WEIGHT_TOL = 1e-12
RESIDUAL_TOL = 1e-8


@dataclass(frozen=True)
class MeanProblem:
    """Matrices ``A_1..A_m`` of a common size with weights summing to one.

    ``weights=None`` means equal weights.
    """

    matrices: tuple
    weights: np.ndarray = None

    def __post_init__(self):
        mats = tuple(make_spd(A) for A in self.matrices)
        if not mats:
            raise InvalidParameter("a mean needs at least one matrix")
        n = mats[0].n
        for A in mats[1:]:
            if A.n != n:
                raise DimensionMismatch(f"matrix of size {A.n} in a bundle of size {n}")
        if self.weights is None:
            w = np.full(len(mats), 1.0 / len(mats))
        else:
            w = np.asarray(self.weights, dtype=np.float64).ravel()
            if w.shape != (len(mats),):
                raise DimensionMismatch(f"{w.size} weights for {len(mats)} matrices")
            if np.any(w < 0) or abs(float(np.sum(w)) - 1.0) > WEIGHT_TOL:
                raise InvalidParameter("weights must be nonnegative and sum to 1")
        w = w.copy()
        w.flags.writeable = False
        object.__setattr__(self, "matrices", mats)
        object.__setattr__(self, "weights", w)

    @property
    def n(self):
        return self.matrices[0].n

    @property
    def m(self):
        return len(self.matrices)

    def stack(self):
        return np.stack([A.data for A in self.matrices])


@dataclass(frozen=True)
class SolverConfig:
    """``init`` is ``"arithmetic_mean"``, ``"identity"`` or a starting matrix."""

    tol: float = 1e-12
    max_iters: int = 1000
    init: object = "arithmetic_mean"

    def __post_init__(self):
        if not self.tol > 0:
            raise InvalidParameter("tol must be positive")
        if self.max_iters < 1:
            raise InvalidParameter("max_iters must be >= 1")


@dataclass
class MeanReport:
    mean: SpdMatrix
    iterations: int
    residual: float
    step_history: np.ndarray = field(repr=False)
    converged: bool

    def raise_for_status(self):
        if not self.converged:
            raise MaxItersExceeded(
                f"no convergence after {self.iterations} iterations "
                f"(residual {self.residual:.3e})",
                report=self,
            )
        return self


def _initial(problem, init):
    if isinstance(init, str):
        if init == "arithmetic_mean":
            return np.einsum("i,ijk->jk", problem.weights, problem.stack())
        if init == "identity":
            return np.eye(problem.n)
        raise InvalidParameter(f"unknown init {init!r}")
    x0 = as_array(init)
    check_same_dim(x0, problem.matrices[0].data)
    return x0


# Two-matrix means ------------------------------------------------------------


def _geodesic(a, b, t):
    # A #_t B = L (L^{-1} B L^{-T})^t L^T for A = L L^T. With the SVD
    # L^{-1} L_B = U diag(s) V^T this is F F^T, F = L U diag(s^t), which
    # avoids eigendecomposing the badly conditioned L^{-1} B L^{-T}.
    if t == 0:
        return a.copy()
    if t == 1:
        return b.copy()
    L = np.linalg.cholesky(a)
    C = solve_triangular(L, np.linalg.cholesky(b), lower=True, check_finite=False)
    U, s, _ = np.linalg.svd(C)
    F = L @ (U * s**t)
    return _sym(F @ F.T)


def geodesic_point(A, B, t):
    """Point ``A #_t B = A^{1/2} (A^{-1/2} B A^{-1/2})^t A^{1/2}`` on the geodesic."""
    t = float(t)
    if not 0.0 <= t <= 1.0:
        raise InvalidParameter(f"t must lie in [0, 1], got {t}")
    a, b = as_array(A), as_array(B)
    check_same_dim(a, b)
    if t == 0:
        return make_spd(A)
    if t == 1:
        return make_spd(B)
    return SpdMatrix._trusted(_geodesic(a, b, t))


def geometric_mean(A, B):
    """``A # B``, the unique SPD solution of ``X A^{-1} X = B``."""
    return geodesic_point(A, B, 0.5)


# S-mean -------------------------------------------------------------------------


def objective(problem, X):
    """``h(X) = sum_i w_i S(X, A_i)``."""
    x = as_array(X)
    return float(sum(w * _s_div(x, A.data) for w, A in zip(problem.weights, problem.matrices)))


def _inv_sum(x, stack, weights):
    y = np.zeros_like(x)
    for w, a in zip(weights, stack):
        y += w * _spd_inv(x + a)
    return y


def _residual(x, stack, weights):
    return float(np.linalg.norm(0.5 * _spd_inv(x) - _inv_sum(x, stack, weights)))


def stationarity_residual(problem, X):
    """``|| 1/2 X^{-1} - sum_i w_i (X + A_i)^{-1} ||_F``, zero at the S-mean."""
    return _residual(as_array(X), problem.stack(), problem.weights)


def picard_step(problem, X):
    """One application of the fixed-point map."""
    x = as_array(X)
    y = 2.0 * _inv_sum(x, problem.stack(), problem.weights)
    return SpdMatrix._trusted(_spd_inv(y))


def s_mean(problem, config=None):
    """Weighted S-divergence mean by Picard iteration.

    Converged means the relative step fell to ``config.tol`` and the
    stationarity residual is at most ``1e-8 * max(1, ||X||_F)``. A
    non-converged run is reported (``converged=False``), not raised; call
    :meth:`MeanReport.raise_for_status` to turn it into
    :class:`~spdkit.errors.MaxItersExceeded`.
    """
    config = config or SolverConfig()
    stack = np.ascontiguousarray(problem.stack())
    weights = np.ascontiguousarray(problem.weights)
    x0 = np.ascontiguousarray(_initial(problem, config.init), dtype=np.float64)
    x, iters, steps, converged, status = kernels.picard(
        stack, weights, x0, config.tol, RESIDUAL_TOL, config.max_iters
    )
    if status:
        raise NumericalError(f"Cholesky breakdown in the fixed-point map (status {status})")
    x = _sym(x)
    residual = _residual(x, stack, weights)
    converged = bool(converged) and residual <= RESIDUAL_TOL * max(1.0, float(np.linalg.norm(x)))
    return MeanReport(SpdMatrix._trusted(x), int(iters), residual, steps, converged)


def smean_hessian(problem, X, cap=None):
    """``X^{-1} kron X^{-1} - sum_i (w_i/2) M_i^{-1} kron M_i^{-1}`` with ``M_i = (X + A_i)/2``.

    Twice the Hessian of ``h`` on symmetric directions.
    """
    x = as_array(X)
    kw = {} if cap is None else {"cap": cap}
    xi = _spd_inv(x)
    H = kron(xi, xi, **kw)
    for w, A in zip(problem.weights, problem.matrices):
        mi = _spd_inv(0.5 * (x + A.data))
        H -= 0.5 * w * kron(mi, mi, **kw)
    return _sym(H)


@dataclass(frozen=True)
class HessianCheck:
    positive: bool
    min_eig: float
    max_eig: float


def s_mean_hessian_psd(problem, X, cap=None):
    """Assemble :func:`smean_hessian` at ``X`` and report its extreme eigenvalues.

    ``positive`` is strict positivity of the smallest eigenvalue; nothing is
    asserted away from the solution.
    """
    w = np.linalg.eigvalsh(smean_hessian(problem, X, cap=cap))
    return HessianCheck(bool(w[0] > 0), float(w[0]), float(w[-1]))


# Baselines ----------------------------------------------------------------------


def le_mean(problem):
    """Log-Euclidean mean ``exp(sum_i w_i log A_i)``."""
    acc = np.zeros((problem.n, problem.n))
    for w, A in zip(problem.weights, problem.matrices):
        acc += w * _spectral(A.data, np.log)
    return SpdMatrix._trusted(_spectral(_sym(acc), np.exp))


def _karcher_state(xh_inv, stack, weights):
    logs = [_spectral(_sym(xh_inv @ a @ xh_inv), np.log) for a in stack]
    tangent = sum(w * lg for w, lg in zip(weights, logs))
    cost = float(sum(w * np.sum(lg * lg) for w, lg in zip(weights, logs)))
    return _sym(tangent), cost


def karcher_mean(problem, config=None, step=1.0, grad_tol=1e-10, max_halvings=30):
    """Riemannian (Karcher) mean by fixed-step gradient iteration.

    ``X <- X^{1/2} exp(eta sum_i w_i log(X^{-1/2} A_i X^{-1/2})) X^{1/2}``,
    halving ``eta`` whenever the cost ``sum_i w_i delta_R^2(X, A_i)`` would
    increase. Stops when the whitened gradient norm falls below
    ``grad_tol * sqrt(n)`` or the relative step below ``config.tol``; the
    run counts as converged when the gradient norm is below ``1e-6 sqrt(n)``.
    ``residual`` is that gradient norm.
    """
    config = config or SolverConfig()
    stack = problem.stack()
    weights = problem.weights
    n = problem.n
    x = _sym(np.array(_initial(problem, config.init), dtype=np.float64))

    def factors(x):
        w, U = _eigh(x)
        r = np.sqrt(w)
        return _sym((U * r) @ U.T), _sym((U / r) @ U.T)

    xh, xh_inv = factors(x)
    tangent, cost = _karcher_state(xh_inv, stack, weights)
    eta = float(step)
    steps = []
    for _ in range(config.max_iters):
        gnorm = float(np.linalg.norm(tangent))
        if gnorm <= grad_tol * np.sqrt(n):
            break
        for _ in range(max_halvings):
            cand = _sym(xh @ _spectral(eta * tangent, np.exp) @ xh)
            c_xh, c_xh_inv = factors(cand)
            c_tangent, c_cost = _karcher_state(c_xh_inv, stack, weights)
            if c_cost <= cost:
                break
            eta *= 0.5
        rel = float(np.linalg.norm(cand - x) / np.linalg.norm(x))
        steps.append(rel)
        x, xh, xh_inv, tangent, cost = cand, c_xh, c_xh_inv, c_tangent, c_cost
        if rel <= config.tol:
            break
    gnorm = float(np.linalg.norm(tangent))
    return MeanReport(
        SpdMatrix._trusted(x), len(steps), gnorm, np.array(steps), gnorm <= 1e-6 * np.sqrt(n)
    )
