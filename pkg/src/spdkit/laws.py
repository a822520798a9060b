"""Randomized checks of the inequalities and identities satisfied by the
S-divergence, the Riemannian distance and the associated means.

Each registered law draws random inputs per trial, evaluates one or more
checks and reduces them to a single *margin*. A margin above ``slack`` is a
violation. Margins are normalized so that mixed scales compare sensibly:

* inequality ``lhs <= rhs``: ``(lhs - rhs) / max(1, |rhs|)``;
* equality ``lhs == rhs`` within relative ``tol``:
  ``|lhs - rhs| - tol * max(1, |rhs|)``;
* matrix inequality ``M >= 0``: ``-lambda_min(M) / ||M||_2``.

Trial ``k`` of a run with seed ``s`` draws from a generator seeded by
``(s XOR k, salt(law_id))``; dimension and condition number cycle through
the requested lists, so every combination is covered. Inputs of the worst
trial are kept as a JSON-serializable witness that :func:`evaluate_law`
replays exactly.
"""

import json
import math
import zlib
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from scipy.linalg.lapack import dgejsv

from .divergences import _riemannian, _s_div, _spd_inv, _thompson, s_div_hessian
from .errors import InvalidParameter, SpdError, UnknownLaw
from .means import MeanProblem, SolverConfig, _geodesic, objective, s_mean, smean_hessian
from .pdcore import (
    _eigh,
    _random_spd,
    _spectral,
    _sym,
    _whiten,
    random_orthogonal,
)

DEFAULT_DIMS = (2, 3, 5, 10)
DEFAULT_CONDS = (10.0, 1e4)
DEFAULT_SLACK = 1e-10
EQ_TOL = 1e-8
T_GRID = (0.0, 0.25, 0.5, 0.75, 1.0)
SILVER = 1.0 + math.sqrt(2.0)
MEAN_MAX_ITERS = 20000
PERTURB_EPS = 1e-3
BOUNDARY_GAP = 1e-6


@dataclass(frozen=True)
class LawSpec:
    """Configuration of one law run.

    ``cond_target`` is a single condition number or a sequence to cycle
    through. ``inputs`` fixes the inputs of every trial (the dimension is
    then taken from them). ``threads > 1`` spreads trials over worker
    processes; the report does not depend on it.
    """

    law_id: str
    trials: int = 1000
    seed: int = 0
    dims: tuple = DEFAULT_DIMS
    cond_target: object = DEFAULT_CONDS
    slack: float = DEFAULT_SLACK
    inputs: dict = None
    threads: int = 1

    def __post_init__(self):
        if self.law_id not in REGISTRY:
            raise UnknownLaw(f"unknown law {self.law_id!r}")
        if int(self.trials) < 1:
            raise InvalidParameter("trials must be >= 1")
        dims = tuple(int(d) for d in self.dims)
        if not dims or min(dims) < 1:
            raise InvalidParameter("dims must be a nonempty list of positive integers")
        conds = np.atleast_1d(np.asarray(self.cond_target, dtype=np.float64))
        if conds.size == 0 or not np.all(conds >= 1):
            raise InvalidParameter("cond_target must be >= 1")
        if not self.slack >= 0:
            raise InvalidParameter("slack must be nonnegative")
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "cond_target", tuple(float(c) for c in conds))


@dataclass
class LawReport:
    law_id: str
    trials_run: int
    violations: int
    worst_margin: float
    witness: str = field(repr=False)
    passed: bool
    errored: int = 0
    worst_trial: int = -1

    def to_dict(self):
        return {
            "law_id": self.law_id,
            "trials_run": self.trials_run,
            "violations": self.violations,
            "errored": self.errored,
            "worst_margin": self.worst_margin,
            "worst_trial": self.worst_trial,
            "passed": self.passed,
            "witness": json.loads(self.witness) if self.witness else None,
        }


# Margins -----------------------------------------------------------------------


def _le(lhs, rhs):
    return (lhs - rhs) / max(1.0, abs(rhs))


def _eq(lhs, rhs, tol=EQ_TOL):
    return abs(lhs - rhs) - tol * max(1.0, abs(rhs))


def _psd(M):
    w = np.linalg.eigvalsh(_sym(M))
    scale = max(abs(w[0]), abs(w[-1]))
    return 0.0 if scale == 0 else -w[0] / scale


def _nsd(M):
    return _psd(-M)


# Sampling ----------------------------------------------------------------------


def _spd(rng, n, cond):
    scale = math.exp(rng.uniform(-1.0, 1.0))
    return scale * _random_spd(n, rng, cond)


def _invertible(rng, n, cond=10.0):
    # Q1 diag(s) Q2 with s log-uniform, so cond(X) <= cond
    half = 0.5 * math.log(cond)
    s = np.exp(rng.uniform(-half, half, size=n))
    return (random_orthogonal(n, rng) * s) @ random_orthogonal(n, rng)


def _psd_increment(rng, n, cond):
    # Random PSD matrix, possibly rank deficient.
    k = int(rng.integers(1, n + 1))
    G = rng.standard_normal((n, k)) * math.exp(rng.uniform(-2.0, 1.0))
    if k == n and rng.random() < 0.5:
        return _spd(rng, n, cond)
    return G @ G.T


def _t(rng):
    if rng.random() < 0.25:
        return T_GRID[int(rng.integers(len(T_GRID)))]
    return float(rng.uniform(0.0, 1.0))


def _tu(rng, lo):
    t = lo + _t(rng)
    return t, t + abs(float(rng.uniform(-1.0, 1.0)))


def _positive_vector(rng, n, cond):
    half = 0.5 * math.log(cond)
    return np.exp(rng.uniform(-half, half, size=n) + rng.uniform(-1.0, 1.0))


def _sdelta(x, y):
    return math.sqrt(_s_div(x, y))


def _diag_s(a, b):
    return float(np.sum(np.log(0.5 * (a + b)) - 0.5 * np.log(a * b)))


def _as_inputs(inputs):
    out = {}
    for key, value in inputs.items():
        if isinstance(value, (list, tuple)):
            value = np.asarray(value, dtype=np.float64)
        out[key] = value
    return out


# Laws ------------------------------------------------------------------------
#
# Each law is a pair (sample, evaluate): sample(rng, n, cond) -> inputs and
# evaluate(inputs) -> list of margins.


def _sample_triangle(rng, n, cond):
    if rng.random() < 0.25:
        half = 0.5 * math.log(cond)
        return {k: np.diag(np.exp(rng.uniform(-half, half, size=n))) for k in "XYZ"}
    return {k: _spd(rng, n, cond) for k in "XYZ"}


def _eval_triangle(v):
    X, Y, Z = v["X"], v["Y"], v["Z"]
    return [_le(_sdelta(X, Y), _sdelta(X, Z) + _sdelta(Y, Z))]


def _sample_scalar_p(rng, n, cond):
    return {
        "x": _positive_vector(rng, n, cond),
        "y": _positive_vector(rng, n, cond),
        "z": _positive_vector(rng, n, cond),
        "p": int(rng.integers(1, 4)),
    }


def _eval_scalar_p(v):
    x, y, z, p = v["x"], v["y"], v["z"], float(v["p"])

    def norm(a, b):
        d = np.sqrt(np.maximum(np.log(0.5 * (a + b) / np.sqrt(a * b)), 0.0))
        return float(np.sum(d**p) ** (1.0 / p))

    return [_le(norm(x, y), norm(x, z) + norm(z, y))]


def _sample_pair(rng, n, cond):
    return {"A": _spd(rng, n, cond), "B": _spd(rng, n, cond)}


def _eval_det_bounds(v):
    a = _eigh(v["A"])[0]
    b = _eigh(v["B"])[0]
    # compared in log form
    mid = float(np.linalg.slogdet(v["A"] + v["B"])[1])
    lo = float(np.sum(np.log(a + b)))
    hi = float(np.sum(np.log(a + b[::-1])))
    return [_le(lo, mid), _le(mid, hi)]


def _eval_eig_sandwich(v):
    a = _eigh(v["A"])[0]
    b = _eigh(v["B"])[0]
    mid = _sdelta(v["A"], v["B"])
    lo = math.sqrt(max(_diag_s(a, b), 0.0))
    hi = math.sqrt(max(_diag_s(a, b[::-1]), 0.0))
    return [_le(lo, mid), _le(mid, hi)]


def _sample_pair_t(rng, n, cond):
    v = _sample_pair(rng, n, cond)
    v["t"] = _t(rng)
    v["s"] = 1.0 + _t(rng)
    return v


class _Powers:
    """Eigendecompositions of a pair, reused for every exponent."""

    def __init__(self, A, B):
        self.a, self.Ua = _eigh(A)
        self.b, self.Ub = _eigh(B)
        self.W = self.Ub.T @ self.Ua
        self.ld = float(np.sum(np.log(self.a)) + np.sum(np.log(self.b)))

    def mean_logdet(self, t):
        """``log det((A^t + B^t) / 2)``; the sum of two SPD terms is benign."""
        m = 0.5 * ((self.Ua * self.a**t) @ self.Ua.T + (self.Ub * self.b**t) @ self.Ub.T)
        return float(np.linalg.slogdet(_sym(m))[1])

    def s_div(self, t):
        """``S(A^t, B^t)`` with the exact ``t log det(AB)`` term."""
        if t == 0:
            return 0.0
        return max(self.mean_logdet(t) - 0.5 * t * self.ld, 0.0)

    def log_eig_ratio(self, t):
        """Logs of the eigenvalues of ``A^t B^{-t}``, descending."""
        return 2.0 * _log_sv_graded(self.b ** (-0.5 * t), self.W, self.a ** (0.5 * t))

    def log_eig_product(self, t):
        """Logs of the eigenvalues of ``A^t B^t``, descending."""
        return 2.0 * _log_sv_graded(self.b ** (0.5 * t), self.W, self.a ** (0.5 * t))


def _log_sv_graded(d1, W, d2):
    # Singular values of diag(d1) W diag(d2) with W orthogonal. Powers of
    # ill-conditioned matrices make this strongly graded; the Jacobi SVD
    # keeps the small singular values to high relative accuracy.
    G = d1[:, None] * W * d2[None, :]
    sva, _, _, work, _, info = dgejsv(G, joba=2, jobu=3, jobv=3)
    if info == 0 and work[1] > 0:
        sv = sva * (work[0] / work[1])
    else:
        sv = np.linalg.svd(G, compute_uv=False)
    return np.log(np.sort(sv)[::-1])


def _eval_power_contraction(v):
    A, B, t, s = v["A"], v["B"], v["t"], v["s"]
    pw = _Powers(A, B)
    S = pw.s_div(1.0)
    return [_le(pw.s_div(t), t * S), _le(s * S, pw.s_div(s))]


def _eval_geodesic_contraction(v):
    A, B, t = v["A"], v["B"], v["t"]
    return [_le(_s_div(A, _geodesic(A, B, t)), t * _s_div(A, B))]


def _sample_triple_t(rng, n, cond):
    v = {k: _spd(rng, n, cond) for k in "ABC"}
    v["t"] = _t(rng)
    return v


def _eval_cancellation(v):
    A, B, C, t = v["A"], v["B"], v["C"], v["t"]
    lhs = _s_div(_geodesic(A, B, t), _geodesic(A, C, t))
    return [_le(lhs, t * _s_div(B, C))]


def _sample_translation(rng, n, cond):
    A = _spd(rng, n, cond) * math.exp(rng.uniform(-3.0, 1.0))
    return {
        "A": A,
        "B": A + _psd_increment(rng, n, cond),
        "X": _spd(rng, n, cond),
        "Y": _spd(rng, n, cond),
    }


def _eval_translation(v):
    A, B, X, Y = v["A"], v["B"], v["X"], v["Y"]

    def g(P):
        return _s_div(P + X, P + Y)

    ga, gb = g(A), g(B)
    gm = g(0.5 * (A + B))
    return [_le(gb, ga), _le(gm, 0.5 * (ga + gb))]


def _sample_translation_cor(rng, n, cond):
    return {
        "A": _spd(rng, n, cond) * math.exp(rng.uniform(-3.0, 1.0)),
        "X": _spd(rng, n, cond),
        "Y": _spd(rng, n, cond),
    }


def _eval_translation_cor(v):
    A, X, Y = v["A"], v["X"], v["Y"]
    beta = float(np.linalg.eigvalsh(A)[0])
    eye = np.eye(A.shape[0])
    lhs = _s_div(A + X, A + Y)
    mid = _s_div(beta * eye + X, beta * eye + Y)
    return [_le(lhs, mid), _le(mid, _s_div(X, Y))]


def _sample_pair_tu(rng, n, cond):
    v = _sample_pair(rng, n, cond)
    v["t"], v["u"] = _tu(rng, 1.0)
    return v


def _eval_power_riem(v):
    pw, t, u = _Powers(v["A"], v["B"]), v["t"], v["u"]
    lhs = float(np.linalg.norm(pw.log_eig_ratio(t))) / t
    rhs = float(np.linalg.norm(pw.log_eig_ratio(u))) / u
    return [_le(lhs, rhs)]


def _eval_power_sdiv(v):
    pw, t, u = _Powers(v["A"], v["B"]), v["t"], v["u"]
    return [_le(pw.s_div(t) / t, pw.s_div(u) / u)]


def _eval_det_power_means(v):
    pw, t, u = _Powers(v["A"], v["B"]), v["t"], v["u"]
    return [_le(pw.mean_logdet(t) / t, pw.mean_logdet(u) / u)]


def _sample_logmaj(rng, n, cond):
    v = _sample_pair(rng, n, cond)
    t, u = _tu(rng, 0.0)
    if t == 0.0:
        t = 0.5
        u = max(u, t)
    v["P"], v["Q"] = v.pop("A"), v.pop("B")
    v["t"], v["u"] = t, u
    return v


def _eval_log_majorization(v):
    pw, t, u = _Powers(v["P"], v["Q"]), v["t"], v["u"]
    lt = pw.log_eig_product(t) / t
    lu = pw.log_eig_product(u) / u
    ct, cu = np.cumsum(lt), np.cumsum(lu)
    margins = [_le(ct[k], cu[k]) for k in range(len(ct) - 1)]
    margins.append(_eq(ct[-1], cu[-1]))
    # weak majorization of |log| that follows from it
    at, au = np.cumsum(np.sort(np.abs(lt))[::-1]), np.cumsum(np.sort(np.abs(lu))[::-1])
    margins.extend(_le(at[k], au[k]) for k in range(len(at)))
    return margins


def _eval_sandwich(v):
    A, B = v["A"], v["B"]
    n = A.shape[0]
    S = _s_div(A, B)
    r2 = _riemannian(A, B) ** 2
    return [_le(8.0 * S, r2), _le(r2, 2.0 * _thompson(A, B) * (S + n * math.log(2.0)))]


def _eval_riem_geodesic(v):
    A, B, t = v["A"], v["B"], v["t"]
    return [_eq(_riemannian(A, _geodesic(A, B, t)), t * _riemannian(A, B))]


def _eval_riem_cancellation(v):
    A, B, C, t = v["A"], v["B"], v["C"], v["t"]
    lhs = _riemannian(_geodesic(A, B, t), _geodesic(A, C, t))
    return [_le(lhs, t * _riemannian(B, C))]


def _sample_invariances(rng, n, cond):
    k = min(n, 3)
    return {
        "A": _spd(rng, n, cond),
        "B": _spd(rng, n, cond),
        "X": _invertible(rng, n),
        "K": _spd(rng, k, 10.0),
    }


def _eval_invariances(v, tol=1e-9):
    A, B, X, K = v["A"], v["B"], v["X"], v["K"]
    S = _s_div(A, B)
    eye = np.eye(A.shape[0])
    margins = [
        _eq(_s_div(eye, A), _diag_s(np.ones(A.shape[0]), _eigh(A)[0]), tol),
        _eq(_s_div(_sym(X.T @ A @ X), _sym(X.T @ B @ X)), S, tol),
        _eq(_s_div(_spd_inv(A), _spd_inv(B)), S, tol),
        _eq(_s_div(np.kron(K, A), np.kron(K, B)), K.shape[0] * S, tol),
    ]
    return margins


def _sample_convexity(rng, n, cond):
    B = _spd(rng, n, cond)
    U = random_orthogonal(n, rng)
    below = np.exp(rng.uniform(math.log(1e-2), math.log(SILVER), size=n))
    above = np.exp(rng.uniform(math.log(SILVER), math.log(1e2), size=n))
    if rng.random() < 0.25:
        # Approach the common boundary. Forming A perturbs its spectrum
        # relative to B by about eps * cond(B), so an exact touch could land
        # outside the region; stay a relative 1e-6 inside instead.
        below[0] = SILVER * (1.0 - BOUNDARY_GAP)
        above[0] = SILVER * (1.0 + BOUNDARY_GAP)
    return {"B": B, "U": U, "below": below, "above": above}


def _eval_convexity(v):
    # S is congruence invariant, so with B = L L^T the Hessian at (A, B) is
    # congruent (by L kron L) to the Hessian at (L^{-1} A L^{-T}, I); the
    # inertia is the same and the whitened form is well scaled.
    B, U = v["B"], v["U"]
    Bh = _spectral(B, np.sqrt)
    eye = np.eye(B.shape[0])
    margins = []
    for key, test in (("below", _psd), ("above", _nsd)):
        A = _sym(Bh @ ((U * v[key]) @ U.T) @ Bh)
        margins.append(test(s_div_hessian(_whiten(A, B), eye)))
    return margins


def _sample_kron(rng, n, cond):
    B = _spd(rng, n, cond)
    D = _spd(rng, n, cond)
    if rng.random() < 0.25:
        # PSD but singular lower terms
        B = _psd_increment(rng, n, cond)
    return {"A": B + _psd_increment(rng, n, cond), "B": B, "C": D + _psd_increment(rng, n, cond), "D": D}


def _eval_kron(v):
    return [_psd(np.kron(v["A"], v["C"]) - np.kron(v["B"], v["D"]))]


def _directions(rng, n, count):
    out = []
    for _ in range(count):
        d = _sym(rng.standard_normal((n, n)))
        out.append(d / np.linalg.norm(d))
    return np.array(out)


def _perturbed(X, Xh, d):
    return _sym(X + PERTURB_EPS * (Xh @ d @ Xh))


def _sample_gm(rng, n, cond):
    v = _sample_pair(rng, n, cond)
    v["D"] = _directions(rng, n, 3)
    return v


def _eval_gm(v, tol=1e-9):
    A, B = v["A"], v["B"]
    G = _geodesic(A, B, 0.5)
    Gh = _spectral(G, np.sqrt)

    def f(X):
        return _s_div(X, A) + _s_div(X, B)

    margins = [
        _eq(_sdelta(A, G), _sdelta(B, G), tol),
        _eq(_riemannian(A, G), _riemannian(B, G), tol),
    ]
    fg = f(G)
    margins.extend(_le(fg, f(_perturbed(G, Gh, d))) for d in v["D"])
    return margins


def _sample_smean(rng, n, cond):
    m = int(rng.integers(2, 7))
    return {
        "mats": np.array([_spd(rng, n, cond) for _ in range(m)]),
        "w": rng.dirichlet(np.ones(m)),
        "D": _directions(rng, n, 3),
    }


def _eval_smean(v):
    problem = MeanProblem(tuple(v["mats"]), v["w"] / np.sum(v["w"]))
    report = s_mean(problem, SolverConfig(max_iters=MEAN_MAX_ITERS)).raise_for_status()
    X = report.mean.data
    Xh = _spectral(X, np.sqrt)
    h = objective(problem, X)
    margins = [_le(h, objective(problem, _perturbed(X, Xh, d))) for d in v["D"]]
    margins.append(_psd(smean_hessian(problem, X)))
    return margins


@dataclass(frozen=True)
class _Law:
    sample: object
    evaluate: object
    summary: str


REGISTRY = {
    "triangle_sdelta": _Law(
        _sample_triangle, _eval_triangle, "delta_S(X,Y) <= delta_S(X,Z) + delta_S(Y,Z)"
    ),
    "triangle_scalar_p": _Law(
        _sample_scalar_p, _eval_scalar_p, "Minkowski sum of scalar delta_s, p in {1,2,3}"
    ),
    "det_bounds": _Law(
        _sample_pair,
        _eval_det_bounds,
        "prod(lam_dn(A)+lam_dn(B)) <= det(A+B) <= prod(lam_dn(A)+lam_up(B))",
    ),
    "eig_sandwich_sdelta": _Law(
        _sample_pair,
        _eval_eig_sandwich,
        "delta_S(Eig_dn A, Eig_dn B) <= delta_S(A,B) <= delta_S(Eig_dn A, Eig_up B)",
    ),
    "power_contraction": _Law(
        _sample_pair_t,
        _eval_power_contraction,
        "S(A^t,B^t) <= t S(A,B) for t in [0,1]; reversed for t >= 1",
    ),
    "geodesic_contraction": _Law(
        _sample_pair_t, _eval_geodesic_contraction, "S(A, A #_t B) <= t S(A,B)"
    ),
    "cancellation": _Law(
        _sample_triple_t, _eval_cancellation, "S(A #_t B, A #_t C) <= t S(B,C)"
    ),
    "translation_monotone_convex": _Law(
        _sample_translation,
        _eval_translation,
        "A -> S(A+X, A+Y) is decreasing in Loewner order and midpoint convex",
    ),
    "translation_corollary": _Law(
        _sample_translation_cor,
        _eval_translation_cor,
        "S(A+X,A+Y) <= S(bI+X,bI+Y) <= S(X,Y), b = lambda_min(A)",
    ),
    "power_monotone_riem": _Law(
        _sample_pair_tu,
        _eval_power_riem,
        "delta_R(A^t,B^t)/t <= delta_R(A^u,B^u)/u for 1 <= t <= u",
    ),
    "power_monotone_sdiv": _Law(
        _sample_pair_tu,
        _eval_power_sdiv,
        "delta_S^2(A^t,B^t)/t <= delta_S^2(A^u,B^u)/u for 1 <= t <= u",
    ),
    "det_power_means": _Law(
        _sample_pair_tu,
        _eval_det_power_means,
        "det^(1/t)((A^t+B^t)/2) <= det^(1/u)((A^u+B^u)/2) for 1 <= t <= u",
    ),
    "log_majorization": _Law(
        _sample_logmaj,
        _eval_log_majorization,
        "lambda^(1/t)(P^t Q^t) log-majorized by lambda^(1/u)(P^u Q^u), 0 < t <= u",
    ),
    "sandwich": _Law(
        _sample_pair,
        _eval_sandwich,
        "8 S(A,B) <= delta_R^2(A,B) <= 2 delta_T(A,B) (S(A,B) + n log 2)",
    ),
    "riem_geodesic_exact": _Law(
        _sample_pair_t, _eval_riem_geodesic, "delta_R(A, A #_t B) = t delta_R(A,B)"
    ),
    "riem_cancellation": _Law(
        _sample_triple_t,
        _eval_riem_cancellation,
        "delta_R(A #_t B, A #_t C) <= t delta_R(B,C)",
    ),
    "basic_invariances": _Law(
        _sample_invariances,
        _eval_invariances,
        "S(I,A) = S(I,Eig A), congruence, inversion and Kronecker identities",
    ),
    "convexity_region": _Law(
        _sample_convexity,
        _eval_convexity,
        "Hessian of S(., B) is PSD for A <= (1+sqrt2) B and NSD for A >= (1+sqrt2) B",
    ),
    "kron_order": _Law(
        _sample_kron, _eval_kron, "A >= B >= 0 and C >= D >= 0 imply A kron C >= B kron D"
    ),
    "gm_variational": _Law(
        _sample_gm,
        _eval_gm,
        "A # B is equidistant from A and B (delta_S and delta_R) and locally minimizes S(.,A)+S(.,B)",
    ),
    "smean_global": _Law(
        _sample_smean,
        _eval_smean,
        "S-mean is not improved by perturbations and its Hessian is positive definite",
    ),
}

LAW_IDS = tuple(REGISTRY)


def _law(law_id):
    try:
        return REGISTRY[law_id]
    except KeyError:
        raise UnknownLaw(f"unknown law {law_id!r}; known: {', '.join(LAW_IDS)}") from None


def evaluate_law(law_id, inputs):
    """Margin of ``law_id`` on explicit inputs (arrays may be nested lists)."""
    margins = _law(law_id).evaluate(_as_inputs(inputs))
    value = max(float(x) for x in margins)
    if math.isnan(value):
        raise SpdError(f"{law_id}: margin evaluated to NaN")
    return value


def _salt(law_id):
    return zlib.crc32(law_id.encode("ascii"))


def trial_inputs(spec, trial):
    """Inputs of trial ``trial`` of ``spec``, exactly as :func:`run_law` draws them."""
    if spec.inputs is not None:
        return _as_inputs(spec.inputs)
    n = spec.dims[trial % len(spec.dims)]
    cond = spec.cond_target[(trial // len(spec.dims)) % len(spec.cond_target)]
    rng = np.random.default_rng([(int(spec.seed) ^ trial) & 0xFFFFFFFFFFFFFFFF, _salt(spec.law_id)])
    return _law(spec.law_id).sample(rng, n, cond)


def _encode(value):
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, (np.floating, np.integer)):
        return value.item()
    return value


def dumps_witness(law_id, trial, inputs):
    return json.dumps(
        {"law_id": law_id, "trial": trial, "inputs": {k: _encode(v) for k, v in inputs.items()}}
    )


def loads_witness(text):
    doc = json.loads(text)
    return doc["law_id"], doc["inputs"]


def _run_range(spec, start, stop):
    law = _law(spec.law_id)
    worst, worst_trial, violations, errored = -math.inf, -1, 0, 0
    for trial in range(start, stop):
        inputs = trial_inputs(spec, trial)
        try:
            with np.errstate(over="raise", invalid="raise", divide="raise"):
                margin = max(float(x) for x in law.evaluate(inputs))
        except (SpdError, np.linalg.LinAlgError, FloatingPointError):
            errored += 1
            continue
        if math.isnan(margin):
            errored += 1
            continue
        if margin > spec.slack:
            violations += 1
        if margin > worst:
            worst, worst_trial = margin, trial
    return worst, worst_trial, violations, errored


def _chunks(total, parts):
    step = -(-total // parts)
    return [(k, min(k + step, total)) for k in range(0, total, step)]


def run_law(spec):
    """Run ``spec.trials`` trials of one law and aggregate them."""
    trials = int(spec.trials)
    if spec.threads > 1 and trials > 1:
        ranges = _chunks(trials, int(spec.threads))
        with ProcessPoolExecutor(max_workers=int(spec.threads)) as pool:
            parts = list(pool.map(_run_range, [spec] * len(ranges), *zip(*ranges)))
    else:
        parts = [_run_range(spec, 0, trials)]
    worst, worst_trial, violations, errored = -math.inf, -1, 0, 0
    # chunks are in trial order, so strict > keeps the lowest index on ties
    for w, t, v, e in parts:
        violations += v
        errored += e
        if w > worst:
            worst, worst_trial = w, t
    witness = ""
    if worst_trial >= 0:
        witness = dumps_witness(spec.law_id, worst_trial, trial_inputs(spec, worst_trial))
    return LawReport(
        law_id=spec.law_id,
        trials_run=trials,
        violations=violations,
        worst_margin=worst,
        witness=witness,
        passed=violations == 0,
        errored=errored,
        worst_trial=worst_trial,
    )


def run_all(trials_per_law, seed=0, dims=DEFAULT_DIMS, cond_target=DEFAULT_CONDS, threads=1):
    """One :class:`LawReport` per registered law, in registry order."""
    if int(trials_per_law) < 1:
        raise InvalidParameter("trials_per_law must be >= 1")
    return [
        run_law(LawSpec(law_id, trials_per_law, seed, dims, cond_target, threads=threads))
        for law_id in LAW_IDS
    ]
