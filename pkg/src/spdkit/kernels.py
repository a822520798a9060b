"""Determinant kernels ``det(X_i + X_j)^{-beta}`` and their positive
semidefiniteness.

For real SPD matrices of size n the Gram matrix is PSD for every bundle
exactly when ``beta`` is a half-integer ``j/2`` with ``1 <= j <= n-1`` or
any real ``beta > (n-1)/2``. :func:`counterexample_bundle` gives five 2x2
matrices whose Gram matrix at ``beta = 0.1`` is indefinite.
"""

import math
from dataclasses import dataclass

import numpy as np

from ._backend import kernels as _k
from .bundle import MatrixBundle
from .errors import InvalidParameter, NonPositiveInput, Overflow
from .pdcore import _random_spd

VARIANTS = ("det_sum", "normalized")
PSD_RTOL = 1e-10
HALF_INT_TOL = 1e-12
# exp() overflows past ~709.78
EXP_LIMIT = 700.0


@dataclass(frozen=True)
class GramSpec:
    bundle: MatrixBundle
    beta: float
    variant: str = "det_sum"

    def __post_init__(self):
        if not self.beta > 0:
            raise InvalidParameter(f"beta must be positive, got {self.beta}")
        if self.variant not in VARIANTS:
            raise InvalidParameter(f"variant must be one of {VARIANTS}")
        if len(self.bundle) == 0:
            raise InvalidParameter("bundle is empty")


@dataclass(frozen=True)
class GramReport:
    gram: np.ndarray
    min_eig: float
    max_eig: float
    psd: bool
    beta_admissible: bool


def beta_admissible(beta, n):
    """Whether ``beta`` gives a PSD determinant kernel for every n x n bundle."""
    beta = float(beta)
    if not beta > 0 or int(n) < 1:
        raise InvalidParameter(f"need beta > 0 and n >= 1, got beta={beta}, n={n}")
    if beta > 0.5 * (n - 1):
        return True
    j = round(2.0 * beta)
    return abs(2.0 * beta - j) <= HALF_INT_TOL and 1 <= j <= n - 1


def _report(H, beta, n):
    H = 0.5 * (H + H.T)
    w = np.linalg.eigvalsh(H)
    lo, hi = float(w[0]), float(w[-1])
    return GramReport(H, lo, hi, lo >= -PSD_RTOL * max(1.0, hi), beta_admissible(beta, n))


def _exp_checked(expo):
    if np.max(np.abs(expo)) > EXP_LIMIT:
        raise Overflow("log-determinant times beta leaves the exp() range; rescale the bundle")
    return np.exp(expo)


def gram_from_stack(stack, beta, variant="det_sum"):
    """Gram matrix for a stack of SPD matrices of shape (m, n, n)."""
    stack = np.ascontiguousarray(stack, dtype=np.float64)
    L = _k.pair_logdets(stack)
    expo = -beta * L
    if variant == "normalized":
        # log det(2 X_i) sits on the diagonal of the pairwise table
        d = np.diagonal(L)
        expo = expo + 0.5 * beta * (d[:, None] + d[None, :])
        np.fill_diagonal(expo, 0.0)
    return _exp_checked(expo)


def gram_matrix(spec):
    """Gram matrix, extreme eigenvalues and PSD verdict for a bundle.

    ``det_sum`` uses ``det(X_i + X_j)^{-beta}``; ``normalized`` uses
    ``exp(-beta S(X_i, X_j))``. The two differ by a positive diagonal
    congruence, so they share the PSD verdict.
    """
    H = gram_from_stack(spec.bundle.stack(), spec.beta, spec.variant)
    return _report(H, spec.beta, spec.bundle.n)


_COUNTEREXAMPLE = (
    ("X1", [[0.1406, 0.0347], [0.0347, 0.1779]]),
    ("X2", [[2.0195, 0.0066], [0.0066, 0.2321]]),
    ("X3", [[1.0924, 0.0609], [0.0609, 1.2520]]),
    ("X4", [[1.0309, 0.8694], [0.8694, 1.2310]]),
    ("X5", [[0.2870, -0.4758], [-0.4758, 2.3569]]),
)


def counterexample_bundle():
    """Five 2x2 SPD matrices whose ``beta = 0.1`` Gram matrix is indefinite."""
    return MatrixBundle(2, tuple((label, np.array(rows)) for label, rows in _COUNTEREXAMPLE))


def scalar_gram(xs, beta):
    """Gram matrix ``[(x_i + x_j)^{-beta}]`` for positive scalars."""
    x = np.asarray(xs, dtype=np.float64).ravel()
    if x.size == 0 or not np.all(x > 0):
        raise NonPositiveInput("scalar_gram needs a nonempty list of positive numbers")
    if not beta > 0:
        raise InvalidParameter(f"beta must be positive, got {beta}")
    H = _exp_checked(-beta * np.log(x[:, None] + x[None, :]))
    return _report(H, beta, 1)


def _random_bundle_stack(n, m, rng):
    # Spread of conditioning and scale.
    out = np.empty((m, n, n))
    for i in range(m):
        cond = math.exp(rng.uniform(0.0, math.log(1e3)))
        scale = math.exp(rng.uniform(math.log(0.1), math.log(10.0)))
        out[i] = scale * _random_spd(n, rng, cond)
    return out


def _star_bundle_stack(n, m, rng):
    # A small and a unit multiple of I plus elongated "leaves" along random
    # directions; this is the shape of the printed 2x2 counterexample and
    # hits far more often than unstructured sampling.
    eye = np.eye(n)
    out = np.empty((m, n, n))
    out[0] = math.exp(rng.uniform(math.log(0.08), math.log(0.3))) * eye
    out[1] = math.exp(rng.uniform(-0.3, 0.3)) * eye
    for k in range(2, m):
        u = rng.standard_normal(n)
        u /= np.linalg.norm(u)
        ratio = math.exp(rng.uniform(math.log(4.0), math.log(20.0)))
        scale = math.exp(rng.uniform(-1.2, 0.0)) / math.sqrt(ratio)
        out[k] = scale * (eye + (ratio - 1.0) * np.outer(u, u))
    return out


def search_indefinite(n, beta, budget, seed=0, indef_rtol=1e-8):
    """Randomized search for a bundle of ``n + 3`` matrices with an indefinite Gram.

    Even trials draw a structured bundle (two multiples of the identity and
    ``n + 1`` elongated matrices), odd trials an unstructured one with
    condition numbers up to 1e3 and scales in [0.1, 10]. Trial ``k`` uses
    its own generator seeded by ``(seed, k)``, so results are reproducible.

    Returns the first bundle (lowest trial index) whose smallest Gram
    eigenvalue is below ``-indef_rtol * max_eig``, or ``None`` when the
    budget runs out. ``None`` is inconclusive, not a proof of
    positivity.
    """
    if int(budget) < 1:
        raise InvalidParameter("budget must be >= 1")
    if not beta > 0:
        raise InvalidParameter(f"beta must be positive, got {beta}")
    n = int(n)
    if n < 1:
        raise InvalidParameter("n must be >= 1")
    m = n + 3
    for trial in range(int(budget)):
        rng = np.random.default_rng([int(seed) & 0xFFFFFFFFFFFFFFFF, trial])
        sampler = _star_bundle_stack if trial % 2 == 0 else _random_bundle_stack
        stack = sampler(n, m, rng)
        try:
            H = gram_from_stack(stack, beta)
        except Overflow:
            continue
        w = np.linalg.eigvalsh(0.5 * (H + H.T))
        if w[0] < -indef_rtol * w[-1]:
            return MatrixBundle.from_matrices(list(stack))
    return None
