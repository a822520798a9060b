"""Validated SPD matrices, factorizations, spectral matrix functions and
seeded random SPD generation.

Public functions accept either an :class:`SpdMatrix` or anything
``numpy.asarray`` understands; plain arrays are validated on entry. Functions
prefixed with an underscore work on trusted float64 arrays and skip validation,
which is what the inner loops of the other modules use.
"""

from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy.linalg import solve_triangular

from ._backend import kernels
from .errors import (
    ConvergenceFailure,
    DimensionMismatch,
    DimensionOverflow,
    InvalidParameter,
    NotPositiveDefinite,
    NotSquare,
    NotSymmetric,
)

SYMMETRY_TOL = 1e-12
KRON_CAP = 4096


class SpdMatrix:
    """Immutable real symmetric positive definite matrix.

    The entries are symmetrized by averaging with the transpose and checked
    with a Cholesky factorization. ``np.asarray(A)`` returns a read-only view.
    """

    def __init__(self, raw):
        a = _as_square(raw)
        scale = float(np.max(np.abs(a))) if a.size else 0.0
        asym = float(np.max(np.abs(a - a.T)))
        if asym > SYMMETRY_TOL * scale:
            raise NotSymmetric(f"asymmetry {asym:.3e} exceeds {SYMMETRY_TOL:g} * max|a_ij|")
        a = 0.5 * (a + a.T)
        try:
            L = np.linalg.cholesky(a)
        except np.linalg.LinAlgError:
            raise NotPositiveDefinite("Cholesky factorization hit a nonpositive pivot") from None
        if not np.all(np.diagonal(L) > 0):
            raise NotPositiveDefinite("Cholesky factorization hit a nonpositive pivot")
        self._set(a, L)

    @classmethod
    def _trusted(cls, a):
        """Wrap an array known to be SPD by construction (symmetrized, not checked)."""
        obj = cls.__new__(cls)
        a = np.array(a, dtype=np.float64)
        obj._set(0.5 * (a + a.T), None)
        return obj

    def _set(self, a, L):
        a = np.ascontiguousarray(a, dtype=np.float64)
        a.flags.writeable = False
        if L is not None:
            L.flags.writeable = False
        self._data = a
        self._chol = L

    @property
    def data(self):
        return self._data

    @property
    def n(self):
        return self._data.shape[0]

    @property
    def shape(self):
        return self._data.shape

    @property
    def chol(self):
        if self._chol is None:
            L = np.linalg.cholesky(self._data)
            L.flags.writeable = False
            self._chol = L
        return self._chol

    @cached_property
    def logdet(self):
        return 2.0 * float(np.sum(np.log(np.diagonal(self.chol))))

    def __array__(self, dtype=None, copy=None):
        if dtype is not None and np.dtype(dtype) != self._data.dtype:
            return self._data.astype(dtype)
        if copy:
            return self._data.copy()
        return self._data

    def __eq__(self, other):
        if isinstance(other, SpdMatrix):
            return np.array_equal(self._data, other._data)
        return NotImplemented

    __hash__ = None

    def __repr__(self):
        body = np.array2string(self._data, precision=6, separator=", ")
        return f"SpdMatrix(n={self.n}, {body})"


@dataclass(frozen=True)
class EigenDecomposition:
    """Eigenvalues sorted descending with orthonormal eigenvectors in columns."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def reconstruct(self):
        U = self.eigenvectors
        return (U * self.eigenvalues) @ U.T


@dataclass(frozen=True)
class CongruencePair:
    """``transform.T @ A @ transform = I`` and ``transform.T @ B @ transform = diag(diagonal)``."""

    transform: np.ndarray
    diagonal: np.ndarray


def _as_square(raw):
    a = np.array(raw, dtype=np.float64)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] == 0:
        raise NotSquare(f"expected a nonempty square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise NotPositiveDefinite("matrix has non-finite entries")
    return a


def make_spd(raw):
    """Validate ``raw`` and return it as an :class:`SpdMatrix`."""
    if isinstance(raw, SpdMatrix):
        return raw
    return SpdMatrix(raw)


def as_array(A):
    """Trusted float64 view of an SpdMatrix, or validate a raw array."""
    if isinstance(A, SpdMatrix):
        return A.data
    return SpdMatrix(A).data


def as_symmetric(B):
    a = _as_square(B)
    scale = float(np.max(np.abs(a)))
    if float(np.max(np.abs(a - a.T))) > SYMMETRY_TOL * max(scale, 1e-300):
        raise NotSymmetric("matrix is not symmetric")
    return 0.5 * (a + a.T)


def check_same_dim(*arrays):
    n = arrays[0].shape[0]
    for a in arrays[1:]:
        if a.shape[0] != n:
            raise DimensionMismatch(f"dimension {a.shape[0]} does not match {n}")
    return n


def cholesky(A):
    """Lower Cholesky factor ``L`` with ``L @ L.T == A``."""
    return make_spd(A).chol.copy()


def _eigh(a):
    try:
        w, U = np.linalg.eigh(a)
    except np.linalg.LinAlgError as exc:
        raise ConvergenceFailure(f"symmetric eigensolver did not converge: {exc}") from None
    return w[::-1], U[:, ::-1]


def sym_eig(A):
    """Eigendecomposition of an SPD matrix, eigenvalues descending."""
    w, U = _eigh(as_array(A))
    if not np.all(w > 0):
        raise ConvergenceFailure("eigensolver returned a nonpositive eigenvalue for an SPD input")
    return EigenDecomposition(np.ascontiguousarray(w), np.ascontiguousarray(U))


_SCALAR_FNS = {
    "log": np.log,
    "exp": np.exp,
    "sqrt": np.sqrt,
    "inverse": lambda w: 1.0 / w,
}


def _spectral(a, fn):
    w, U = _eigh(a)
    return _sym((U * fn(w)) @ U.T)


def _sym(a):
    return 0.5 * (a + a.T)


def _power(a, t):
    if t == 1:
        return a.copy()
    if t == 0:
        return np.eye(a.shape[0])
    return _spectral(a, lambda w: w**t)


def mat_fn(A, f, t=None):
    """Spectral matrix function ``U f(Lambda) U.T``.

    ``f`` is one of ``"log"``, ``"exp"``, ``"sqrt"``, ``"inverse"`` or
    ``"power"`` (with exponent ``t``). ``exp`` accepts any symmetric matrix;
    the others require SPD input. ``log`` returns a plain symmetric array,
    every other function returns an :class:`SpdMatrix`.
    """
    if f == "exp":
        return SpdMatrix._trusted(_spectral(as_symmetric(A), np.exp))
    a = as_array(A)
    if f == "power":
        if t is None or not np.isfinite(t):
            raise InvalidParameter("power needs a finite exponent t")
        return SpdMatrix._trusted(_power(a, float(t)))
    if f not in _SCALAR_FNS:
        raise InvalidParameter(f"unknown matrix function {f!r}")
    out = _spectral(a, _SCALAR_FNS[f])
    if f == "log":
        return out
    return SpdMatrix._trusted(out)


def logm(A):
    return mat_fn(A, "log")


def expm(S):
    return mat_fn(S, "exp")


def sqrtm(A):
    return mat_fn(A, "sqrt")


def invm(A):
    return mat_fn(A, "inverse")


def powm(A, t):
    return mat_fn(A, "power", t)


def simultaneous_diagonalize(A, B):
    """Congruence ``P`` with ``P.T A P = I`` and ``P.T B P`` diagonal.

    With ``A = U diag(lam) U.T``, set ``S = diag(lam)^{-1/2}``, diagonalize
    ``S U.T B U S = V diag(d) V.T`` and take ``P = U S V``. ``B`` need only
    be symmetric.
    """
    a = as_array(A)
    b = as_symmetric(B)
    check_same_dim(a, b)
    lam, U = _eigh(a)
    s = 1.0 / np.sqrt(lam)
    US = U * s
    d, V = _eigh(_sym(US.T @ b @ US))
    return CongruencePair(transform=US @ V, diagonal=d)


def _whiten(a, b):
    """``L^{-1} a L^{-T}`` where ``b = L L.T``; never forms an inverse."""
    L = np.linalg.cholesky(b)
    m = solve_triangular(L, a, lower=True, check_finite=False)
    m = solve_triangular(L, m.T, lower=True, check_finite=False)
    return _sym(m)


def _relative_factor(a, b):
    """``C = L_b^{-1} L_a`` for Cholesky factors, so ``C C^T = L_b^{-1} a L_b^{-T}``."""
    La = np.linalg.cholesky(a)
    Lb = np.linalg.cholesky(b)
    return solve_triangular(Lb, La, lower=True, check_finite=False)


def _log_relative_eigvals(a, b):
    # Squared singular values of C are the eigenvalues of b^{-1} a. Taking
    # them from C rather than from C C^T keeps small ones accurate to about
    # eps * sqrt(cond) instead of eps * cond.
    try:
        sv = np.linalg.svd(_relative_factor(a, b), compute_uv=False)
    except np.linalg.LinAlgError as exc:
        raise ConvergenceFailure(str(exc)) from None
    if not np.all(sv > 0):
        raise ConvergenceFailure("generalized eigenvalue lost positivity")
    return 2.0 * np.log(sv)


def log_relative_spectrum(A, B):
    """Logs of the eigenvalues of ``A B^{-1}``, sorted descending.

    Computed from the singular values of ``L_B^{-1} L_A`` (Cholesky factors),
    which never forms an inverse or the whitened product.
    """
    a, b = as_array(A), as_array(B)
    check_same_dim(a, b)
    return _log_relative_eigvals(a, b)


def kron(A, B, cap=KRON_CAP):
    a = np.atleast_2d(np.asarray(A, dtype=np.float64))
    b = np.atleast_2d(np.asarray(B, dtype=np.float64))
    rows, cols = a.shape[0] * b.shape[0], a.shape[1] * b.shape[1]
    if max(rows, cols) > cap:
        raise DimensionOverflow(f"Kronecker product of size {rows}x{cols} exceeds cap {cap}")
    return np.kron(a, b)


def loewner_leq(A, B, tol=1e-10):
    """True when ``B - A`` is PSD up to ``tol * max(1, ||B - A||_F)``."""
    a = np.asarray(A, dtype=np.float64)
    b = np.asarray(B, dtype=np.float64)
    if a.shape != b.shape:
        raise DimensionMismatch(f"shapes {a.shape} and {b.shape} differ")
    d = _sym(b - a)
    lam_min = np.linalg.eigvalsh(d)[0]
    return bool(lam_min >= -tol * max(1.0, float(np.linalg.norm(d))))


def _rng(seed):
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(int(seed) & 0xFFFFFFFFFFFFFFFF)


def random_orthogonal(n, rng):
    """Haar-distributed orthogonal matrix from the QR of a Gaussian matrix."""
    Q, R = np.linalg.qr(rng.standard_normal((n, n)))
    return Q * np.copysign(1.0, np.diagonal(R))


def random_spectrum(n, rng, cond_target):
    """Log-uniform spectrum on ``[c^{-1/2}, c^{1/2}]`` with both ends attained for n >= 2."""
    half = 0.5 * np.log(cond_target)
    logs = rng.uniform(-half, half, size=n)
    if n >= 2:
        logs[0], logs[1] = half, -half
    return np.exp(logs)


def _random_spd(n, rng, cond_target):
    Q = random_orthogonal(n, rng)
    lam = random_spectrum(n, rng, cond_target)
    return _sym((Q * lam) @ Q.T)


def random_spd(n, seed, cond_target=10.0):
    """Deterministic random SPD matrix ``Q diag(lam) Q.T``.

    ``seed`` is an integer (or a ``numpy.random.Generator`` to continue a
    stream). The spectrum is log-uniform on ``[c^{-1/2}, c^{1/2}]`` with
    ``c = cond_target``; for ``n >= 2`` the two endpoints are always present,
    so the condition number equals ``cond_target`` up to rounding.
    """
    if n < 1:
        raise InvalidParameter("n must be >= 1")
    if not cond_target >= 1:
        raise InvalidParameter("cond_target must be >= 1")
    return make_spd(_random_spd(int(n), _rng(seed), float(cond_target)))


def logdet(A):
    """log det via the Cholesky diagonal."""
    if isinstance(A, SpdMatrix):
        return A.logdet
    a = as_array(A)
    return kernels.chol_logdet(np.ascontiguousarray(a))
