"""Distances and divergences between SPD matrices.

The S-divergence ``S(X, Y) = log det((X+Y)/2) - 1/2 log det(XY)`` is
evaluated from three Cholesky log-determinants; the Riemannian, Thompson and
log-Euclidean distances need eigenvalues. Matrix Bregman divergences and
their Jensen symmetrizations are provided for the three generators
``half_square``, ``xlogx_minus_x`` and ``neg_log``.
"""

import enum
import math

import numpy as np

from ._backend import kernels
from .errors import InvalidParameter, NonPositiveInput, NotPositiveDefinite, NumericalError
from .pdcore import (
    _eigh,
    _log_relative_eigvals,
    _spectral,
    _sym,
    as_array,
    as_symmetric,
    check_same_dim,
    kron,
)

NEG_CLAMP = 1e-12


class DivergenceKind(str, enum.Enum):
    SDIV = "sdiv"
    SDELTA = "sdelta"
    RIEMANNIAN = "riemannian"
    LOGEUCLID = "logeuclid"
    THOMPSON = "thompson"
    FROBENIUS_SQ = "frobenius_sq"
    VON_NEUMANN = "von_neumann"
    LOGDET_STEIN = "logdet_stein"
    JENSEN_F = "jensen_f"


def _clamp(value, what):
    if value >= 0.0:
        return value
    if value >= -NEG_CLAMP:
        return 0.0
    if math.isnan(value):
        raise NumericalError(f"{what} evaluated to NaN")
    raise NumericalError(f"{what} evaluated to {value:.3e} < 0")


def _contig(a):
    return np.ascontiguousarray(a, dtype=np.float64)


def _s_div(x, y):
    value = kernels.s_div_raw(_contig(x), _contig(y))
    if math.isnan(value):
        raise NumericalError("Cholesky factorization failed inside s_div")
    return _clamp(value, "s_div")


def _pair(X, Y):
    x, y = as_array(X), as_array(Y)
    check_same_dim(x, y)
    return x, y


def s_div(X, Y):
    """S-divergence, clamped to 0 when roundoff pushes it just below zero."""
    return _s_div(*_pair(X, Y))


def delta_s_metric(X, Y):
    """``sqrt(S(X, Y))``, a metric on SPD matrices."""
    return math.sqrt(s_div(X, Y))


def scalar_delta_s(x, y):
    """Scalar ``sqrt(log((x + y) / (2 sqrt(xy))))`` for positive ``x, y``."""
    x, y = float(x), float(y)
    if not (x > 0 and y > 0):
        raise NonPositiveInput(f"scalar_delta_s needs x, y > 0, got {x}, {y}")
    return math.sqrt(_clamp(math.log((x + y) / (2.0 * math.sqrt(x * y))), "delta_s"))


def _riemannian(x, y):
    return float(np.linalg.norm(_log_relative_eigvals(x, y)))


def riemannian(X, Y):
    """Affine-invariant distance ``||log(Y^{-1/2} X Y^{-1/2})||_F``."""
    return _riemannian(*_pair(X, Y))


def _thompson(x, y):
    return float(np.max(np.abs(_log_relative_eigvals(x, y))))


def thompson(X, Y):
    """Infinity norm of the log generalized spectrum of ``(X, Y)``."""
    return _thompson(*_pair(X, Y))


def _log_euclidean(x, y):
    return float(np.linalg.norm(_spectral(x, np.log) - _spectral(y, np.log)))


def log_euclidean(X, Y):
    """``||log X - log Y||_F``."""
    return _log_euclidean(*_pair(X, Y))


# Bregman generators ----------------------------------------------------------

GENERATORS = ("half_square", "xlogx_minus_x", "neg_log")


def _check_generator(f):
    if f not in GENERATORS:
        raise InvalidParameter(f"unknown generator {f!r}; expected one of {GENERATORS}")


def _operands(f, X, Y):
    if f == "half_square":
        x, y = as_symmetric(X), as_symmetric(Y)
    else:
        try:
            x, y = as_array(X), as_array(Y)
        except NotPositiveDefinite as exc:
            raise NonPositiveInput(f"generator {f!r} needs SPD inputs: {exc}") from None
    check_same_dim(x, y)
    return x, y


def _trace_f(f, x):
    if f == "half_square":
        return 0.5 * float(np.sum(x * x))
    if f == "neg_log":
        return -kernels.chol_logdet(_contig(x))
    w = np.linalg.eigvalsh(x)
    return float(np.sum(w * np.log(w) - w))


def _bregman(f, x, y):
    if f == "half_square":
        return 0.5 * float(np.sum((x - y) ** 2))
    if f == "neg_log":
        n = x.shape[0]
        yinv_x = np.linalg.solve(y, x)
        ld_x = kernels.chol_logdet(_contig(x))
        ld_y = kernels.chol_logdet(_contig(y))
        return float(np.trace(yinv_x)) - n - ld_x + ld_y
    # trace(X log X - X log Y - X + Y)
    lx = _spectral(x, np.log)
    ly = _spectral(y, np.log)
    return float(np.sum(x * (lx - ly)) - np.trace(x) + np.trace(y))


def bregman(f, X, Y):
    """Matrix Bregman divergence ``tr f(X) - tr f(Y) - tr(f'(Y)(X - Y))``.

    ``half_square`` gives ``1/2 ||X - Y||_F^2``, ``xlogx_minus_x`` the von
    Neumann divergence and ``neg_log`` the LogDet divergence (Stein's loss).
    """
    _check_generator(f)
    x, y = _operands(f, X, Y)
    return _clamp(_bregman(f, x, y), f"bregman[{f}]")


def jensen_div(f, X, Y):
    """Jensen symmetrization ``1/2 (tr f(X) + tr f(Y)) - tr f((X+Y)/2)``."""
    _check_generator(f)
    x, y = _operands(f, X, Y)
    value = 0.5 * (_trace_f(f, x) + _trace_f(f, y)) - _trace_f(f, 0.5 * (x + y))
    return _clamp(value, f"jensen[{f}]")


# Calculus -------------------------------------------------------------------


def _spd_inv(a):
    inv = kernels.spd_inverse(_contig(a))
    if inv is None:
        raise NumericalError("Cholesky inversion failed")
    return inv


def s_div_grad(X, Y):
    """Gradient in the first argument: ``(X + Y)^{-1} - 1/2 X^{-1}``."""
    x, y = _pair(X, Y)
    return _sym(_spd_inv(x + y) - 0.5 * _spd_inv(x))


def s_div_hessian(A, B, cap=None):
    """Hessian of ``S(., B)`` at ``A`` in vectorized coordinates.

    ``1/2 (A^{-1} kron A^{-1}) - (A+B)^{-1} kron (A+B)^{-1}``, valid as a
    quadratic form on symmetric directions.
    """
    a, b = _pair(A, B)
    kw = {} if cap is None else {"cap": cap}
    ai = _spd_inv(a)
    si = _spd_inv(a + b)
    H = 0.5 * kron(ai, ai, **kw) - kron(si, si, **kw)
    return _sym(H)


def divergence(kind, X, Y, f="neg_log"):
    """Dispatch on a :class:`DivergenceKind` tag (``f`` is used by ``jensen_f``)."""
    kind = DivergenceKind(kind)
    if kind is DivergenceKind.SDIV:
        return s_div(X, Y)
    if kind is DivergenceKind.SDELTA:
        return delta_s_metric(X, Y)
    if kind is DivergenceKind.RIEMANNIAN:
        return riemannian(X, Y)
    if kind is DivergenceKind.LOGEUCLID:
        return log_euclidean(X, Y)
    if kind is DivergenceKind.THOMPSON:
        return thompson(X, Y)
    if kind is DivergenceKind.FROBENIUS_SQ:
        return bregman("half_square", X, Y)
    if kind is DivergenceKind.VON_NEUMANN:
        return bregman("xlogx_minus_x", X, Y)
    if kind is DivergenceKind.LOGDET_STEIN:
        return bregman("neg_log", X, Y)
    return jensen_div(f, X, Y)


def eig_matrix(x, descending=True):
    """Diagonal matrix of sorted eigenvalues (``Eig`` in the inequalities)."""
    w, _ = _eigh(x)
    return np.diag(w if descending else w[::-1])
