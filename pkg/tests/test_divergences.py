import math

import mpmath as mp
import numpy as np
import pytest
import scipy.linalg as sla
from hypothesis import given
from hypothesis import strategies as st

from spdkit import (
    GENERATORS,
    DivergenceKind,
    InvalidParameter,
    NonPositiveInput,
    NotSymmetric,
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

from conftest import random_spd, spd_matrices, spd_pairs, spd_triples


def mp_s_div(a, b):
    mp.mp.dps = 40
    A, B = mp.matrix(a.tolist()), mp.matrix(b.tolist())
    return float(mp.log(mp.det((A + B) / 2)) - (mp.log(mp.det(A)) + mp.log(mp.det(B))) / 2)


def mp_log_rel(a, b):
    mp.mp.dps = 40
    ev = mp.eig(mp.inverse(mp.matrix(b.tolist())) * mp.matrix(a.tolist()))[0]
    return sorted((float(mp.log(mp.re(e))) for e in ev), reverse=True)


class TestFrozenValues:
    def test_s_div_scalar_identity(self):
        # 2 log(5/4)
        assert s_div(np.eye(2), 4 * np.eye(2)) == pytest.approx(0.446287102628420, abs=1e-14)

    def test_riemannian_scalar(self):
        assert riemannian(np.eye(2), 4 * np.eye(2)) == pytest.approx(math.sqrt(2) * math.log(4), rel=1e-14)
        assert riemannian(np.eye(2), 4 * np.eye(2)) == pytest.approx(1.960516, abs=1e-6)

    def test_log_euclidean(self):
        assert log_euclidean(np.eye(2), math.e**2 * np.eye(2)) == pytest.approx(2.828427, abs=1e-6)

    def test_thompson(self):
        assert thompson(np.diag([1.0, 1.0]), np.diag([4.0, 0.5])) == pytest.approx(math.log(4))

    def test_stein_loss_scalar(self):
        # x/y - log(x/y) - 1 at x=2, y=1
        assert bregman("neg_log", [[2.0]], [[1.0]]) == pytest.approx(0.306853, abs=1e-6)

    def test_frobenius(self):
        assert bregman("half_square", np.diag([1.0, 2.0]), np.diag([3.0, 2.0])) == pytest.approx(2.0)

    def test_von_neumann_scalar(self):
        x, y = 3.0, 2.0
        ref = x * math.log(x) - x * math.log(y) - x + y
        assert bregman("xlogx_minus_x", [[x]], [[y]]) == pytest.approx(ref, rel=1e-14)

    def test_scalar_delta_s(self):
        assert scalar_delta_s(1.0, 4.0) ** 2 == pytest.approx(math.log(1.25))
        assert scalar_delta_s(3.0, 3.0) == 0.0
        with pytest.raises(NonPositiveInput):
            scalar_delta_s(0.0, 1.0)

    def test_identical_is_zero(self):
        A = random_spd(np.random.default_rng(0), 4)
        assert s_div(A, A) == 0.0
        assert delta_s_metric(A, A) == 0.0


class TestAgainstHighPrecision:
    @given(spd_pairs(max_n=4, max_log_cond=4.0))
    def test_s_div(self, pair):
        a, b = pair
        ref = mp_s_div(a, b)
        assert abs(s_div(a, b) - ref) <= 1e-10 * max(1.0, ref)

    @given(spd_pairs(max_n=4, max_log_cond=4.0))
    def test_riemannian_and_thompson(self, pair):
        a, b = pair
        logs = np.array(mp_log_rel(a, b))
        assert riemannian(a, b) == pytest.approx(np.linalg.norm(logs), rel=1e-9, abs=1e-10)
        assert thompson(a, b) == pytest.approx(np.abs(logs).max(), rel=1e-9, abs=1e-10)

    @given(spd_pairs(max_n=4, max_log_cond=3.0))
    def test_log_euclidean_vs_scipy(self, pair):
        a, b = pair
        ref = np.linalg.norm(sla.logm(a).real - sla.logm(b).real)
        assert log_euclidean(a, b) == pytest.approx(ref, rel=1e-8, abs=1e-9)


class TestProperties:
    @given(spd_pairs())
    def test_symmetry_and_nonnegativity(self, pair):
        a, b = pair
        assert s_div(a, b) >= 0
        assert s_div(a, b) == pytest.approx(s_div(b, a), rel=1e-12, abs=1e-13)
        assert riemannian(a, b) == pytest.approx(riemannian(b, a), rel=1e-9, abs=1e-12)

    @given(spd_triples())
    def test_triangle(self, triple):
        x, y, z = triple
        lhs = delta_s_metric(x, y)
        assert lhs <= delta_s_metric(x, z) + delta_s_metric(z, y) + 1e-10 * max(1.0, lhs)

    @given(spd_pairs(max_log_cond=3.0), st.integers(0, 2**32 - 1))
    def test_congruence_invariance(self, pair, seed):
        a, b = pair
        rng = np.random.default_rng(seed)
        P = rng.standard_normal((a.shape[0], a.shape[0])) + 3 * np.eye(a.shape[0])
        s = s_div(a, b)
        s2 = s_div(P.T @ a @ P, P.T @ b @ P)
        assert s2 == pytest.approx(s, rel=1e-8, abs=1e-9)
        r2 = riemannian(P.T @ a @ P, P.T @ b @ P)
        assert r2 == pytest.approx(riemannian(a, b), rel=1e-8, abs=1e-9)

    @given(spd_pairs())
    def test_inversion_invariance(self, pair):
        a, b = pair
        ai, bi = np.linalg.inv(a), np.linalg.inv(b)
        ai, bi = (ai + ai.T) / 2, (bi + bi.T) / 2
        assert s_div(ai, bi) == pytest.approx(s_div(a, b), rel=1e-8, abs=1e-9)
        assert riemannian(ai, bi) == pytest.approx(riemannian(a, b), rel=1e-8, abs=1e-9)

    @given(spd_matrices())
    def test_s_of_identity_depends_on_spectrum_only(self, a):
        assert s_div(np.eye(a.shape[0]), a) == pytest.approx(
            s_div(np.eye(a.shape[0]), eig_matrix(a)), rel=1e-10, abs=1e-12
        )

    @given(spd_pairs(max_log_cond=3.0))
    def test_jensen_neg_log_is_s_div(self, pair):
        a, b = pair
        assert jensen_div("neg_log", a, b) == pytest.approx(s_div(a, b), rel=1e-9, abs=1e-11)

    @given(spd_pairs(max_log_cond=3.0))
    def test_jensen_half_square(self, pair):
        a, b = pair
        ref = 0.125 * np.linalg.norm(a - b) ** 2
        assert jensen_div("half_square", a, b) == pytest.approx(ref, rel=1e-9, abs=1e-12)

    @given(spd_pairs(max_log_cond=3.0))
    def test_bregman_nonnegative(self, pair):
        for f in GENERATORS:
            assert bregman(f, *pair) >= 0.0
            assert jensen_div(f, *pair) >= 0.0

    @given(spd_pairs(max_log_cond=3.0))
    def test_sandwich(self, pair):
        a, b = pair
        n = a.shape[0]
        S, r = s_div(a, b), riemannian(a, b)
        assert 8 * S <= r**2 * (1 + 1e-10) + 1e-12
        assert r**2 <= 2 * thompson(a, b) * (S + n * math.log(2)) * (1 + 1e-10)

    def test_eig_matrix(self):
        np.testing.assert_allclose(eig_matrix(np.diag([1.0, 3.0])), np.diag([3.0, 1.0]))
        np.testing.assert_allclose(eig_matrix(np.diag([1.0, 3.0]), descending=False), np.diag([1.0, 3.0]))


class TestErrors:
    def test_unknown_generator(self):
        with pytest.raises(InvalidParameter):
            bregman("cosh", np.eye(2), np.eye(2))

    def test_half_square_accepts_symmetric(self):
        assert bregman("half_square", -np.eye(2), np.eye(2)) == pytest.approx(4.0)
        with pytest.raises(NotSymmetric):
            bregman("half_square", [[0.0, 1.0], [0.0, 0.0]], np.eye(2))

    def test_neg_log_needs_spd(self):
        with pytest.raises(NonPositiveInput):
            bregman("neg_log", -np.eye(2), np.eye(2))

    def test_dispatch(self):
        a, b = np.eye(2), 4 * np.eye(2)
        assert divergence("sdiv", a, b) == s_div(a, b)
        assert divergence(DivergenceKind.RIEMANNIAN, a, b) == riemannian(a, b)
        assert divergence("jensen_f", a, b, f="neg_log") == pytest.approx(s_div(a, b))
        assert len(DivergenceKind) == 9
        with pytest.raises(ValueError):
            divergence("nope", a, b)


def _vec_sym(rng, n):
    d = rng.standard_normal((n, n))
    return (d + d.T) / 2


class TestCalculus:
    @pytest.mark.parametrize("seed", range(10))
    def test_gradient_central_difference(self, seed):
        rng = np.random.default_rng(seed)
        n = 1 + seed % 5
        X, Y = random_spd(rng, n), random_spd(rng, n)
        G = s_div_grad(X, Y)
        D = _vec_sym(rng, n)
        h = 1e-5 * np.linalg.norm(X)
        fd = (s_div(X + h * D, Y) - s_div(X - h * D, Y)) / (2 * h)
        assert abs(fd - np.sum(G * D)) <= 1e-5 * max(1.0, abs(fd))

    def test_gradient_vanishes_at_equal(self):
        X = np.diag([1.0, 2.0])
        np.testing.assert_allclose(s_div_grad(X, X), 0.0, atol=1e-15)

    @pytest.mark.parametrize("seed", range(10))
    def test_hessian_central_difference(self, seed):
        rng = np.random.default_rng(100 + seed)
        n = 1 + seed % 4
        A, B = random_spd(rng, n), random_spd(rng, n)
        H = s_div_hessian(A, B)
        D, E = _vec_sym(rng, n), _vec_sym(rng, n)
        h = 1e-4 * np.linalg.norm(A)
        fd = (s_div_grad(A + h * E, B) - s_div_grad(A - h * E, B)) / (2 * h)
        exact = D.reshape(-1) @ H @ E.reshape(-1)
        assert abs(np.sum(fd * D) - exact) <= 1e-4 * max(1.0, abs(exact))

    def test_hessian_convexity_region(self):
        rng = np.random.default_rng(5)
        B = random_spd(rng, 3)
        Bh = sla.sqrtm(B).real
        for m, sign in ((2.0, 1), (2.5, -1)):
            A = Bh @ (m * np.eye(3)) @ Bh
            w = np.linalg.eigvalsh(s_div_hessian(A, B))
            if sign > 0:
                assert w[0] >= -1e-10 * np.abs(w).max()
            else:
                assert w[-1] <= 1e-10 * np.abs(w).max()
