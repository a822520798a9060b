import numpy as np
import pytest
import scipy.linalg as sla
from hypothesis import given
from hypothesis import strategies as st

from spdkit import (
    DimensionMismatch,
    DimensionOverflow,
    InvalidParameter,
    NotPositiveDefinite,
    NotSquare,
    NotSymmetric,
    SpdMatrix,
    cholesky,
    expm,
    invm,
    kron,
    log_relative_spectrum,
    logdet,
    loewner_leq,
    logm,
    make_spd,
    mat_fn,
    powm,
    random_spd,
    simultaneous_diagonalize,
    sqrtm,
    sym_eig,
)

from conftest import spd_matrices, spd_pairs


class TestValidation:
    def test_identity_is_accepted(self):
        A = make_spd(np.eye(3))
        assert A.n == 3 and A.shape == (3, 3)
        np.testing.assert_array_equal(np.asarray(A), np.eye(3))

    def test_make_spd_passes_through(self):
        A = make_spd(np.eye(2))
        assert make_spd(A) is A

    def test_not_square(self):
        with pytest.raises(NotSquare):
            SpdMatrix(np.ones((2, 3)))
        with pytest.raises(NotSquare):
            SpdMatrix(np.ones(3))

    def test_asymmetric_beyond_tolerance(self):
        with pytest.raises(NotSymmetric):
            SpdMatrix([[2.0, 1.0], [1.0 + 1e-9, 2.0]])

    def test_roundoff_asymmetry_is_symmetrized(self):
        A = SpdMatrix([[2.0, 1.0], [1.0 + 1e-14, 2.0]])
        np.testing.assert_array_equal(A.data, A.data.T)

    @pytest.mark.parametrize(
        "raw",
        [[[1.0, 0.0], [0.0, 0.0]], [[1.0, 2.0], [2.0, 1.0]], [[-1.0]], [[np.nan]], [[np.inf]]],
    )
    def test_not_positive_definite(self, raw):
        with pytest.raises(NotPositiveDefinite):
            SpdMatrix(raw)

    def test_errors_are_value_errors(self):
        with pytest.raises(ValueError):
            make_spd([[0.0]])

    def test_data_is_read_only(self):
        A = make_spd(np.eye(2))
        with pytest.raises(ValueError):
            A.data[0, 0] = 5.0

    def test_input_is_copied(self):
        raw = np.eye(2)
        A = make_spd(raw)
        raw[0, 0] = 7.0
        assert A.data[0, 0] == 1.0

    def test_equality(self):
        assert make_spd(np.eye(2)) == make_spd(np.eye(2))
        assert make_spd(np.eye(2)) != make_spd(2 * np.eye(2))


class TestFactorizations:
    @given(spd_matrices())
    def test_cholesky_reconstructs(self, a):
        L = cholesky(a)
        np.testing.assert_allclose(L @ L.T, a, rtol=1e-12, atol=1e-12 * np.abs(a).max())
        assert np.allclose(L, np.tril(L))

    @given(spd_matrices())
    def test_sym_eig_invariants(self, a):
        e = sym_eig(a)
        n = a.shape[0]
        assert np.all(np.diff(e.eigenvalues) <= 0)
        assert np.all(e.eigenvalues > 0)
        assert np.linalg.norm(e.reconstruct() - a) <= 1e-10 * np.linalg.norm(a)
        U = e.eigenvectors
        assert np.linalg.norm(U.T @ U - np.eye(n)) <= 1e-10 * np.sqrt(n)

    def test_sym_eig_known(self):
        e = sym_eig(np.diag([1.0, 3.0, 2.0]))
        np.testing.assert_allclose(e.eigenvalues, [3.0, 2.0, 1.0])

    @given(spd_pairs())
    def test_simultaneous_diagonalization(self, pair):
        a, b = pair
        cp = simultaneous_diagonalize(a, b)
        P = cp.transform
        n = a.shape[0]
        assert np.linalg.norm(P.T @ a @ P - np.eye(n)) <= 1e-8
        scale = max(1.0, np.abs(cp.diagonal).max())
        assert np.linalg.norm(P.T @ b @ P - np.diag(cp.diagonal)) <= 1e-8 * scale

    def test_simultaneous_diagonalization_symmetric_b(self):
        cp = simultaneous_diagonalize(np.diag([4.0, 1.0]), np.diag([-4.0, 3.0]))
        np.testing.assert_allclose(sorted(cp.diagonal), [-1.0, 3.0])

    @given(spd_matrices())
    def test_logdet_matches_slogdet(self, a):
        sign, ld = np.linalg.slogdet(a)
        assert sign == 1
        assert abs(logdet(a) - ld) <= 1e-10 * max(1.0, abs(ld))
        assert abs(make_spd(a).logdet - ld) <= 1e-10 * max(1.0, abs(ld))


class TestMatrixFunctions:
    @given(spd_matrices(max_log_cond=3.0))
    def test_against_scipy(self, a):
        np.testing.assert_allclose(logm(a), sla.logm(a).real, atol=1e-9)
        np.testing.assert_allclose(sqrtm(a).data, sla.sqrtm(a).real, rtol=1e-8, atol=1e-10)
        np.testing.assert_allclose(invm(a).data, np.linalg.inv(a), rtol=1e-8, atol=1e-8)
        np.testing.assert_allclose(powm(a, 0.5).data, sqrtm(a).data, rtol=1e-10, atol=1e-12)

    @given(spd_matrices(max_log_cond=2.0))
    def test_exp_log_roundtrip(self, a):
        np.testing.assert_allclose(expm(logm(a)).data, a, rtol=1e-9, atol=1e-10 * np.abs(a).max())

    def test_exp_accepts_indefinite_symmetric(self):
        S = np.array([[0.0, 1.0], [1.0, 0.0]])
        np.testing.assert_allclose(expm(S).data, sla.expm(S), rtol=1e-12)

    def test_power_edge_cases(self):
        a = np.diag([4.0, 9.0])
        np.testing.assert_allclose(powm(a, 0).data, np.eye(2))
        np.testing.assert_allclose(powm(a, 1).data, a)
        np.testing.assert_allclose(powm(a, -0.5).data, np.diag([0.5, 1 / 3]))

    def test_log_returns_plain_array(self):
        assert isinstance(logm(np.eye(2)), np.ndarray)
        assert isinstance(sqrtm(np.eye(2)), SpdMatrix)

    def test_unknown_function(self):
        with pytest.raises(InvalidParameter):
            mat_fn(np.eye(2), "cosh")
        with pytest.raises(InvalidParameter):
            mat_fn(np.eye(2), "power")

    def test_log_rejects_non_spd(self):
        with pytest.raises(NotPositiveDefinite):
            logm(-np.eye(2))


class TestRelativeSpectrum:
    @given(spd_pairs(max_log_cond=6.0))
    def test_matches_generalized_eigh(self, pair):
        a, b = pair
        ref = np.log(sla.eigh(a, b, eigvals_only=True))[::-1]
        np.testing.assert_allclose(log_relative_spectrum(a, b), ref, atol=1e-8)

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatch):
            log_relative_spectrum(np.eye(2), np.eye(3))


class TestKronAndOrder:
    def test_kron_known(self):
        np.testing.assert_array_equal(kron([[1.0, 2.0]], [[1.0], [3.0]]), [[1, 2], [3, 6]])

    def test_kron_cap(self):
        with pytest.raises(DimensionOverflow):
            kron(np.eye(10), np.eye(10), cap=99)

    def test_loewner(self):
        assert loewner_leq(np.eye(2), 2 * np.eye(2))
        assert not loewner_leq(2 * np.eye(2), np.eye(2))
        assert loewner_leq(np.eye(2), np.eye(2))
        with pytest.raises(DimensionMismatch):
            loewner_leq(np.eye(2), np.eye(3))

    @given(st.integers(0, 2**32 - 1), st.integers(1, 4))
    def test_kron_order_preservation(self, seed, n):
        rng = np.random.default_rng(seed)
        G = rng.standard_normal((n, n))
        H = rng.standard_normal((n, n))
        B = G @ G.T
        D = H @ H.T
        A = B + np.outer(G[:, 0], G[:, 0])
        C = D + H @ H.T
        M = np.kron(A, C) - np.kron(B, D)
        assert np.linalg.eigvalsh(M)[0] >= -1e-10 * np.abs(M).max()


class TestRandomSpd:
    def test_deterministic(self):
        assert random_spd(4, 7) == random_spd(4, 7)
        assert not random_spd(4, 7) == random_spd(4, 8)

    @pytest.mark.parametrize("cond", [1.0, 10.0, 1e4])
    def test_condition_number(self, cond):
        A = random_spd(6, 3, cond)
        assert np.linalg.cond(A.data) == pytest.approx(cond, rel=1e-8)

    def test_invalid(self):
        with pytest.raises(InvalidParameter):
            random_spd(0, 1)
        with pytest.raises(InvalidParameter):
            random_spd(3, 1, 0.5)

    def test_generator_seed(self):
        rng = np.random.default_rng(1)
        a = random_spd(3, rng)
        b = random_spd(3, rng)
        assert not a == b
