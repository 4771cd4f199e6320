import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from cusbf.errors import DomainError, RankDeficientError
from cusbf.precoding import (approximate_eigenchannel, dominant_eigenvector,
                             eigen_beamformer, mmse_estimate, mmse_weights,
                             zf_precoder)


def crandn(rng, *shape):
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


class TestApproximateEigenchannel:
    def test_center_bin(self):
        assert np.allclose(approximate_eigenchannel([[0, 4]], 2), [[2, 2]])

    def test_edge_bin_alternates(self):
        assert np.allclose(approximate_eigenchannel([[4, 0]], 2), [[2, -2]])

    def test_zero_row(self):
        assert np.array_equal(approximate_eigenchannel(np.zeros((1, 8)), 8), np.zeros((1, 8)))

    def test_negative_rejected(self):
        with pytest.raises(DomainError):
            approximate_eigenchannel([[1.0, -1.0]], 2)

    def test_wrong_width(self):
        with pytest.raises(ValueError):
            approximate_eigenchannel([[1.0, 1.0, 1.0]], 2)

    @given(arrays(float, st.tuples(st.integers(1, 5), st.integers(1, 64)),
                  elements=st.floats(0, 100)))
    def test_row_energy(self, U):
        # bin-center tones are orthogonal over M samples: |g_k|^2 = M sum_b u_kb
        G = approximate_eigenchannel(U, U.shape[1])
        M = U.shape[1]
        assert np.allclose(np.linalg.norm(G, axis=1) ** 2, M * U.sum(axis=1),
                           rtol=1e-9, atol=1e-9)


class TestZf:
    def test_identity(self):
        P = zf_precoder(np.eye(2))
        assert np.allclose(P.W, np.eye(2))

    def test_two_by_two(self):
        A = np.array([[1, 1], [0, 1]], float)
        P = zf_precoder(A)
        assert np.allclose(P.raw, [[1, -1], [0, 1]])
        assert np.allclose(P.W, np.array([[1, -1], [0, 1]]) / [1, np.sqrt(2)])

    def test_rank_deficient(self):
        with pytest.raises(RankDeficientError) as exc:
            zf_precoder(np.array([[1, 0], [1, 1e-13]]))
        assert exc.value.rows == (1,) or list(exc.value.rows) == [1]

    def test_too_many_users(self):
        with pytest.raises(RankDeficientError):
            zf_precoder(np.ones((3, 2)))

    @settings(max_examples=50)
    @given(st.integers(0, 10_000), st.integers(1, 6), st.integers(0, 10))
    def test_nulling_and_unit_columns(self, seed, K_s, extra):
        rng = np.random.default_rng(seed)
        A = crandn(rng, K_s, K_s + extra)
        P = zf_precoder(A, power=2.0)
        off = A @ P.raw - np.diag(np.diag(A @ P.raw))
        assert np.abs(off).max() <= 1e-9 * np.linalg.norm(A)
        assert np.allclose(np.diag(A @ P.raw), 1.0)
        assert np.allclose(np.linalg.norm(P.W, axis=0), 1.0, atol=1e-12)
        assert P.power == 2.0 and P.n_streams == K_s


class TestEigenBeamformer:
    def test_rank_one(self):
        v = np.array([1, 1j, -1]) / np.sqrt(3)
        w = dominant_eigenvector(5 * np.outer(v, v.conj()))
        assert abs(abs(np.vdot(w, v)) - 1) < 1e-12

    def test_identity_gives_first_axis(self):
        assert np.allclose(dominant_eigenvector(np.eye(4)), [1, 0, 0, 0])

    def test_phase_convention(self, rng):
        A = crandn(rng, 6, 6)
        w = dominant_eigenvector(A @ A.conj().T)
        k = np.argmax(np.abs(w))
        assert abs(w[k].imag) < 1e-12 and w[k].real > 0

    def test_zero_covariance(self):
        with pytest.raises(DomainError):
            dominant_eigenvector(np.zeros((3, 3)))

    def test_power_iteration_oracle(self, rng):
        A = crandn(rng, 8, 8)
        R = A @ A.conj().T + 20 * np.outer(np.ones(8), np.ones(8))
        x = np.ones(8, complex)
        for _ in range(500):
            x = R @ x
            x /= np.linalg.norm(x)
        assert abs(abs(np.vdot(x, dominant_eigenvector(R))) - 1) < 1e-9

    def test_columns(self, rng):
        Rs = [np.diag([1.0, 2.0, 0.5]), np.diag([3.0, 1.0, 0.0])]
        P = eigen_beamformer(Rs, 0.1)
        assert np.allclose(np.abs(P.W), [[0, 1], [1, 0], [0, 0]])
        with pytest.raises(ValueError):
            eigen_beamformer([])


class TestMmse:
    def test_weights_shape(self):
        assert mmse_weights([np.eye(3), 2 * np.eye(3)], 1.0).shape == (2, 3, 3)

    def test_noiseless_limit(self, rng):
        A = crandn(rng, 4, 4)
        R = A @ A.conj().T
        H = crandn(rng, 1, 4)
        est = mmse_estimate(H, [R], 1e-14, 1.0, rng)
        assert np.allclose(est, H, atol=1e-5)

    def test_zero_covariance_gives_zero(self, rng):
        est = mmse_estimate(crandn(rng, 2, 3), np.zeros((2, 3, 3)), 1.0, 1.0, rng)
        assert np.array_equal(est, np.zeros((2, 3)))

    def test_identity_halves_observation(self):
        Q = mmse_weights([np.eye(4)], 1.0)
        assert np.allclose(Q[0], 0.5 * np.eye(4))

    def test_mse_and_orthogonality(self):
        # R = I, sigma^2 = 1: error variance 1/2 per entry and error orthogonal to estimate
        rng = np.random.default_rng(7)
        M, n = 4, 10_000
        H = crandn(rng, n, M) / np.sqrt(2)
        est = mmse_estimate(H, np.broadcast_to(np.eye(M), (n, M, M)), 1.0, 1.0, rng)
        err = est - H
        assert np.mean(np.sum(np.abs(err) ** 2, axis=1)) == pytest.approx(M / 2, rel=0.05)
        corr = err.conj().T @ est / n
        assert np.abs(corr).max() < 0.05

    def test_pilot_power_scales_noise(self):
        a = np.random.default_rng(1)
        b = np.random.default_rng(1)
        R = [np.eye(2)]
        H = np.ones((1, 2), complex)
        assert np.allclose(mmse_estimate(H, R, 2.0, 2.0, a), mmse_estimate(H, R, 1.0, 1.0, b))
