import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from cusbf.config import ScenarioConfig
from cusbf.geometry import UserLink, generate_drop
from cusbf.scheduling import f2
from cusbf.spectrum import (asymptotic_spectrum_check, bin_centers, bin_index,
                            build_U, scaled_eigenvalues, spectrum_row)
from cusbf.channel import covariance


def cfg(M, d=0.5):
    return ScenarioConfig(M=M, K=max(M, 2), K_s=1, d_over_lambda=d)


def brute_bin(phi, d, M):
    """Search the half-open bins directly, trying the frequency and its 1-periodic images."""
    f = -d * math.sin(phi)
    for shift in range(-3, 4):
        g = f + shift
        for b in range(M):
            c = b / M - 0.5
            if c - 0.5 / M < g <= c + 0.5 / M:
                return b
    raise AssertionError("no bin")


class TestBinIndex:
    @pytest.mark.parametrize("phi,expected", [(0.0, 2), (math.pi / 2, 0), (-math.pi / 2, 0)])
    def test_reference_angles(self, phi, expected):
        assert bin_index(phi, 0.5, 4) == expected

    @settings(max_examples=300)
    @given(st.floats(-math.pi, math.pi), st.integers(1, 300), st.sampled_from([0.25, 0.5, 0.8, 1.3]))
    def test_matches_brute_force(self, phi, M, d):
        f = -d * math.sin(phi)
        # skip points within rounding distance of a bin edge
        edge = (f + 0.5) * M + 0.5
        if abs(edge - round(edge)) < 1e-9:
            return
        assert bin_index(phi, d, M) == brute_bin(phi, d, M)

    def test_vectorised(self):
        phi = np.array([0.0, math.pi / 2, -math.pi / 2])
        assert list(bin_index(phi, 0.5, 4)) == [2, 0, 0]

    @pytest.mark.parametrize("M", [1, 4, 16, 64, 255])
    def test_covers_every_bin_at_half_wavelength(self, M):
        phi = np.linspace(-math.pi / 2, math.pi / 2, 200 * M + 1)[1:]
        assert set(bin_index(phi, 0.5, M)) == set(range(M))

    def test_centers(self):
        assert np.allclose(bin_centers(4), [-0.5, -0.25, 0.0, 0.25])


class TestSpectrumRow:
    def test_single_path(self):
        row = spectrum_row(UserLink.from_paths([0.0], 2.0), cfg(4))
        assert np.array_equal(row, [0, 0, 4, 0])

    def test_same_bin_adds(self):
        row = spectrum_row(UserLink.from_paths([0.0, 0.01], [2.0, 1.0]), cfg(4))
        assert row[2] == pytest.approx(5.0)

    def test_empty(self):
        assert np.array_equal(spectrum_row(UserLink.from_paths([], []), cfg(4)), np.zeros(4))

    @given(arrays(float, st.integers(0, 20), elements=st.floats(-math.pi, math.pi)),
           st.integers(1, 128), st.floats(0.0, 10.0))
    def test_power_conservation_and_scaling(self, phi, M, c):
        a = np.linspace(0.1, 3.0, phi.size)
        link = UserLink.from_paths(phi, a)
        row = spectrum_row(link, cfg(M))
        assert np.all(row >= 0)
        assert row.sum() == pytest.approx(np.sum(a**2), rel=1e-9)
        scaled = spectrum_row(UserLink.from_paths(phi, c * a), cfg(M))
        assert np.allclose(scaled, c**2 * row, rtol=1e-12, atol=0)


class TestBuildU:
    def test_single_user(self):
        link = UserLink.from_paths([0.2, -0.7], [1.0, 0.5])
        assert np.array_equal(build_U([link], cfg(8))[0], spectrum_row(link, cfg(8)))

    def test_permutation(self, rng):
        config = ScenarioConfig(M=32, K=6, K_s=2)
        links = generate_drop(config, rng).links
        perm = rng.permutation(6)
        U = build_U(links, config)
        assert np.array_equal(build_U([links[i] for i in perm], config), U[perm])

    def test_identical_users_fully_overlap(self):
        link = UserLink.from_paths([0.2, -0.7, 1.0], [1.0, 0.5, 0.3])
        U = build_U([link, link], cfg(16))
        assert np.array_equal(U[0], U[1])
        assert f2(U[0], U[1]) == pytest.approx(1.0)


class TestAsymptoticCheck:
    def test_single_path_is_exact(self):
        link = UserLink.from_paths([0.37], 1.3)
        assert asymptotic_spectrum_check(link, cfg(8), [4, 16, 64]) == [0.0, 0.0, 0.0]

    def test_single_path_rank_one_eigenvalue(self):
        # oracle: rank-1 Toeplitz R = P v v^H has one eigenvalue M * P
        link = UserLink.from_paths([0.37], 1.3)
        lam = np.linalg.eigvalsh(covariance(link, cfg(32)))
        assert lam[-1] == pytest.approx(32 * 1.3**2)
        assert np.allclose(scaled_eigenvalues(covariance(link, cfg(32)))[:-1], 0.0)

    def test_zero_power_user(self):
        link = UserLink.from_paths([0.1, 0.2], [0.0, 0.0])
        assert asymptotic_spectrum_check(link, cfg(8), [16, 64]) == [0.0, 0.0]

    def test_convergence_on_six_path_users(self):
        checked = 0
        for seed in range(40):
            r = np.random.default_rng(seed)
            link = UserLink.from_paths(r.uniform(-math.pi / 2, math.pi / 2, 6),
                                       np.sqrt(r.exponential(size=6)))
            if np.count_nonzero(spectrum_row(link, cfg(16))) < 4:
                continue
            ks16, ks256 = asymptotic_spectrum_check(link, cfg(16), [16, 256])
            assert ks256 < ks16
            checked += 1
        assert checked >= 20

    def test_requires_increasing_sizes(self):
        with pytest.raises(ValueError):
            asymptotic_spectrum_check(UserLink.from_paths([0.1], 1.0), cfg(8), [32, 16])
