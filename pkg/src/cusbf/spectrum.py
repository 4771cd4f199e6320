"""Binned angular power spectrum of each user's covariance.

The normalized spatial frequency of a path is ``f = -(d/lambda) sin(phi)``.
The interval of length one around zero is cut into ``M`` bins of width
``1/M``; bin ``b`` is centered at ``b/M - 1/2`` and is half-open,
``(center - 1/(2M), center + 1/(2M)]``. Frequencies outside the principal
interval wrap modulo 1, as the DTFT is 1-periodic.

Row ``k`` of the spectrum matrix ``U`` holds, per bin, the total geometric
power of user ``k``'s paths falling in that bin.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np
from scipy import stats

from .channel import covariance
from .geometry import UserLink


def bin_centers(M: int) -> np.ndarray:
    return np.arange(M) / M - 0.5


def spatial_frequency(phi, d_over_lambda: float):
    return -d_over_lambda * np.sin(np.asarray(phi, dtype=float))


def bin_index(phi, d_over_lambda: float, M: int):
    """Index of the angular bin occupied by departure angle(s) ``phi``.

    Scalars in, int out; arrays in, int array out.
    """
    if M < 1:
        raise ValueError("M must be >= 1")
    f = spatial_frequency(phi, d_over_lambda)
    lower = -0.5 - 0.5 / M
    wrapped = lower + np.mod(f - lower, 1.0)
    # the principal interval is open at its lower end
    wrapped = np.where(wrapped <= lower, wrapped + 1.0, wrapped)
    b = np.ceil((wrapped + 0.5) * M + 0.5) - 1
    b = np.clip(b, 0, M - 1).astype(int)
    return int(b) if b.ndim == 0 else b


def spectrum_row(link: UserLink, config) -> np.ndarray:
    """Per-bin sum of ``a_ga**2`` over the user's paths (length ``M``)."""
    M = config.M
    row = np.zeros(M)
    if link.n_paths:
        bins = bin_index(link.dod_phi, config.d_over_lambda, M)
        np.add.at(row, bins, link.a_ga**2)
    return row


def build_U(links: Sequence[UserLink], config) -> np.ndarray:
    """Stack the spectrum rows of ``links`` into the ``K x M`` matrix U."""
    if len(links) == 0:
        raise ValueError("build_U needs at least one user")
    return np.vstack([spectrum_row(link, config) for link in links])


def occupied_bins(u, rtol: float = 0.0) -> int:
    u = np.asarray(u)
    return int(np.count_nonzero(u > rtol * np.max(u, initial=0.0)))


def _ks_distance(a: np.ndarray, b: np.ndarray, rtol: float = 1e-9) -> float:
    a = np.sort(np.asarray(a, dtype=float))
    b = np.sort(np.asarray(b, dtype=float))
    # values equal up to rounding count as the same atom
    scale = max(np.max(np.abs(a), initial=0.0), np.max(np.abs(b), initial=0.0))
    if b.size:
        nearest = b[np.clip(np.searchsorted(b, a), 0, b.size - 1)]
        below = b[np.clip(np.searchsorted(b, a) - 1, 0, b.size - 1)]
        nearest = np.where(np.abs(below - a) < np.abs(nearest - a), below, nearest)
        a = np.where(np.abs(nearest - a) <= rtol * scale, nearest, a)
    if np.array_equal(np.sort(a), b):
        return 0.0
    return float(stats.ks_2samp(a, b).statistic)


def scaled_eigenvalues(R: np.ndarray, zero_rtol: float = 1e-9) -> np.ndarray:
    """Eigenvalues of Hermitian ``R`` divided by its dimension.

    Values below ``zero_rtol`` times the largest magnitude are rounding
    residue of the null space and are set to exactly zero.
    """
    M = R.shape[0]
    lam = np.linalg.eigvalsh(R) / M
    peak = np.max(np.abs(lam), initial=0.0)
    lam[np.abs(lam) <= zero_rtol * peak] = 0.0
    return np.clip(lam, 0.0, None)


def asymptotic_spectrum_check(link: UserLink, config, M_list) -> list[float]:
    """Kolmogorov-Smirnov distance between two eigenvalue distributions.

    For each array size ``M`` in ``M_list`` the empirical CDF of the
    eigenvalues of ``R`` (scaled by ``1/M``) is compared with the CDF of the
    ``M`` binned spectrum values. As ``M`` grows the two should approach
    each other.
    """
    M_list = list(M_list)
    if any(b <= a for a, b in zip(M_list, M_list[1:])):
        raise ValueError("M_list must be strictly increasing")
    out = []
    for M in M_list:
        cfg = config.replace(M=M, K_s=min(config.K_s, M))
        lam = scaled_eigenvalues(covariance(link, cfg))
        u = spectrum_row(link, cfg)
        out.append(_ks_distance(lam, u))
    return out
