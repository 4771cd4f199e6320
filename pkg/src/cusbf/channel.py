"""Instantaneous channels and analytic spatial covariances.

Row-vector convention: user ``k``'s channel ``h_k`` is a length-``M`` row and
its covariance is ``R_k = E{h_k^H h_k}``. Element ``m`` (0-based) carries the
steering phase ``alpha * m * sin(phi)`` with ``alpha = -2 pi d / lambda``,
i.e. the first element is the phase reference.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np
import scipy.linalg

from .errors import ContractError, DomainError
from .geometry import UserLink


def steering_phase(d_over_lambda: float) -> float:
    """``alpha = -2 pi d / lambda``."""
    return -2.0 * np.pi * d_over_lambda


def steering_matrix(phi, M: int, d_over_lambda: float) -> np.ndarray:
    """``(len(phi), M)`` array of ULA responses ``exp(j alpha m sin phi)``."""
    phi = np.atleast_1d(np.asarray(phi, dtype=float))
    m = np.arange(M)
    return np.exp(1j * steering_phase(d_over_lambda) * np.outer(np.sin(phi), m))


def draw_small_scale(link: UserLink, rng: np.random.Generator) -> UserLink:
    """Return a copy of ``link`` with fresh Rayleigh coefficients.

    Each ``a_sf`` is circularly-symmetric complex Gaussian with unit
    variance, so ``E|a_ga * a_sf|^2 = a_ga^2``.
    """
    n = link.n_paths
    a_sf = (rng.standard_normal(n) + 1j * rng.standard_normal(n)) / np.sqrt(2.0)
    return UserLink(link.user_index, link.position, link.dod_phi,
                    link.doa_theta, link.delay_tau, link.a_ga, a_sf,
                    link.fallback)


def channel_row(link: UserLink, M: int, d_over_lambda: float) -> np.ndarray:
    if link.a_sf is None:
        raise DomainError(f"user {link.user_index}: small-scale fading not drawn")
    if link.n_paths == 0:
        return np.zeros(M, dtype=complex)
    a = link.a_ga * link.a_sf
    return a @ steering_matrix(link.dod_phi, M, d_over_lambda)


def assemble_channel(links: Sequence[UserLink], config) -> np.ndarray:
    """Stack every user's superposition of paths into the ``K x M`` matrix H."""
    return np.vstack([channel_row(link, config.M, config.d_over_lambda)
                      for link in links])


def correlation_from_paths(link: UserLink, M: int, d_over_lambda: float) -> np.ndarray:
    """First row ``[R]_{0,n} = sum_i a_ga^2 exp(j alpha n sin phi_i)``."""
    if link.n_paths == 0:
        return np.zeros(M, dtype=complex)
    return (link.a_ga**2) @ steering_matrix(link.dod_phi, M, d_over_lambda)


def covariance(link: UserLink, config) -> np.ndarray:
    """Analytic covariance ``[R]_{m,n} = sum_i a_ga^2 exp(j alpha (n-m) sin phi_i)``.

    Built from its first row, so the result is exactly Toeplitz and
    Hermitian. Small-scale coefficients are not read.
    """
    first_row = correlation_from_paths(link, config.M, config.d_over_lambda)
    first_row[0] = first_row[0].real
    return scipy.linalg.toeplitz(first_row.conj(), first_row)


def is_toeplitz(R: np.ndarray, rtol: float = 1e-9) -> bool:
    R = np.asarray(R)
    if R.ndim != 2 or R.shape[0] != R.shape[1]:
        return False
    M = R.shape[0]
    scale = max(float(np.max(np.abs(R), initial=0.0)), np.finfo(float).tiny)
    for offset in range(-(M - 1), M):
        diag = np.diagonal(R, offset)
        if np.max(np.abs(diag - diag[0])) > rtol * scale:
            return False
    return True


def correlation_sequence(R: np.ndarray, rtol: float = 1e-9) -> np.ndarray:
    """Antenna correlation ``r(m) = [R]_{0,m}`` for ``m = 0..M-1``.

    With this indexing the DTFT ``sum_m r(m) exp(-j 2 pi f m)`` of a path at
    angle ``phi`` peaks at ``f = -(d/lambda) sin(phi)``, matching the bin
    grid used by :mod:`cusbf.spectrum`.
    """
    R = np.asarray(R)
    if not is_toeplitz(R, rtol):
        raise ContractError("correlation_sequence requires a Toeplitz matrix")
    r = R[0].astype(complex)
    r[0] = r[0].real
    return r
