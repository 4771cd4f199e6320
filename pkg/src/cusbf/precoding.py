"""Beamformers and the channel estimate used by the CSI-based baseline."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DomainError, RankDeficientError
from .spectrum import bin_centers

MAX_CONDITION = 1e12


@dataclass(frozen=True)
class Precoder:
    """Unit-norm beamforming columns plus the common per-user power.

    ``raw`` keeps the zero-forcing matrix before column normalization when
    the precoder came from :func:`zf_precoder`.
    """

    W: np.ndarray
    power: float = 1.0
    raw: np.ndarray | None = None

    @property
    def n_streams(self) -> int:
        return self.W.shape[1]


def approximate_eigenchannel(rows, M: int) -> np.ndarray:
    """Approximate eigenchannel matrix G from binned spectra.

    ``g_km = sum_b sqrt(u_k[b]) exp(j 2 pi m (b/M - 1/2))`` for
    ``m = 0..M-1``: each occupied bin contributes one path at its center
    frequency with the bin's amplitude.
    """
    U = np.atleast_2d(np.asarray(rows, dtype=float))
    if U.shape[1] != M:
        raise ValueError(f"spectrum rows have {U.shape[1]} bins, expected {M}")
    if np.any(U < 0):
        raise DomainError("spectrum entries must be non-negative")
    basis = np.exp(2j * np.pi * np.outer(bin_centers(M), np.arange(M)))
    return np.sqrt(U) @ basis


def _dependent_rows(A: np.ndarray, rtol: float = 1e-6) -> list[int]:
    """Rows that are nearly in the span of the rows above them."""
    basis = np.zeros((0, A.shape[1]), dtype=complex)
    ratios = []
    for row in A:
        norm = np.linalg.norm(row)
        resid = row - (row @ basis.conj().T) @ basis
        resid = resid - (resid @ basis.conj().T) @ basis
        r = np.linalg.norm(resid)
        ratios.append(r / norm if norm > 0 else 0.0)
        if r > 0:
            basis = np.vstack([basis, resid / r])
    ratios = np.asarray(ratios)
    bad = [int(i) for i in np.flatnonzero(ratios < rtol)]
    if not bad and len(ratios) > 1:
        bad = [int(np.argmin(ratios[1:]) + 1)]
    return bad


def zf_precoder(A, power: float = 1.0) -> Precoder:
    """Zero-forcing beamformer ``A^H (A A^H)^-1`` with unit-norm columns.

    Raises
    ------
    RankDeficientError
        When the condition number of ``A`` exceeds 1e12. The error's
        ``rows`` attribute names the rows to drop.
    """
    A = np.atleast_2d(np.asarray(A, dtype=complex))
    K_s, M = A.shape
    if K_s > M:
        raise RankDeficientError(f"{K_s} users cannot be separated by {M} antennas",
                                 rows=range(M, K_s))
    sv = np.linalg.svd(A, compute_uv=False)
    if sv[-1] == 0 or sv[0] / sv[-1] > MAX_CONDITION:
        rows = _dependent_rows(A)
        raise RankDeficientError(f"zero-forcing matrix is rank deficient (rows {rows})",
                                 rows=rows)
    # pinv goes through the SVD, avoiding the squared condition of A A^H
    raw = np.linalg.pinv(A)
    W = raw / np.linalg.norm(raw, axis=0, keepdims=True)
    return Precoder(W, power, raw)


def dominant_eigenvector(R: np.ndarray, rtol: float = 1e-12) -> np.ndarray:
    """Unit-norm principal eigenvector of Hermitian ``R``.

    Among (numerically) tied top eigenvalues the first one returned by the
    solver wins, so ``R = I`` yields the first canonical basis vector. The
    phase is fixed by making the largest-magnitude entry real positive.
    """
    lam, vecs = np.linalg.eigh(R)
    top = lam[-1]
    if not top > 0:
        raise DomainError("covariance has no positive eigenvalue")
    k = int(np.flatnonzero(lam >= top - rtol * abs(top))[0])
    v = vecs[:, k]
    anchor = v[np.argmax(np.abs(v) > (1 - 1e-9) * np.abs(v).max())]
    v = v * (abs(anchor) / anchor)
    return v / np.linalg.norm(v)


def eigen_beamformer(R_list: Sequence[np.ndarray], power: float = 1.0) -> Precoder:
    """One column per user: the dominant eigenvector of its covariance."""
    if len(R_list) == 0:
        raise ValueError("eigen_beamformer needs at least one covariance")
    W = np.column_stack([dominant_eigenvector(np.asarray(R)) for R in R_list])
    return Precoder(W, power)


def mmse_weights(R_list, sigma2: float) -> np.ndarray:
    """Per-user estimator matrices ``(R + sigma2 I)^-1 R``, shape ``(K, M, M)``."""
    R = np.asarray(R_list, dtype=complex)
    M = R.shape[-1]
    return np.linalg.solve(R + sigma2 * np.eye(M), R)


def mmse_estimate(H_true, R_list, noise_power: float, pilot_power: float,
                  rng: np.random.Generator) -> np.ndarray:
    """Linear MMSE channel estimate from one orthogonal pilot per user.

    The observation is ``y_k = h_k + n_k`` with per-antenna noise variance
    ``noise_power / pilot_power``; the estimate is ``y_k R_k (R_k +
    sigma^2 I)^-1`` (row-vector convention).
    """
    H = np.atleast_2d(np.asarray(H_true, dtype=complex))
    K, M = H.shape
    sigma2 = noise_power / pilot_power
    noise = (rng.standard_normal((K, M)) + 1j * rng.standard_normal((K, M)))
    Y = H + np.sqrt(sigma2 / 2.0) * noise
    Q = mmse_weights(R_list, sigma2)
    return np.einsum("km,kmn->kn", Y, Q)
