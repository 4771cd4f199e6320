"""User selection from binned spectra (CUSBF, JSDM-style) or channel estimates (GWC).

CUSBF picks, greedily, the user with the largest spectrum norm among the
remaining candidates, then discards every candidate whose normalized
spectral overlap with the pick is ``>= epsilon``. Because the candidate set
shrinks cumulatively, every selected pair ends up epsilon-orthogonal.
Passing ``prune="latest"`` instead re-draws candidates from all unselected
users and tests them only against the newest pick.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, SchedulingError


class Scheme(str, enum.Enum):
    CUSBF = "CUSBF"
    GWC = "GWC"
    JSDM = "JSDM"

    def __str__(self):
        return self.value


@dataclass(frozen=True)
class ScheduleResult:
    selected: tuple[int, ...]
    epsilon_used: float
    scheme: Scheme

    def __post_init__(self):
        if len(set(self.selected)) != len(self.selected):
            raise ValueError("duplicate user in schedule")
        if not self.selected:
            raise ValueError("empty schedule")


def f1(u) -> float:
    """Spectrum norm, the selection weight of a user."""
    return float(np.linalg.norm(np.asarray(u, dtype=float)))


def f2(u_k, u_j) -> float:
    """Normalized spectral overlap ``|u_k . u_j| / (|u_k| |u_j|)``, in [0, 1]."""
    u_k = np.asarray(u_k, dtype=float)
    u_j = np.asarray(u_j, dtype=float)
    nk, nj = np.linalg.norm(u_k), np.linalg.norm(u_j)
    if nk == 0 or nj == 0:
        raise DomainError("f2 is undefined for a zero-power spectrum")
    return float(min(abs(u_k @ u_j) / (nk * nj), 1.0))


def _best(candidates: np.ndarray, weights) -> int:
    """Lexicographic argmax over ``weights`` (primary first) in O(len(candidates)).

    ``candidates`` is ascending, so the first survivor is the lowest index.
    """
    for w in weights:
        vals = w[candidates]
        candidates = candidates[vals == vals.max()]
    return int(candidates[0])


def _greedy_spectral(U, K_s, epsilon, weights, prune, scheme):
    U = np.asarray(U, dtype=float)
    if U.ndim != 2:
        raise ValueError("U must be a K x M matrix")
    if K_s < 1:
        raise ValueError("K_s must be >= 1")
    if prune not in ("all", "latest"):
        raise ValueError(f"unknown prune mode {prune!r}")
    norms = np.linalg.norm(U, axis=1)
    active = np.flatnonzero(norms > 0)
    if active.size == 0:
        raise SchedulingError("all users have zero spectral power")
    selected: list[int] = []
    candidates = active
    while candidates.size and len(selected) < K_s:
        pick = _best(candidates, weights)
        selected.append(pick)
        if prune == "latest":
            pool = np.setdiff1d(active, selected)
        else:
            pool = candidates[candidates != pick]
        # one contiguous matvec over all rows beats gathering the pool first
        dots = U @ U[pick]
        overlap = np.abs(dots[pool]) / (norms[pool] * norms[pick])
        candidates = pool[overlap < epsilon]
    return ScheduleResult(tuple(selected), float(epsilon), scheme)


def cusbf_schedule(U, K_s: int, epsilon: float, prune: str = "all") -> ScheduleResult:
    """Greedy correlation-based selection on the spectrum matrix ``U``."""
    norms = np.linalg.norm(np.asarray(U, dtype=float), axis=1)
    return _greedy_spectral(U, K_s, epsilon, (norms,), prune, Scheme.CUSBF)


def jsdm_schedule(U, K_s: int, epsilon: float, prune: str = "all") -> ScheduleResult:
    """Like :func:`cusbf_schedule` but ranks users by occupied-bin count.

    Ties in the count go to the larger spectrum norm, then the lower index.
    """
    U = np.asarray(U, dtype=float)
    counts = np.count_nonzero(U > 0, axis=1).astype(float)
    norms = np.linalg.norm(U, axis=1)
    return _greedy_spectral(U, K_s, epsilon, (counts, norms), prune, Scheme.JSDM)


def gwc_schedule(H_est, K_s: int, gamma: float = 0.3) -> ScheduleResult:
    """Semi-orthogonal greedy selection on estimated channels.

    Each round picks the candidate whose channel has the largest component
    orthogonal to the span of the already selected channels, then keeps only
    candidates whose normalized correlation with that orthogonal direction
    is below ``gamma``.
    """
    H = np.asarray(H_est, dtype=complex)
    norms = np.linalg.norm(H, axis=1)
    candidates = np.flatnonzero(norms > 0)
    if candidates.size == 0:
        raise SchedulingError("all estimated channels are zero")
    tiny = 1e-12 * norms.max()

    selected: list[int] = []
    basis = np.zeros((0, H.shape[1]), dtype=complex)
    while candidates.size and len(selected) < K_s:
        rows = H[candidates]
        orth = rows - (rows @ basis.conj().T) @ basis
        orth_norms = np.linalg.norm(orth, axis=1)
        best = int(np.argmax(orth_norms))
        if orth_norms[best] <= tiny:
            break
        pick = int(candidates[best])
        direction = orth[best] / orth_norms[best]
        selected.append(pick)
        basis = np.vstack([basis, direction])

        rest = candidates[candidates != pick]
        corr = np.abs(H[rest] @ direction.conj()) / norms[rest]
        candidates = rest[corr < gamma]
    return ScheduleResult(tuple(selected), float(gamma), Scheme.GWC)
