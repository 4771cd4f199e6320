"""Rates of one drop and Monte Carlo averages over many drops."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .channel import assemble_channel, covariance, draw_small_scale
from .config import ScenarioConfig
from .errors import RankDeficientError
from .geometry import UserLink, generate_drop, noise_power
from .precoding import (Precoder, approximate_eigenchannel, eigen_beamformer,
                        mmse_estimate, zf_precoder)
from .scheduling import (ScheduleResult, Scheme, cusbf_schedule, gwc_schedule,
                         jsdm_schedule)
from .spectrum import build_U


def sinr(H_selected, W, p: float, P_n: float) -> np.ndarray:
    """Per-user SINR ``p|h_k w_k|^2 / (sum_{j != k} p|h_k w_j|^2 + P_n)``.

    ``H_selected`` must be the true channel of the scheduled users, in the
    same order as the columns of ``W``.
    """
    if isinstance(W, Precoder):
        W = W.W
    H = np.atleast_2d(np.asarray(H_selected, dtype=complex))
    W = np.asarray(W, dtype=complex).reshape(H.shape[1], -1)
    if W.shape[1] != H.shape[0]:
        raise ValueError(f"{H.shape[0]} users but {W.shape[1]} beams")
    gains = p * np.abs(H @ W) ** 2
    signal = np.diag(gains).copy()
    interference = gains.sum(axis=1) - signal
    return signal / (interference + P_n)


def sum_rate(sinrs) -> float:
    """Shannon sum rate in bit/s/Hz."""
    sinrs = np.asarray(sinrs, dtype=float)
    if np.any(sinrs < 0):
        raise ValueError("SINR must be non-negative")
    return float(np.sum(np.log2(1.0 + sinrs)))


@dataclass(frozen=True)
class RateReport:
    scheme: Scheme
    selected: tuple[int, ...]
    per_user_sinr: np.ndarray
    per_user_rate: np.ndarray
    sum_rate: float
    config_echo: dict = field(default_factory=dict)

    @property
    def n_selected(self) -> int:
        return len(self.selected)


def _echo(config: ScenarioConfig) -> dict:
    return {"M": config.M, "K": config.K, "K_s": config.K_s,
            "epsilon": config.epsilon, "p_dBm": config.p_dBm}


def zf_with_retry(A: np.ndarray, selected: Sequence[int], power: float):
    """ZF on ``A``; on rank deficiency drop the latest offending user and retry."""
    selected = list(selected)
    rows = list(range(len(selected)))
    while True:
        try:
            return zf_precoder(A[rows], power), [selected[r] for r in rows]
        except RankDeficientError as err:
            if len(rows) == 1:
                raise
            victim = max(err.rows) if err.rows else len(rows) - 1
            del rows[victim]


def plan_statistical(links: Sequence[UserLink], config: ScenarioConfig,
                     scheme: Scheme):
    """Schedule and precode from second-order statistics only.

    ``links`` are the drop's geometric paths; fading coefficients are never
    drawn on them, so any accidental use of an instantaneous channel here
    fails loudly.
    """
    scheme = Scheme(scheme)
    U = build_U(links, config)
    p = config.p_watts
    if scheme is Scheme.CUSBF:
        sched = cusbf_schedule(U, config.K_s, config.epsilon, config.prune_mode)
        G = approximate_eigenchannel(U[list(sched.selected)], config.M)
        precoder, selected = zf_with_retry(G, sched.selected, p)
    elif scheme is Scheme.JSDM:
        sched = jsdm_schedule(U, config.K_s, config.epsilon, config.prune_mode)
        selected = list(sched.selected)
        precoder = eigen_beamformer([covariance(links[k], config) for k in selected], p)
    else:
        raise ValueError(f"{scheme} needs channel estimates")
    return ScheduleResult(tuple(selected), sched.epsilon_used, scheme), precoder


def plan_gwc(H_est: np.ndarray, config: ScenarioConfig):
    sched = gwc_schedule(H_est, config.K_s, config.gwc_gamma)
    precoder, selected = zf_with_retry(H_est[list(sched.selected)], sched.selected,
                                       config.p_watts)
    return ScheduleResult(tuple(selected), sched.epsilon_used, Scheme.GWC), precoder


def run_drop(config: ScenarioConfig, scheme, rng: np.random.Generator) -> RateReport:
    """One pass: geometry, fading, scheduling, precoding, SINR on the true channel.

    Random draws happen in a fixed order (geometry, fading, pilot noise), so
    every scheme sees the same users and the same channel realization for a
    given generator state.
    """
    scheme = Scheme(scheme)
    drop = generate_drop(config, rng)
    faded = [draw_small_scale(link, rng) for link in drop.links]
    H = assemble_channel(faded, config)
    P_n = noise_power(config)

    if scheme is Scheme.GWC:
        R_all = [covariance(link, config) for link in drop.links]
        H_est = mmse_estimate(H, R_all, P_n, config.pilot_watts, rng)
        sched, precoder = plan_gwc(H_est, config)
    else:
        sched, precoder = plan_statistical(drop.links, config, scheme)

    gamma = sinr(H[list(sched.selected)], precoder, config.p_watts, P_n)
    rates = np.log2(1.0 + gamma)
    return RateReport(scheme, sched.selected, gamma, rates, float(rates.sum()),
                      _echo(config))


def drop_generators(seed: int, drops: int) -> list[np.random.Generator]:
    """Independent per-drop generators; drop ``i`` depends only on (seed, i)."""
    return [np.random.default_rng(s) for s in np.random.SeedSequence(seed).spawn(drops)]


@dataclass(frozen=True)
class MonteCarloResult:
    scheme: Scheme
    reports: tuple[RateReport, ...]

    @property
    def sum_rates(self) -> np.ndarray:
        return np.array([r.sum_rate for r in self.reports])

    @property
    def sum_rate_mean(self) -> float:
        return float(self.sum_rates.mean())

    @property
    def sum_rate_stderr(self) -> float:
        n = len(self.reports)
        if n < 2:
            return math.nan
        return float(self.sum_rates.std(ddof=1) / math.sqrt(n))

    @property
    def per_user_rate_mean(self) -> float:
        return float(np.mean([r.per_user_rate.mean() for r in self.reports]))

    @property
    def n_selected_mean(self) -> float:
        return float(np.mean([r.n_selected for r in self.reports]))


def monte_carlo(config: ScenarioConfig, scheme) -> MonteCarloResult:
    """Average ``config.drops`` independent drops seeded from ``config.seed``."""
    scheme = Scheme(scheme)
    reports = tuple(run_drop(config, scheme, rng)
                    for rng in drop_generators(config.seed, config.drops))
    return MonteCarloResult(scheme, reports)
