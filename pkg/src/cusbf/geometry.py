"""Random drop generation for a clustered single-cell scenario.

The base station sits at the origin with a uniform linear array whose
broadside points along the x axis, so the azimuth ``atan2(y, x)`` of a
scatterer is directly the departure angle seen by the array. Clusters are
placed uniformly in the cell and each one is visible only to users inside
its circular visibility region (VR).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .config import SPEED_OF_LIGHT, ScenarioConfig
from .errors import ConfigError, DomainError

BOLTZMANN = 1.381e-23
MAX_RESAMPLES = 10**6


@dataclass(frozen=True)
class Cluster:
    position: np.ndarray       # (3,) meters
    vr_center: np.ndarray      # (2,) meters
    vr_radius: float
    attenuation_AC: float
    paths: np.ndarray          # (N_p,) azimuth offsets in radians

    def __post_init__(self):
        if not self.vr_radius > 0:
            raise DomainError("vr_radius must be positive")
        if not 0.0 < self.attenuation_AC <= 1.0:
            raise DomainError("attenuation_AC must lie in (0, 1]")


@dataclass(frozen=True)
class MultipathComponent:
    dod_phi: float
    doa_theta: float
    delay_tau: float
    a_ga: float
    a_sf: complex | None = None

    @property
    def amplitude(self) -> complex:
        if self.a_sf is None:
            raise DomainError("small-scale coefficient has not been drawn")
        return self.a_ga * self.a_sf


@dataclass
class UserLink:
    """Multipath description of one user, stored column-wise.

    Arrays share the path axis; ``a_sf`` stays ``None`` until
    :func:`cusbf.channel.draw_small_scale` fills it.
    """

    user_index: int
    position: np.ndarray
    dod_phi: np.ndarray
    doa_theta: np.ndarray
    delay_tau: np.ndarray
    a_ga: np.ndarray
    a_sf: np.ndarray | None = None
    fallback: bool = False

    @property
    def n_paths(self) -> int:
        return int(self.a_ga.size)

    @property
    def mpcs(self) -> list[MultipathComponent]:
        sf = self.a_sf if self.a_sf is not None else [None] * self.n_paths
        return [
            MultipathComponent(float(p), float(t), float(d), float(a),
                               None if s is None else complex(s))
            for p, t, d, a, s in zip(self.dod_phi, self.doa_theta,
                                     self.delay_tau, self.a_ga, sf)
        ]

    @classmethod
    def from_paths(cls, dod_phi, a_ga, user_index=0, position=(0.0, 0.0),
                   a_sf=None):
        """Build a link from departure angles and geometric amplitudes only."""
        dod_phi = np.atleast_1d(np.asarray(dod_phi, dtype=float))
        a_ga = np.broadcast_to(np.asarray(a_ga, dtype=float), dod_phi.shape).copy()
        zeros = np.zeros_like(dod_phi)
        if a_sf is not None:
            a_sf = np.broadcast_to(np.asarray(a_sf, dtype=complex), dod_phi.shape).copy()
        return cls(user_index, np.asarray(position, dtype=float),
                   wrap_angle(dod_phi), zeros.copy(), zeros, a_ga, a_sf)


@dataclass
class Drop:
    """One realization of cluster and user geometry."""

    config: ScenarioConfig
    clusters: list[Cluster]
    user_positions: np.ndarray
    links: list[UserLink] = field(default_factory=list)


def wrap_angle(angle):
    """Wrap radians into (-pi, pi]."""
    return np.pi - np.mod(np.pi - np.asarray(angle, dtype=float), 2 * np.pi)


def place_users(config: ScenarioConfig, rng: np.random.Generator) -> np.ndarray:
    """Draw ``K`` user positions uniformly in the square cell.

    Positions closer than ``R_th_factor * R`` to the base station are
    redrawn.

    Returns
    -------
    np.ndarray
        ``(K, 2)`` positions in meters.
    """
    R = config.R
    r_min = config.R_th_factor * R
    pos = rng.uniform(-R, R, size=(config.K, 2))
    resamples = 0
    while True:
        bad = np.flatnonzero(np.hypot(pos[:, 0], pos[:, 1]) < r_min)
        if bad.size == 0:
            return pos
        resamples += bad.size
        if resamples > MAX_RESAMPLES:
            raise ConfigError("user placement did not terminate; "
                              "exclusion radius too large", "R_th_factor")
        pos[bad] = rng.uniform(-R, R, size=(bad.size, 2))


def path_loss_dB(d_bs_ms, wavelength):
    """NLoS micro-cell path loss ``26 log10 d + 20 log10(4 pi / lambda)``."""
    d = np.asarray(d_bs_ms, dtype=float)
    if np.any(~(d > 0)) or not wavelength > 0:
        raise DomainError("distance and wavelength must be positive")
    return 26.0 * np.log10(d) + 20.0 * np.log10(4 * np.pi / wavelength)


def path_loss_linear(d_bs_ms, wavelength):
    """Power gain ``10**(-L/10)`` of the NLoS micro-cell path loss."""
    return 10.0 ** (-path_loss_dB(d_bs_ms, wavelength) / 10.0)


def vr_gain(dist, vr_radius, transition):
    """Visibility-region gain with a raised-cosine transition.

    Equals 1 up to ``vr_radius - transition``, 0 from ``vr_radius`` on,
    and falls off as a half cosine in between.
    """
    dist = np.asarray(dist, dtype=float)
    inner = vr_radius - transition
    if transition <= 0:
        gain = (dist < vr_radius).astype(float)
    else:
        t = np.clip((dist - inner) / transition, 0.0, 1.0)
        gain = 0.5 * (1.0 + np.cos(np.pi * t))
        gain = np.where(dist >= vr_radius, 0.0, gain)
    return gain if gain.ndim else float(gain)


def generate_clusters(config: ScenarioConfig,
                      rng: np.random.Generator) -> list[Cluster]:
    R = config.R
    spread = np.deg2rad(config.angular_spread_deg)
    clusters = []
    for _ in range(config.N_C):
        xy = rng.uniform(-R, R, size=2)
        z = rng.uniform(0.0, 2 * config.h_BS)
        vr_center = rng.uniform(-R, R, size=2)
        # folded log-normal keeps A_C in (0, 1]
        a_c = 10.0 ** (-abs(rng.normal(0.0, config.ac_spread_dB)) / 10.0)
        offsets = rng.normal(0.0, spread, size=config.N_p)
        clusters.append(Cluster(np.array([xy[0], xy[1], z]), vr_center,
                                config.vr_radius, a_c, offsets))
    return clusters


def _azimuth(xy):
    return float(np.arctan2(xy[1], xy[0]))


def generate_mpcs(user_pos, clusters, config: ScenarioConfig,
                  rng: np.random.Generator, user_index: int = 0) -> UserLink:
    """Collect the multipath components seen by one user.

    Every cluster with nonzero VR gain contributes ``N_p`` paths with
    geometric amplitude ``sqrt(path_loss) * A_VR * sqrt(A_C)``. A user that
    sees no cluster gets a single local cluster around itself so the
    channel never has rank zero.
    """
    if not clusters:
        raise DomainError("generate_mpcs needs at least one cluster")
    user_pos = np.asarray(user_pos, dtype=float)
    user3 = np.array([user_pos[0], user_pos[1], config.h_MS])
    bs3 = np.array([0.0, 0.0, config.h_BS])
    d_bs_ms = float(np.linalg.norm(user3 - bs3))
    amp_pl = np.sqrt(path_loss_linear(d_bs_ms, config.wavelength))

    phi, theta, tau, a_ga = [], [], [], []
    for cl in clusters:
        g = vr_gain(np.linalg.norm(user_pos - cl.vr_center), cl.vr_radius,
                    config.vr_transition)
        if g <= 0:
            continue
        n = cl.paths.size
        phi.append(wrap_angle(_azimuth(cl.position) + cl.paths))
        theta.append(np.full(n, _azimuth(cl.position[:2] - user_pos)))
        length = np.linalg.norm(cl.position - bs3) + np.linalg.norm(user3 - cl.position)
        tau.append(np.full(n, length / SPEED_OF_LIGHT))
        a_ga.append(np.full(n, amp_pl * g * np.sqrt(cl.attenuation_AC)))

    fallback = not phi
    if fallback:
        spread = np.deg2rad(config.angular_spread_deg)
        offsets = rng.normal(0.0, spread, size=config.N_p)
        phi.append(wrap_angle(_azimuth(user_pos) + offsets))
        theta.append(rng.uniform(-np.pi, np.pi, size=config.N_p))
        tau.append(np.full(config.N_p, d_bs_ms / SPEED_OF_LIGHT))
        a_ga.append(np.full(config.N_p, amp_pl))

    return UserLink(user_index, user_pos.copy(), np.concatenate(phi),
                    np.concatenate(theta), np.concatenate(tau),
                    np.concatenate(a_ga), fallback=fallback)


def generate_drop(config: ScenarioConfig, rng: np.random.Generator) -> Drop:
    """Clusters, then users, then each user's multipath components."""
    clusters = generate_clusters(config, rng)
    positions = place_users(config, rng)
    links = [generate_mpcs(pos, clusters, config, rng, user_index=k)
             for k, pos in enumerate(positions)]
    return Drop(config, clusters, positions, links)


def noise_power(config: ScenarioConfig) -> float:
    """Thermal noise power ``BW * k_B * T0 * W`` in watts."""
    return config.BW * BOLTZMANN * config.T0 * 10.0 ** (config.noise_figure_dB / 10.0)
