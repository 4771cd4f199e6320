"""Scenario configuration.

A :class:`ScenarioConfig` holds every physical and algorithmic parameter of
one experiment. Field names double as the keys of the flat ``key = value``
configuration file format read by :func:`load_config`.
"""

from __future__ import annotations

import dataclasses
import math
import os
from dataclasses import dataclass, fields
from typing import Any, Mapping

from .errors import ConfigError

SPEED_OF_LIGHT = 299_792_458.0

#: Environment variable naming a default configuration file for the CLI.
CONFIG_ENV_VAR = "CUSBF_CONFIG"

PRUNE_MODES = ("all", "latest")


@dataclass(frozen=True)
class ScenarioConfig:
    """All parameters of one simulated scenario.

    Defaults reproduce the micro-cell NLoS setup at 2 GHz (20 MHz bandwidth,
    9 dB noise figure, 500 m cell, 10 dBm per-user power) with a desk-scale
    array. Cluster parameters (``N_C``, ``N_p``, ``vr_radius``,
    ``vr_transition``, ``angular_spread_deg``, ``ac_spread_dB``) form a
    simplified clustered parameterization, not measured tables.
    """

    M: int = 64
    K: int = 20
    K_s: int = 5
    R: float = 500.0
    R_th_factor: float = 0.1
    f_c: float = 2e9
    d_over_lambda: float = 0.5
    BW: float = 20e6
    noise_figure_dB: float = 9.0
    T0: float = 290.0
    p_dBm: float = 10.0
    epsilon: float = 0.5
    N_C: int = 20
    N_p: int = 6
    vr_radius: float = 150.0
    vr_transition: float = 20.0
    h_BS: float = 5.0
    h_MS: float = 1.5
    drops: int = 200
    seed: int = 0
    # cluster spread and power statistics
    angular_spread_deg: float = 10.0
    ac_spread_dB: float = 4.0
    # baselines
    gwc_gamma: float = 0.3
    pilot_power_dBm: float | None = None
    prune_mode: str = "all"

    def __post_init__(self):
        for name in ("M", "K", "K_s", "N_C", "N_p", "drops", "seed"):
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, int):
                raise ConfigError(f"{name} must be an integer, got {value!r}", name)
        for name in ("M", "K", "K_s", "N_C", "N_p", "drops"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be >= 1", name)
        if self.seed < 0:
            raise ConfigError("seed must be non-negative", "seed")
        if self.K_s > self.M:
            raise ConfigError(f"K_s={self.K_s} exceeds M={self.M}", "K_s")
        if self.K_s > self.K:
            raise ConfigError(f"K_s={self.K_s} exceeds K={self.K}", "K_s")
        for name in ("R", "f_c", "d_over_lambda", "BW", "T0", "vr_radius",
                     "h_BS", "h_MS"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise ConfigError(f"{name} must be positive and finite", name)
        for name in ("p_dBm", "noise_figure_dB"):
            if not math.isfinite(getattr(self, name)):
                raise ConfigError(f"{name} must be finite", name)
        if not 0.0 <= self.R_th_factor < 1.0:
            raise ConfigError("R_th_factor must lie in [0, 1)", "R_th_factor")
        if not 0.0 <= self.epsilon <= 1.0:
            raise ConfigError("epsilon must lie in [0, 1]", "epsilon")
        if not 0.0 <= self.vr_transition <= self.vr_radius:
            raise ConfigError("vr_transition must lie in [0, vr_radius]",
                              "vr_transition")
        if not (self.angular_spread_deg >= 0 and self.ac_spread_dB >= 0):
            raise ConfigError("spreads must be non-negative", "angular_spread_deg")
        if not 0.0 <= self.gwc_gamma <= 1.0:
            raise ConfigError("gwc_gamma must lie in [0, 1]", "gwc_gamma")
        if self.pilot_power_dBm is not None and not math.isfinite(self.pilot_power_dBm):
            raise ConfigError("pilot_power_dBm must be finite", "pilot_power_dBm")
        if self.prune_mode not in PRUNE_MODES:
            raise ConfigError(f"prune_mode must be one of {PRUNE_MODES}",
                              "prune_mode")

    @property
    def wavelength(self) -> float:
        return SPEED_OF_LIGHT / self.f_c

    @property
    def p_watts(self) -> float:
        """Per-user transmit power in watts."""
        return dbm_to_watts(self.p_dBm)

    @property
    def pilot_watts(self) -> float:
        """Uplink pilot power; defaults to the data power."""
        if self.pilot_power_dBm is None:
            return self.p_watts
        return dbm_to_watts(self.pilot_power_dBm)

    def replace(self, **changes) -> "ScenarioConfig":
        return dataclasses.replace(self, **changes)

    def as_dict(self) -> dict[str, Any]:
        return dataclasses.asdict(self)


def dbm_to_watts(p_dbm: float) -> float:
    return 10.0 ** ((p_dbm - 30.0) / 10.0)


def _coerce(name: str, raw: Any, default: Any) -> Any:
    if not isinstance(raw, str):
        return raw
    text = raw.strip()
    try:
        if name == "pilot_power_dBm":
            return None if text.lower() in ("", "none") else float(text)
        if name == "prune_mode":
            return text
        if isinstance(default, int):
            as_float = float(text)
            if not as_float.is_integer():
                raise ValueError(text)
            return int(as_float)
        return float(text)
    except ValueError:
        raise ConfigError(f"cannot parse {name} = {raw!r}", name) from None


def config_from_mapping(values: Mapping[str, Any],
                        base: ScenarioConfig | None = None) -> ScenarioConfig:
    """Build a config from ``values`` layered over ``base`` (or defaults).

    String values are converted to the field's type. Unknown keys raise
    :class:`ConfigError`.
    """
    base = base or ScenarioConfig()
    known = {f.name: getattr(base, f.name) for f in fields(ScenarioConfig)}
    changes = {}
    for key, raw in values.items():
        if key not in known:
            raise ConfigError(f"unknown configuration key {key!r}", key)
        changes[key] = _coerce(key, raw, known[key])
    return dataclasses.replace(base, **changes)


def parse_config_text(text: str) -> dict[str, str]:
    """Parse flat ``key = value`` text; ``#`` starts a comment."""
    values = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value'")
        key, value = (part.strip() for part in line.split("=", 1))
        values[key] = value
    return values


def load_config(path: str | os.PathLike | None = None,
                overrides: Mapping[str, Any] | None = None) -> ScenarioConfig:
    """Load a config file, then apply ``overrides`` on top.

    Precedence, lowest to highest: built-in defaults, the file at ``path``
    (or ``$CUSBF_CONFIG`` when ``path`` is None), ``overrides``.
    """
    if path is None:
        path = os.environ.get(CONFIG_ENV_VAR) or None
    config = ScenarioConfig()
    if path is not None:
        with open(path, encoding="utf-8") as fh:
            config = config_from_mapping(parse_config_text(fh.read()), config)
    if overrides:
        config = config_from_mapping(overrides, config)
    return config


def format_config(config: ScenarioConfig) -> str:
    """Render ``config`` in the same flat format :func:`load_config` reads."""
    lines = []
    for f in fields(config):
        value = getattr(config, f.name)
        lines.append(f"{f.name} = {'none' if value is None else value}")
    return "\n".join(lines) + "\n"
