"""Parameter sweeps and the complexity report."""

from __future__ import annotations

import csv
import io
import time
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .channel import covariance
from .config import ScenarioConfig
from .errors import ConfigError
from .geometry import generate_drop, noise_power
from .metrics import MonteCarloResult, monte_carlo
from .precoding import approximate_eigenchannel, mmse_estimate, zf_precoder
from .scheduling import Scheme, cusbf_schedule
from .spectrum import build_U

#: sweep variable -> ScenarioConfig field
SWEEP_FIELDS = {"epsilon": "epsilon", "K": "K", "K_s": "K_s",
                "power_dBm": "p_dBm", "M": "M"}

CSV_COLUMNS = ("scheme", "variable", "value", "sum_rate_mean", "sum_rate_stderr",
               "per_user_rate_mean", "n_selected_mean", "drops", "seed",
               "M", "K", "K_s", "epsilon", "p_dBm")


@dataclass(frozen=True)
class SweepSpec:
    variable: str
    values: tuple
    schemes: tuple = (Scheme.CUSBF,)
    base: ScenarioConfig = field(default_factory=ScenarioConfig)

    def __post_init__(self):
        if self.variable not in SWEEP_FIELDS:
            raise ConfigError(f"unknown sweep variable {self.variable!r}; "
                              f"choose from {sorted(SWEEP_FIELDS)}", "variable")
        if len(self.values) == 0:
            raise ConfigError("sweep values must be nonempty", "values")
        if list(self.values) != sorted(self.values):
            raise ConfigError("sweep values must be sorted ascending", "values")
        if not self.schemes:
            raise ConfigError("at least one scheme is required", "schemes")
        object.__setattr__(self, "schemes", tuple(Scheme(s) for s in self.schemes))
        object.__setattr__(self, "values", tuple(self.values))

    def configs(self) -> list[ScenarioConfig]:
        """One validated config per sweep value."""
        name = SWEEP_FIELDS[self.variable]
        out = []
        for v in self.values:
            if name in ("K", "K_s", "M"):
                if float(v) != int(v):
                    raise ConfigError(f"{self.variable} values must be integers",
                                      self.variable)
                v = int(v)
            out.append(self.base.replace(**{name: v}))
        return out


def _fmt(x) -> str:
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return format(float(x), ".10g")


def sweep_results(spec: SweepSpec,
                  evaluate: Callable[[ScenarioConfig, Scheme], MonteCarloResult] = monte_carlo):
    """Monte Carlo result per (scheme, value), in that nesting order."""
    configs = spec.configs()
    return [(scheme, value, cfg, evaluate(cfg, scheme))
            for scheme in spec.schemes
            for value, cfg in zip(spec.values, configs)]


def run_sweep(spec: SweepSpec) -> str:
    """Run every sweep point and return the CSV table as text."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for scheme, value, cfg, res in sweep_results(spec):
        writer.writerow([
            scheme.value, spec.variable, _fmt(value), _fmt(res.sum_rate_mean),
            _fmt(res.sum_rate_stderr), _fmt(res.per_user_rate_mean),
            _fmt(res.n_selected_mean), cfg.drops, cfg.seed,
            cfg.M, cfg.K, cfg.K_s, _fmt(cfg.epsilon), _fmt(cfg.p_dBm),
        ])
    return buf.getvalue()


# ---------------------------------------------------------------- complexity

ASYMPTOTIC_ROWS = (
    ("GWC", "O(K^3 M^3)", "O(K)", "O(M^3)"),
    ("JSDM", "O(K_s^3 M^3)", "O(K)", "K_s O(M^3 + M log^2 M log b)"),
    ("CUSBF", "-", "O(K)", "O(M^3)"),
)


def best_time(fn, repeats: int = 7) -> float:
    best = np.inf
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def fit_exponent(sizes: Sequence[float], times: Sequence[float]) -> float:
    """Slope of log(time) against log(size)."""
    return float(np.polyfit(np.log(sizes), np.log(times), 1)[0])


def synthetic_U(K: int, M: int, rng: np.random.Generator,
                occupancy: float = 0.1) -> np.ndarray:
    mask = rng.random((K, M)) < occupancy
    return np.where(mask, rng.exponential(size=(K, M)), 0.0)


def scheduling_scaling(K_values=(2000, 4000, 8000, 16000), M: int = 64,
                       K_s: int = 8, epsilon: float = 0.5, seed: int = 0,
                       repeats: int = 7):
    """Best-of-``repeats`` CUSBF scheduling time per K, and the fitted exponent."""
    rng = np.random.default_rng(seed)
    times = []
    for K in K_values:
        U = synthetic_U(K, M, rng)
        times.append(best_time(lambda: cusbf_schedule(U, K_s, epsilon), repeats))
    return times, fit_exponent(K_values, times)


def estimation_scaling(M_values=(16, 32, 64), K: int = 50, seed: int = 0,
                       repeats: int = 7):
    """Best-of-``repeats`` MMSE estimation time per M, and the fitted exponent."""
    rng = np.random.default_rng(seed)
    times = []
    for M in M_values:
        A = (rng.standard_normal((K, M, 4)) + 1j * rng.standard_normal((K, M, 4)))
        R = A @ A.conj().transpose(0, 2, 1)
        H = rng.standard_normal((K, M)) + 1j * rng.standard_normal((K, M))
        times.append(best_time(lambda: mmse_estimate(H, R, 1.0, 1.0, rng), repeats))
    return times, fit_exponent(M_values, times)


def complexity_report(config: ScenarioConfig, fit: bool = True) -> str:
    """Asymptotic operation counts next to timings measured on one drop.

    With ``fit`` the report also carries the empirical scaling exponents of
    CUSBF scheduling in K and of MMSE estimation in M.
    """
    rng = np.random.default_rng(config.seed)
    drop = generate_drop(config, rng)
    K, M = config.K, config.M

    R_all = [covariance(link, config) for link in drop.links]
    H = rng.standard_normal((K, M)) + 1j * rng.standard_normal((K, M))
    t_est = best_time(lambda: mmse_estimate(H, R_all, noise_power(config),
                                            config.pilot_watts, rng), 3)
    U = build_U(drop.links, config)
    t_sched = best_time(lambda: cusbf_schedule(U, config.K_s, config.epsilon), 3)
    sel = list(cusbf_schedule(U, config.K_s, config.epsilon).selected)
    G = approximate_eigenchannel(U[sel], M)
    t_bf = best_time(lambda: zf_precoder(G), 3)

    lines = ["Scheme        | Channel estimation | User scheduling | Beamforming",
             "--------------+--------------------+-----------------+------------"]
    for row in ASYMPTOTIC_ROWS:
        lines.append(f"{row[0]:<13} | {row[1]:<18} | {row[2]:<15} | {row[3]}")
    lines += [
        "",
        f"Measured on one drop (K={K}, M={M}, K_s={config.K_s}):",
        f"  GWC joint MMSE estimator dimension: KM x KM = {K * M} x {K * M}"
        f" (evaluated as {K} blocks of {M} x {M})",
        f"  GWC MMSE estimation time:   {t_est * 1e3:.3f} ms",
        f"  CUSBF scheduling:           {t_sched * 1e3:.3f} ms",
        f"  CUSBF ZF on G ({len(sel)} x {M}): {t_bf * 1e3:.3f} ms",
    ]
    if fit:
        _, k_exp = scheduling_scaling(repeats=3)
        _, m_exp = estimation_scaling(repeats=3)
        lines += ["",
                  "Fitted scaling (log-log slope of best-of-3 timings):",
                  f"  CUSBF scheduling vs K (M=64)      : K^{k_exp:.2f}",
                  f"  MMSE estimation vs M (K=50):       M^{m_exp:.2f}"]
    return "\n".join(lines) + "\n"
