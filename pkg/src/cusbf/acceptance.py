"""Executable acceptance criteria.

Each ``criterion_*`` function runs one check at its pinned tolerance and
returns a :class:`CriterionResult`. :func:`run_all` drives them for the
``check`` subcommand and the test suite.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numpy as np

from .channel import assemble_channel, covariance, draw_small_scale
from .config import ScenarioConfig
from .experiments import SweepSpec, estimation_scaling, run_sweep, scheduling_scaling
from .geometry import UserLink, generate_drop, noise_power
from .metrics import MonteCarloResult, monte_carlo, sinr, zf_with_retry
from .precoding import approximate_eigenchannel, zf_precoder
from .scheduling import cusbf_schedule, f2
from .spectrum import asymptotic_spectrum_check, build_U


@dataclass(frozen=True)
class CriterionResult:
    number: int
    name: str
    passed: bool
    detail: str

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"[{status}] {self.number:>2}. {self.name}: {self.detail}"


def _gap_in_se(a: MonteCarloResult, b: MonteCarloResult) -> float:
    """(mean_a - mean_b) in units of the combined standard error."""
    se = math.hypot(a.sum_rate_stderr, b.sum_rate_stderr)
    return (a.sum_rate_mean - b.sum_rate_mean) / se


def random_six_path_user(rng: np.random.Generator) -> UserLink:
    phi = rng.uniform(-np.pi / 2, np.pi / 2, size=6)
    a_ga = np.sqrt(rng.exponential(size=6))
    return UserLink.from_paths(phi, a_ga)


def criterion_1_szego(seeds: int = 20) -> CriterionResult:
    cfg = ScenarioConfig(d_over_lambda=0.5)
    t0 = time.perf_counter()
    failures = []
    worst = 0.0
    for seed in range(seeds):
        link = random_six_path_user(np.random.default_rng(seed))
        ks16, ks256 = asymptotic_spectrum_check(link, cfg, [16, 256])
        worst = max(worst, ks256 / ks16 if ks16 > 0 else math.inf)
        if not ks256 < ks16:
            failures.append(seed)
    elapsed = time.perf_counter() - t0
    ok = not failures and elapsed < 30.0
    return CriterionResult(1, "Szego convergence", ok,
                           f"KS(256) < KS(16) on {seeds - len(failures)}/{seeds} seeds, "
                           f"max ratio {worst:.3f}, {elapsed:.2f} s (< 30 s)")


def criterion_2_zf_nulling(trials: int = 100) -> CriterionResult:
    cfg = ScenarioConfig(M=16, K=12, K_s=4)
    rng = np.random.default_rng(2)
    P_n = noise_power(cfg)
    worst = worst_raw = 0.0
    done = 0
    finite_positive = True
    while done < trials:
        drop = generate_drop(cfg, rng)
        users = rng.choice(cfg.K, size=cfg.K_s, replace=False)
        links = [draw_small_scale(drop.links[k], rng) for k in users]
        H = assemble_channel(links, cfg)
        if np.linalg.matrix_rank(H) < cfg.K_s:
            continue
        # leakage of the unnormalized ZF matrix is scale-free while ||H||^2
        # carries the path loss, so compare on H at unit mean entry power
        Hn = H / np.sqrt(np.mean(np.abs(H) ** 2))
        leak = np.abs(Hn @ zf_precoder(Hn).raw) ** 2
        np.fill_diagonal(leak, 0.0)
        worst = max(worst, leak.max() / np.linalg.norm(Hn) ** 2)
        leak_raw = np.abs(H @ zf_precoder(H).raw) ** 2
        np.fill_diagonal(leak_raw, 0.0)
        worst_raw = max(worst_raw, leak_raw.max() / np.linalg.norm(H) ** 2)

        U = build_U([drop.links[k] for k in users], cfg)
        G = approximate_eigenchannel(U, cfg.M)
        W, kept = zf_with_retry(G, range(cfg.K_s), cfg.p_watts)
        g = sinr(H[kept], W, cfg.p_watts, P_n)
        finite_positive &= bool(np.all(np.isfinite(g)) and np.all(g > 0))
        done += 1
    ok = worst <= 1e-18 and finite_positive
    return CriterionResult(2, "ZF nulling", ok,
                           f"max |h_k w_j|^2 / ||H||^2 = {worst:.2e} (<= 1e-18) at unit "
                           f"entry power ({worst_raw:.2e} in physical units); "
                           f"G-precoded SINR finite and positive: {finite_positive}")


def criterion_3_covariance_oracle(draws: int = 10_000) -> CriterionResult:
    cfg = ScenarioConfig(M=8, K=8, K_s=4)
    rng = np.random.default_rng(3)
    link = generate_drop(cfg, rng).links[0]
    R = covariance(link, cfg)
    acc = np.zeros_like(R)
    for _ in range(draws):
        h = assemble_channel([draw_small_scale(link, rng)], cfg)[0]
        acc += np.outer(h.conj(), h)
    err = np.abs(acc / draws - R).max() / R[0, 0].real
    return CriterionResult(3, "Covariance oracle", err <= 0.05,
                           f"max |mean(h^H h) - R| / R_00 = {err:.4f} (<= 0.05)")


def random_spectrum_matrix(rng: np.random.Generator, K: int, M: int) -> np.ndarray:
    occupancy = rng.uniform(0.05, 0.5)
    mask = rng.random((K, M)) < occupancy
    mask[np.arange(K), rng.integers(0, M, size=K)] = True
    return np.where(mask, rng.exponential(size=(K, M)), 0.0)


EPSILON_GRID = (0.02, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 0.98)


def criterion_4_selection_invariants(trials: int = 1000) -> CriterionResult:
    rng = np.random.default_rng(4)
    bad_first = bad_pairs = bad_monotone = 0
    for _ in range(trials):
        K = int(rng.integers(2, 30))
        M = int(rng.integers(4, 65))
        K_s = int(rng.integers(1, min(K, M) + 1))
        U = random_spectrum_matrix(rng, K, M)
        norms = np.linalg.norm(U, axis=1)
        sizes = []
        for eps in EPSILON_GRID:
            sel = cusbf_schedule(U, K_s, eps).selected
            sizes.append(len(sel))
            if sel[0] != int(np.argmax(norms)):
                bad_first += 1
            if any(f2(U[a], U[b]) >= eps for i, a in enumerate(sel) for b in sel[:i]):
                bad_pairs += 1
        if any(b < a for a, b in zip(sizes, sizes[1:])):
            bad_monotone += 1
    ok = bad_first == bad_pairs == bad_monotone == 0
    return CriterionResult(4, "CUSBF selection invariants", ok,
                           f"{trials} random U: first-pick violations {bad_first}, "
                           f"pairwise f2 violations {bad_pairs}, "
                           f"|selected| non-monotone in epsilon {bad_monotone}")


def criterion_5_epsilon_sweep(drops: int = 100) -> CriterionResult:
    base = ScenarioConfig(M=64, K=30, K_s=8, drops=drops, seed=5)
    res = {eps: monte_carlo(base.replace(epsilon=eps), "CUSBF") for eps in EPSILON_GRID}
    interior = [e for e in EPSILON_GRID if e not in (0.02, 0.98)]
    best = max(interior, key=lambda e: res[e].sum_rate_mean)
    lo = _gap_in_se(res[best], res[0.02])
    hi = _gap_in_se(res[best], res[0.98])
    ok = lo > 2 and hi > 2
    curve = ", ".join(f"{e}:{res[e].sum_rate_mean:.2f}" for e in EPSILON_GRID)
    return CriterionResult(5, "Epsilon sweep shape", ok,
                           f"best interior eps={best}; margin over eps=0.02 {lo:.2f} SE, "
                           f"over eps=0.98 {hi:.2f} SE (> 2); curve {curve}")


def criterion_6_multiuser_diversity(drops: int = 100) -> CriterionResult:
    base = ScenarioConfig(M=64, K_s=8, drops=drops, seed=6)
    r10 = monte_carlo(base.replace(K=10), "CUSBF")
    r40 = monte_carlo(base.replace(K=40), "CUSBF")
    gap = _gap_in_se(r40, r10)
    return CriterionResult(6, "Multiuser diversity", gap >= 2,
                           f"K=40 {r40.sum_rate_mean:.2f} vs K=10 {r10.sum_rate_mean:.2f} "
                           f"bit/s/Hz, gap {gap:.2f} SE (>= 2)")


def criterion_7_scheme_ordering(drops: int = 200) -> CriterionResult:
    base = ScenarioConfig(M=64, K=20, K_s=5, p_dBm=10, drops=drops, seed=7)
    res = {s: monte_carlo(base, s) for s in ("GWC", "CUSBF", "JSDM")}
    g_c = _gap_in_se(res["GWC"], res["CUSBF"])
    c_j = _gap_in_se(res["CUSBF"], res["JSDM"])
    frac = {}
    for p in (0.0, 30.0):
        cfg = base.replace(p_dBm=p)
        g = monte_carlo(cfg, "GWC").sum_rate_mean
        c = monte_carlo(cfg, "CUSBF").sum_rate_mean
        frac[p] = (g - c) / g
    ok = g_c >= 1 and c_j >= 1 and frac[30.0] < frac[0.0]
    means = ", ".join(f"{s} {r.sum_rate_mean:.2f}+-{r.sum_rate_stderr:.2f}"
                      for s, r in res.items())
    return CriterionResult(7, "Scheme ordering", ok,
                           f"{means}; GWC-CUSBF {g_c:.2f} SE, CUSBF-JSDM {c_j:.2f} SE "
                           f"(>= 1); relative GWC gap {frac[0.0]:.3f} at 0 dBm -> "
                           f"{frac[30.0]:.3f} at 30 dBm (must shrink)")


def criterion_8_noise_power() -> CriterionResult:
    cfg = ScenarioConfig(BW=20e6, T0=290.0, noise_figure_dB=9.0)
    P_n = noise_power(cfg)
    rel = abs(P_n - 6.362e-13) / 6.362e-13
    return CriterionResult(8, "Noise power", rel <= 1e-3,
                           f"P_n = {P_n:.4e} W, relative error {rel:.2e} (<= 1e-3)")


def criterion_9_determinism() -> CriterionResult:
    spec = SweepSpec("epsilon", (0.2, 0.5), ("CUSBF", "GWC", "JSDM"),
                     ScenarioConfig(M=16, K=8, K_s=3, drops=5, seed=9))
    a, b = run_sweep(spec), run_sweep(spec)
    return CriterionResult(9, "Sweep determinism", a == b,
                           f"two runs byte-identical: {a == b} ({len(a)} bytes)")


def criterion_10_complexity() -> CriterionResult:
    _, k_exp = scheduling_scaling()
    _, m_exp = estimation_scaling()
    ok = 0.8 <= k_exp <= 1.2 and m_exp > 1.0
    return CriterionResult(10, "Complexity trend", ok,
                           f"CUSBF scheduling time ~ K^{k_exp:.2f} (in [0.8, 1.2]); "
                           f"MMSE estimation time ~ M^{m_exp:.2f} (> 1)")


CRITERIA = (
    criterion_1_szego,
    criterion_2_zf_nulling,
    criterion_3_covariance_oracle,
    criterion_4_selection_invariants,
    criterion_5_epsilon_sweep,
    criterion_6_multiuser_diversity,
    criterion_7_scheme_ordering,
    criterion_8_noise_power,
    criterion_9_determinism,
    criterion_10_complexity,
)


def run_all(echo=print) -> list[CriterionResult]:
    results = []
    for fn in CRITERIA:
        res = fn()
        if echo is not None:
            echo(res.line())
        results.append(res)
    return results
