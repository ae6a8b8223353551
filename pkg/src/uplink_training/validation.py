"""Randomized consistency suites: closed forms against brute force and simulation."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .alpha_solver import alpha_star_unconstrained
from .channel_sim import MonteCarloSpec, empirical_sinr
from .grid_oracle import GridSpec, grid_argmax, grid_argmax_fixed_td
from .joint_solver import CaseLabel, case1_line_rate, classify, optimize, thresholds
from .search import unimodality_violation
from .sinr_model import Receiver, SystemConfig, rate_at, sinr_at, sinr_mrc, sinr_zf

EPS = np.finfo(float).eps


@dataclass
class SuiteReport:
    name: str
    passed: bool
    metrics: dict = field(default_factory=dict)
    notes: list = field(default_factory=list)

    def as_dict(self):
        return {"suite": self.name, "passed": self.passed, "metrics": self.metrics, "notes": self.notes}


def random_config(rng, K_range=(2, 16), extra_antennas=(1, 100), extra_symbols=(1, 300),
                  rho_db_range=(-20.0, 20.0), ratio_range=(1.0, 10.0)) -> SystemConfig:
    K = int(rng.integers(K_range[0], K_range[1] + 1))
    M = K + int(rng.integers(extra_antennas[0], extra_antennas[1] + 1))
    T = K + int(rng.integers(extra_symbols[0], extra_symbols[1] + 1))
    rho = 10.0 ** (rng.uniform(*rho_db_range) / 10.0)
    ratio = rng.uniform(*ratio_range)
    return SystemConfig(M=M, K=K, T=T, rho=rho, rho_max=ratio * rho)


def random_case_config(rng, label: CaseLabel, rx, rho_db_range=(-20.0, 20.0), max_T=120) -> SystemConfig:
    """Draw a scenario whose peak-power ratio places it in the requested case.

    The data-peak case needs ``alpha_dag < K/T``, which only happens when
    the data phase is shorter than the training phase (``T < 2K``).
    """
    rx = Receiver.parse(rx)
    label = CaseLabel(label)
    for _ in range(10_000):
        K = int(rng.integers(2, 17))
        M = K + int(rng.integers(1, 60))
        if label is CaseLabel.DATA_PEAK_LIMITED:
            T = K + int(rng.integers(1, K))
        else:
            T = int(rng.integers(K + 1, max(max_T, K + 2) + 1))
        rho = 10.0 ** (rng.uniform(*rho_db_range) / 10.0)
        base = SystemConfig(M=M, K=K, T=T, rho=rho, rho_max=rho)
        dag = thresholds(base, rx).alpha_dag
        r1 = dag * T / K  # case 1 below this ratio
        r2 = T * (1.0 - dag) / (T - K)  # case 2 below this ratio
        u = rng.uniform(0.05, 0.95)
        if label is CaseLabel.PILOT_PEAK_LIMITED:
            if r1 <= 1.0:
                continue
            ratio = 1.0 + u * (r1 - 1.0)
        elif label is CaseLabel.DATA_PEAK_LIMITED:
            if r2 <= 1.0:
                continue
            ratio = 1.0 + u * (r2 - 1.0)
        else:
            ratio = max(r1, r2, 1.0) * (1.02 + 2.0 * u)
        cfg = base.replace(rho_max=ratio * rho)
        if classify(thresholds(cfg, rx)) is label:
            return cfg
    raise RuntimeError(f"could not draw a configuration for {label}")


def closed_form_vs_grid(rng, configs=20, joint=True, alpha_tol=2e-6, rate_rtol=1e-5):
    worst_alpha = 0.0
    worst_rate = 0.0
    for rx in Receiver:
        for _ in range(configs):
            cfg = random_config(rng, extra_symbols=(1, 200))
            T_d = rng.uniform(0.05, 1.0) * (cfg.T - cfg.K)
            loose = cfg.replace(rho_max=1e9 * cfg.rho)
            closed = alpha_star_unconstrained(T_d, loose, rx)
            grid = grid_argmax_fixed_td(T_d, loose, rx, GridSpec(alpha_step=1e-6, td_step=1.0, refine_iters=2))
            worst_alpha = max(worst_alpha, abs(closed - grid.alpha))
            if joint:
                res = optimize(cfg, rx)
                ref = grid_argmax(cfg, rx, GridSpec(alpha_step=1e-3, td_step=0.05, refine_iters=3))
                worst_rate = max(worst_rate, (ref.rate - res.rate_star) / ref.rate)
    passed = worst_alpha <= alpha_tol and worst_rate <= rate_rtol
    return SuiteReport("closed_form_vs_grid", passed,
                       {"max_alpha_error": worst_alpha, "max_rate_shortfall": worst_rate,
                        "alpha_tol": alpha_tol, "rate_rtol": rate_rtol})


def second_differences(values):
    v = np.asarray(values, dtype=float)
    return v[2:] - 2.0 * v[1:-1] + v[:-2]


def concavity(rng, instances=200, points=400, h=1e-4):
    """Second differences of SINR in alpha and of rate in T_d must not exceed rounding noise."""
    worst = -math.inf
    worst_td_slope = math.inf
    for rx in Receiver:
        for _ in range(instances):
            cfg = random_config(rng)
            T_d = rng.uniform(0.05, 1.0) * (cfg.T - cfg.K)
            alphas = np.linspace(h, 1.0 - h, points)
            for a in alphas[::40]:
                s = sinr_at(np.array([a - h, a, a + h]), T_d, cfg, rx)
                d2 = second_differences(s)[0]
                worst = max(worst, d2 / (16 * EPS * max(s.max(), 1e-300)))
            a = rng.uniform(0.02, 0.98)
            tds = np.linspace(0.01, cfg.T - cfg.K, points)
            r = rate_at(a, tds, cfg, rx)
            worst = max(worst, float(np.max(second_differences(r))) / (16 * EPS * r.max()))
            worst_td_slope = min(worst_td_slope, float(np.min(np.diff(r))))
    passed = worst <= 1.0 and worst_td_slope > 0
    return SuiteReport("concavity", passed,
                       {"max_second_difference_over_noise": worst, "min_rate_increment_in_T_d": worst_td_slope})


def quasiconcavity(rng, instances=200, points=1000, tol=1e-12):
    worst = 0.0
    for rx in Receiver:
        for _ in range(instances):
            cfg = random_case_config(rng, CaseLabel.PILOT_PEAK_LIMITED, rx)
            lo = thresholds(cfg, rx).alpha1
            hi = min(1.0, cfg.rho_max / cfg.rho * (1.0 - 1e-6))
            values = case1_line_rate(np.linspace(lo, hi, points), cfg, rx)
            worst = max(worst, unimodality_violation(values))
    return SuiteReport("quasiconcavity", worst <= tol, {"max_relative_dip": worst, "tol": tol})


def monte_carlo(rng, trials=10_000, M=20, K=10, T=196, rho=1.0, alpha=0.5, rtol=0.10, seed=0,
                reference_trials=10_000):
    cfg = SystemConfig(M=M, K=K, T=T, rho=rho, rho_max=1e3 * rho)
    split = cfg.split(alpha, T - K)
    metrics = {}
    notes = []
    passed = True
    for rx, closed in ((Receiver.MRC, sinr_mrc), (Receiver.ZF, sinr_zf)):
        est = empirical_sinr(split, rx, MonteCarloSpec(trials=trials, seed=seed))
        ref = float(closed(split.e_tau, split.rho_d, M, K))
        gap = abs(est.sinr - ref)
        band = 3.0 * est.stderr
        ok = gap <= rtol * ref or gap <= band
        wide = band > rtol * ref
        metrics[rx.value] = {"empirical": est.sinr, "closed_form": ref, "relative_gap": gap / ref,
                             "three_se_relative": band / ref, "resampled": est.resampled}
        if wide:
            notes.append(f"{rx.value}: 3-SE band ({band / ref:.3g}) is wider than the {rtol:g} tolerance")
        passed &= ok
    if trials < reference_trials:
        widen = math.sqrt(reference_trials / trials)
        notes.append(f"{trials} trials is below the reference {reference_trials}; "
                     f"confidence bands are {widen:.3g}x wider")
    metrics["trials"] = trials
    return SuiteReport("monte_carlo", passed, metrics, notes)


SUITES = {
    "closed_form_vs_grid": closed_form_vs_grid,
    "concavity": concavity,
    "quasiconcavity": quasiconcavity,
    "monte_carlo": monte_carlo,
}
