"""Joint optimization of the training-energy fraction and the data-phase length.

For fixed ``alpha`` the rate increases with ``T_d``, so the optimum lies on
the upper edge of the feasible region: the segment ``T_d = T - K`` and the
pilot-peak line ``T_d = T - rho T alpha / rho_max``. Which part of that
edge holds the optimum is decided by comparing the unconstrained optimum
``alpha_dag`` at ``T_d = T - K`` with the two thresholds where the peak
constraints meet ``T_d = T - K``.
"""

from __future__ import annotations

import enum
import logging
import warnings
from dataclasses import dataclass

import numpy as np

from .alpha_solver import alpha_star_unconstrained, solve_fixed_td
from .search import golden_max, unimodality_violation
from .sinr_model import PowerSplit, Receiver, SystemConfig, rate_at

log = logging.getLogger(__name__)

CASE1_TOL = 1e-9
PRESCAN_POINTS = 1000
UNIMODAL_TOL = 1e-12
# smallest data-phase length the solver will return, as a fraction of T
MIN_TD_FRACTION = 1e-6


class CaseLabel(str, enum.Enum):
    PILOT_PEAK_LIMITED = "PilotPeakLimited"
    DATA_PEAK_LIMITED = "DataPeakLimited"
    UNCONSTRAINED = "Unconstrained"


class NonUnimodalWarning(RuntimeWarning):
    pass


@dataclass(frozen=True)
class CaseThresholds:
    alpha1: float
    alpha2: float
    alpha_dag: float


@dataclass(frozen=True)
class OptimizationResult:
    alpha_star: float
    T_d_star: float
    rate_star: float
    case_label: CaseLabel
    receiver: Receiver
    cfg: SystemConfig
    integerized: bool = False

    @property
    def split(self) -> PowerSplit:
        return PowerSplit(self.alpha_star, self.T_d_star, self.cfg)

    @property
    def T_tau_star(self) -> float:
        return self.cfg.T - self.T_d_star

    @property
    def rho_tau(self) -> float:
        return self.split.rho_tau

    @property
    def rho_d(self) -> float:
        return self.split.rho_d

    def as_record(self) -> dict:
        return {
            "alpha_star": self.alpha_star,
            "T_tau_star": self.T_tau_star,
            "T_d_star": self.T_d_star,
            "rho_tau": self.rho_tau,
            "rho_d": self.rho_d,
            "rate_bits": self.rate_star,
            "case_label": self.case_label.value,
            "receiver": self.receiver.value,
        }


def thresholds(cfg: SystemConfig, rx) -> CaseThresholds:
    """alpha1: pilot-peak line meets ``T_d = T-K``; alpha2: data-peak line does."""
    rt = cfg.rho * cfg.T
    return CaseThresholds(
        alpha1=cfg.rho_max * cfg.K / rt,
        alpha2=1.0 - cfg.rho_max * (cfg.T - cfg.K) / rt,
        alpha_dag=alpha_star_unconstrained(cfg.T - cfg.K, cfg, rx),
    )


def case1_line_td(alpha, cfg: SystemConfig):
    """Data length on the pilot-peak line, capped at ``T - K``."""
    td = cfg.T - cfg.rho * cfg.T * np.asarray(alpha, dtype=float) / cfg.rho_max
    out = np.minimum(td, cfg.T - cfg.K)
    return out[()] if out.ndim == 0 else out


def case1_line_rate(alpha, cfg: SystemConfig, rx):
    """Rate along the pilot-peak line ``rho_tau = rho_max`` (vectorized)."""
    return rate_at(alpha, case1_line_td(alpha, cfg), cfg, Receiver.parse(rx))


def _case1_alpha_hi(cfg: SystemConfig) -> float:
    return min(1.0, cfg.rho_max * (1.0 - MIN_TD_FRACTION) / cfg.rho)


def search_case1(cfg: SystemConfig, rx, tol: float = CASE1_TOL):
    """Maximize the pilot-peak line rate over ``[alpha1, 1]``.

    The line rate is quasiconcave, so golden-section search applies. A
    coarse pre-scan guards that assumption: if it finds a dip deeper than
    rounding noise, a warning is issued and the search is restricted to
    the neighbourhood of the best scanned point.

    Returns ``(alpha, T_d)``.
    """
    rx = Receiver.parse(rx)
    lo = thresholds(cfg, rx).alpha1
    hi = _case1_alpha_hi(cfg)
    grid = np.linspace(lo, hi, PRESCAN_POINTS)
    values = case1_line_rate(grid, cfg, rx)
    dip = unimodality_violation(values)

    def f(a):
        return float(case1_line_rate(a, cfg, rx))

    if dip > UNIMODAL_TOL:
        msg = f"pilot-peak line rate is not unimodal (relative dip {dip:.3g}); refining around scan argmax"
        log.warning(msg)
        warnings.warn(msg, NonUnimodalWarning, stacklevel=2)
        i = int(np.argmax(values))
        lo, hi = grid[max(i - 1, 0)], grid[min(i + 1, grid.size - 1)]
    alpha, _ = golden_max(f, lo, hi, tol=tol)
    return alpha, float(case1_line_td(alpha, cfg))


def _result(alpha, T_d, cfg, rx, label, integerized=False):
    T_d = float(T_d)
    return OptimizationResult(
        alpha_star=float(alpha),
        T_d_star=T_d,
        rate_star=float(rate_at(alpha, T_d, cfg, rx)),
        case_label=label,
        receiver=rx,
        cfg=cfg,
        integerized=integerized,
    )


def classify(th: CaseThresholds) -> CaseLabel:
    # ties go to the closed-form point, where all three cases agree
    if th.alpha1 < th.alpha_dag:
        return CaseLabel.PILOT_PEAK_LIMITED
    if th.alpha2 > th.alpha_dag:
        return CaseLabel.DATA_PEAK_LIMITED
    return CaseLabel.UNCONSTRAINED


def optimize(cfg: SystemConfig, rx) -> OptimizationResult:
    """Jointly optimal ``(alpha, T_d)`` under average and peak power constraints."""
    rx = Receiver.parse(rx)
    th = thresholds(cfg, rx)
    label = classify(th)
    if label is CaseLabel.PILOT_PEAK_LIMITED:
        alpha, T_d = search_case1(cfg, rx)
    elif label is CaseLabel.DATA_PEAK_LIMITED:
        alpha, T_d = th.alpha2, cfg.T - cfg.K
    else:
        alpha, T_d = th.alpha_dag, cfg.T - cfg.K
    result = _result(alpha, T_d, cfg, rx, label)
    if not result.split.is_feasible():
        raise AssertionError(f"infeasible optimum {result}")
    return result


def optimize_integer(cfg: SystemConfig, rx) -> OptimizationResult:
    """Best point with an integer training length ``T_tau in {K, ..., T-1}``."""
    rx = Receiver.parse(rx)
    label = classify(thresholds(cfg, rx))
    best = None
    for T_tau in range(cfg.K, cfg.T):
        sol = solve_fixed_td(cfg.T - T_tau, cfg, rx)
        value = float(rate_at(sol.alpha_star, sol.T_d, cfg, rx))
        if best is None or value > best[2]:
            best = (sol.alpha_star, sol.T_d, value)
    return _result(best[0], best[1], cfg, rx, label, integerized=True)


def optimize_unconstrained(cfg: SystemConfig, rx) -> OptimizationResult:
    """Optimum without the peak constraint: ``T_tau = K`` and ``alpha = alpha_dag``."""
    rx = Receiver.parse(rx)
    alpha = alpha_star_unconstrained(cfg.T - cfg.K, cfg, rx)
    return _result(alpha, cfg.T - cfg.K, cfg, rx, CaseLabel.UNCONSTRAINED)


def equal_power(cfg: SystemConfig, rx) -> OptimizationResult:
    """Baseline with ``T_tau = K`` and the same power in both phases."""
    rx = Receiver.parse(rx)
    alpha = cfg.K / cfg.T
    return _result(alpha, cfg.T - cfg.K, cfg, rx, classify(thresholds(cfg, rx)))
