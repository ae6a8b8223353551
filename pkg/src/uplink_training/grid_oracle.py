"""Brute-force reference maximizer over the feasible ``(alpha, T_d)`` region.

Nothing here uses the closed-form solutions; the oracle only evaluates the
rate on grids, filters points by the raw constraint inequalities, and
shrinks the grid around the incumbent. Ties go to the lexicographically
smallest ``(alpha, T_d)``, so results do not depend on evaluation order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .sinr_model import Receiver, SystemConfig, rate_at

# max grid cells evaluated per numpy batch
_BATCH = 4_000_000
_WINDOW = 50  # refined grid spans +/- 5 old steps at 1/10 spacing
# re-centred scans per refinement level; lets the incumbent walk along a ridge
_MAX_RECENTER = 200


@dataclass(frozen=True)
class GridSpec:
    alpha_step: float = 1e-3
    td_step: float = 0.05
    refine_iters: int = 3

    def __post_init__(self):
        if not (self.alpha_step > 0 and self.td_step > 0):
            raise ValueError("grid steps must be positive")
        if self.refine_iters < 0:
            raise ValueError("refine_iters must be >= 0")

    @property
    def oracle_grade(self) -> bool:
        return self.alpha_step <= 1e-3 and self.td_step <= 0.1


class GridPoint(NamedTuple):
    alpha: float
    T_d: float
    rate: float


class SlicePoint(NamedTuple):
    alpha: float
    rate: float


def _feasible(alpha, T_d, cfg: SystemConfig, rtol=1e-12):
    """Peak-power constraints in their original linear-inequality form."""
    lhs = cfg.rho * cfg.T * alpha + cfg.rho_max * T_d
    slack = rtol * cfg.rho_max * cfg.T
    return (
        (lhs <= cfg.rho_max * cfg.T + slack)
        & (lhs >= cfg.rho * cfg.T - slack)
        & (alpha >= 0.0) & (alpha <= 1.0)
        & (T_d > 0.0) & (T_d <= cfg.T - cfg.K)
    )


def _lexi_best(alphas, tds, values):
    """Best value with lexicographic tie-break; ``values`` has shape (len(alphas), len(tds))."""
    top = np.max(values)
    if not np.isfinite(top):
        return None
    ia, it = np.nonzero(values == top)
    order = np.lexsort((tds[it], alphas[ia]))
    k = order[0]
    return GridPoint(float(alphas[ia[k]]), float(tds[it[k]]), float(top))


def _better(cand, best):
    if best is None:
        return True
    if cand.rate != best.rate:
        return cand.rate > best.rate
    return (cand.alpha, cand.T_d) < (best.alpha, best.T_d)


def _scan(alphas, tds, cfg, rx):
    alphas = np.unique(alphas)
    tds = np.unique(tds)
    rows = max(1, _BATCH // max(alphas.size, 1))
    best = None
    a = alphas[:, None]
    for start in range(0, tds.size, rows):
        t = tds[start:start + rows]
        ok = _feasible(a, t[None, :], cfg)
        if not ok.any():
            continue
        vals = np.where(ok, rate_at(a, t[None, :], cfg, rx), -np.inf)
        cand = _lexi_best(alphas, t, vals)
        if cand is not None and _better(cand, best):
            best = cand
    return best


def _axis(lo, hi, step):
    n = int(math.floor((hi - lo) / step + 1e-9))
    return lo + step * np.arange(n + 1)


def grid_argmax(cfg: SystemConfig, rx, spec: GridSpec = GridSpec()) -> GridPoint:
    """Exhaustive grid maximum of the rate over the feasible region, then local refinement."""
    rx = Receiver.parse(rx)
    td_max = float(cfg.T - cfg.K)
    alphas = np.append(_axis(0.0, 1.0, spec.alpha_step), 1.0)
    # anchored at T - K so the upper data-length edge is on the grid
    tds = td_max - _axis(0.0, td_max, spec.td_step)
    tds = tds[tds > 0]
    best = _scan(alphas, tds, cfg, rx)
    if best is None:
        raise RuntimeError("no feasible grid point")
    a_step, t_step = spec.alpha_step, spec.td_step
    offsets = np.arange(-_WINDOW, _WINDOW + 1) / 10.0
    for _ in range(spec.refine_iters):
        for _ in range(_MAX_RECENTER):
            a_new = np.clip(best.alpha + offsets * a_step, 0.0, 1.0)
            t_new = best.T_d + offsets * t_step
            t_new = t_new[(t_new > 0) & (t_new <= td_max)]
            if t_new.max() + t_step > td_max:
                t_new = np.append(t_new, td_max)
            cand = _scan(a_new, t_new, cfg, rx)
            if cand is None or not _better(cand, best):
                break
            best = cand
        a_step /= 10.0
        t_step /= 10.0
    return best


def _noise_to_signal(alpha, T_d, cfg):
    # SINR of both receivers is a decreasing function of this ratio at fixed T_d;
    # unlike the SINR itself it does not saturate at high power
    e_tau = alpha * cfg.rho * cfg.T
    rho_d = (1.0 - alpha) * cfg.rho * cfg.T / T_d
    with np.errstate(divide="ignore", invalid="ignore"):
        q = (cfg.K * rho_d + e_tau + 1.0) / (e_tau * rho_d)
    return np.where(e_tau * rho_d > 0, q, np.inf)


def grid_argmax_fixed_td(T_d: float, cfg: SystemConfig, rx, spec: GridSpec = GridSpec()) -> SlicePoint:
    """Grid maximum over ``alpha`` at fixed ``T_d``.

    Points are ranked by the interference-plus-noise to signal ratio, which
    orders them exactly as the rate does but keeps resolution where the
    SINR itself flattens out.
    """
    rx = Receiver.parse(rx)
    rt = cfg.rho * cfg.T
    # roots of the two peak-power inequalities at this T_d
    hi = min(1.0, cfg.rho_max * (cfg.T - T_d) / rt)
    lo = max(0.0, 1.0 - cfg.rho_max * T_d / rt)

    def pick(alphas):
        alphas = np.unique(np.clip(alphas, lo, hi))
        q = _noise_to_signal(alphas, T_d, cfg)
        top = np.min(q)
        return float(alphas[np.nonzero(q == top)[0][0]])

    best = pick(np.concatenate([_axis(lo, hi, spec.alpha_step), [lo, hi]]))
    step = spec.alpha_step
    offsets = np.arange(-_WINDOW, _WINDOW + 1) / 10.0
    for _ in range(spec.refine_iters):
        best = pick(np.append(best + offsets * step, best))
        step /= 10.0
    return SlicePoint(best, float(rate_at(best, T_d, cfg, rx)))
