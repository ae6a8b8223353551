"""Optimal training-energy fraction for a fixed data-phase length."""

from __future__ import annotations

import math
from dataclasses import dataclass

from .search import golden_max
from .sinr_model import ConfigError, Receiver, SystemConfig, sinr_at, sinr_coefficients

# |T_d - K| below this takes the alpha = 1/2 branch
TD_EQ_K_TOL = 1e-9


@dataclass(frozen=True)
class FeasibleInterval:
    """Admissible ``alpha`` range ``[lo, hi]``; empty when ``lo > hi``."""

    lo: float
    hi: float

    @property
    def empty(self) -> bool:
        return self.lo > self.hi

    @property
    def is_point(self) -> bool:
        return self.lo == self.hi

    def __contains__(self, alpha) -> bool:
        return self.lo <= alpha <= self.hi


@dataclass(frozen=True)
class FixedTdSolution:
    T_d: float
    alpha_star: float
    sinr_at_star: float
    clipped: bool


def feasible_alpha(T_d: float, cfg: SystemConfig) -> FeasibleInterval:
    """Intersect the two peak-power bounds on ``alpha`` with ``[0, 1]``.

    ``rho_tau <= rho_max`` gives the upper bound and ``rho_d <= rho_max``
    the lower one.
    """
    if not 0 < T_d <= cfg.T - cfg.K:
        raise ConfigError(f"T_d must lie in (0, T-K], got {T_d}")
    ratio = cfg.rho_max / cfg.rho
    T_tau = cfg.T - T_d
    upper = ratio * T_tau / cfg.T
    lower = upper + (1.0 - ratio)
    return FeasibleInterval(lo=max(0.0, lower), hi=min(1.0, upper))


def alpha_star_mrc_unconstrained(T_d: float, cfg: SystemConfig) -> float:
    """Stationary point of the MRC SINR in ``alpha`` (peak power ignored).

    The root of ``(1-a1) x^2 - 2 b1 x + b1 = 0`` lying in (0, 1) is taken
    in its conjugate form ``b1 / (b1 + sqrt(b1 (a1 + b1 - 1)))``, which
    stays well conditioned as ``T_d -> K``. Single-user systems have no
    rational form and are maximized numerically.
    """
    if T_d <= 0:
        raise ConfigError("T_d must be positive")
    if cfg.K == 1:
        x, _ = golden_max(lambda a: float(sinr_at(a, T_d, cfg, Receiver.MRC)), 0.0, 1.0, tol=1e-12)
        return x
    if abs(T_d - cfg.K) < TD_EQ_K_TOL:
        return 0.5
    rt = cfg.rho * cfg.T
    b1 = sinr_coefficients(T_d, cfg).b1
    # a1 + b1 - 1, expanded to avoid cancellation when a1 ~ 1
    excess = T_d * (rt + 1.0) / (rt * rt * (cfg.K - 1))
    return b1 / (b1 + math.sqrt(b1 * excess))


def alpha_star_zf_unconstrained(T_d: float, cfg: SystemConfig) -> float:
    """Stationary point of the ZF SINR in ``alpha`` (peak power ignored).

    ``-gamma + sqrt(gamma (gamma + 1))`` when ``T_d > K`` and
    ``-gamma - sqrt(gamma (gamma + 1))`` when ``T_d < K``, both evaluated
    in conjugate form.
    """
    if T_d <= 0:
        raise ConfigError("T_d must be positive")
    if abs(T_d - cfg.K) < TD_EQ_K_TOL:
        return 0.5
    gamma = sinr_coefficients(T_d, cfg).gamma
    if T_d > cfg.K:
        return gamma / (gamma + math.sqrt(gamma * (gamma + 1.0)))
    g = -gamma  # >= 1 here
    return g / (g + math.sqrt(g * (g - 1.0)))


def alpha_star_unconstrained(T_d: float, cfg: SystemConfig, rx) -> float:
    if Receiver.parse(rx) is Receiver.MRC:
        return alpha_star_mrc_unconstrained(T_d, cfg)
    return alpha_star_zf_unconstrained(T_d, cfg)


def solve_fixed_td(T_d: float, cfg: SystemConfig, rx) -> FixedTdSolution:
    """Best ``alpha`` at fixed ``T_d`` under both power constraints.

    The SINR is concave in ``alpha``, so when the stationary point falls
    outside the feasible interval the nearer endpoint is optimal.
    """
    rx = Receiver.parse(rx)
    interval = feasible_alpha(T_d, cfg)
    free = alpha_star_unconstrained(T_d, cfg, rx)
    if interval.is_point:
        alpha, clipped = interval.lo, free != interval.lo
    elif free < interval.lo:
        alpha, clipped = interval.lo, True
    elif free > interval.hi:
        alpha, clipped = interval.hi, True
    else:
        alpha, clipped = free, False
    return FixedTdSolution(
        T_d=float(T_d),
        alpha_star=alpha,
        sinr_at_star=float(sinr_at(alpha, T_d, cfg, rx)),
        clipped=clipped,
    )
