"""Scenario model and closed-form SINR / sum-rate expressions.

All powers are linear scale. The SINR helpers accept scalars or numpy
arrays so the brute-force oracle can evaluate whole grids at once.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np


class ConfigError(ValueError):
    """Raised when a scenario or operating point violates its invariants."""


class Receiver(str, enum.Enum):
    MRC = "MRC"
    ZF = "ZF"

    @classmethod
    def parse(cls, value) -> "Receiver":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).upper())
        except ValueError:
            raise ConfigError(f"unknown receiver {value!r}; expected MRC or ZF") from None


@dataclass(frozen=True)
class SystemConfig:
    """Uplink MU-MIMO scenario.

    Parameters
    ----------
    M : int
        Number of base-station antennas.
    K : int
        Number of single-antenna users.
    T : int
        Coherence block length in symbols.
    rho : float
        Average transmit power (linear).
    rho_max : float
        Peak transmit power (linear).
    """

    M: int
    K: int
    T: int
    rho: float
    rho_max: float

    def __post_init__(self):
        for name in ("M", "K", "T"):
            value = getattr(self, name)
            if isinstance(value, bool) or int(value) != value:
                raise ConfigError(f"{name} must be an integer, got {value!r}")
            object.__setattr__(self, name, int(value))
        if self.K < 1:
            raise ConfigError("K must be at least 1")
        if self.M <= self.K:
            raise ConfigError("M must exceed K")
        if self.T <= self.K:
            raise ConfigError("T must exceed K")
        if not (self.rho > 0 and math.isfinite(self.rho)):
            raise ConfigError("rho must be positive and finite")
        if not self.rho_max > 0:
            raise ConfigError("rho_max must be positive")
        if self.rho_max < self.rho:
            raise ConfigError("rho_max must be >= rho")
        object.__setattr__(self, "rho", float(self.rho))
        object.__setattr__(self, "rho_max", float(self.rho_max))

    @classmethod
    def from_db(cls, M, K, T, rho_db, rho_max_ratio=1.2, rho_max_db=None):
        rho = 10.0 ** (rho_db / 10.0)
        if rho_max_db is not None:
            rho_max = 10.0 ** (rho_max_db / 10.0)
        else:
            rho_max = rho_max_ratio * rho
        return cls(M=M, K=K, T=T, rho=rho, rho_max=rho_max)

    def replace(self, **changes) -> "SystemConfig":
        fields = dict(M=self.M, K=self.K, T=self.T, rho=self.rho, rho_max=self.rho_max)
        fields.update(changes)
        return SystemConfig(**fields)

    def split(self, alpha, T_d) -> "PowerSplit":
        return PowerSplit(alpha=alpha, T_d=T_d, cfg=self)


@dataclass(frozen=True)
class PowerSplit:
    """An operating point: training-energy fraction ``alpha`` and data length ``T_d``."""

    alpha: float
    T_d: float
    cfg: SystemConfig

    def __post_init__(self):
        if not 0.0 <= self.alpha <= 1.0:
            raise ConfigError(f"alpha must lie in [0, 1], got {self.alpha}")
        if not 0.0 < self.T_d < self.cfg.T:
            raise ConfigError(f"T_d must lie in (0, T), got {self.T_d}")
        object.__setattr__(self, "alpha", float(self.alpha))
        object.__setattr__(self, "T_d", float(self.T_d))

    @property
    def T_tau(self) -> float:
        return self.cfg.T - self.T_d

    @property
    def e_tau(self) -> float:
        """Total pilot energy per user, ``T_tau * rho_tau``."""
        return self.alpha * self.cfg.rho * self.cfg.T

    @property
    def rho_tau(self) -> float:
        return self.e_tau / self.T_tau

    @property
    def rho_d(self) -> float:
        return (1.0 - self.alpha) * self.cfg.rho * self.cfg.T / self.T_d

    def is_feasible(self, rtol: float = 1e-12) -> bool:
        """Check the peak-power and training-length constraints."""
        cfg = self.cfg
        slack = rtol * cfg.rho_max * cfg.T
        lhs = cfg.rho * cfg.T * self.alpha + cfg.rho_max * self.T_d
        return (
            lhs <= cfg.rho_max * cfg.T + slack
            and lhs >= cfg.rho * cfg.T - slack
            and self.T_d <= cfg.T - cfg.K + rtol * cfg.T
        )


@dataclass(frozen=True)
class SinrCoefficients:
    """Coefficients of the SINR written as a rational function of ``alpha``.

    ``a1``/``b1`` are undefined for a single user; ``gamma`` is undefined
    when ``T_d == K``.
    """

    a1: Optional[float]
    b1: Optional[float]
    gamma: Optional[float]


def sinr_mrc(e_tau, rho_d, M, K):
    """MRC effective SINR given pilot energy ``e_tau`` and data power ``rho_d``."""
    e_tau = np.asarray(e_tau, dtype=float)
    rho_d = np.asarray(rho_d, dtype=float)
    prod = e_tau * rho_d
    out = prod * (M - 1) / (prod * (K - 1) + K * rho_d + e_tau + 1.0)
    return out[()] if out.ndim == 0 else out


def sinr_zf(e_tau, rho_d, M, K):
    """ZF effective SINR; zero when ``M == K``."""
    e_tau = np.asarray(e_tau, dtype=float)
    rho_d = np.asarray(rho_d, dtype=float)
    out = e_tau * rho_d * (M - K) / (K * rho_d + e_tau + 1.0)
    return out[()] if out.ndim == 0 else out


def _substitute(alpha, T_d, cfg):
    alpha = np.asarray(alpha, dtype=float)
    T_d = np.asarray(T_d, dtype=float)
    e_tau = alpha * cfg.rho * cfg.T
    rho_d = (1.0 - alpha) * cfg.rho * cfg.T / T_d
    return e_tau, rho_d


def sinr_at(alpha, T_d, cfg: SystemConfig, rx: Receiver):
    """SINR at ``(alpha, T_d)`` through the direct power substitution (vectorized)."""
    e_tau, rho_d = _substitute(alpha, T_d, cfg)
    if Receiver.parse(rx) is Receiver.MRC:
        return sinr_mrc(e_tau, rho_d, cfg.M, cfg.K)
    return sinr_zf(e_tau, rho_d, cfg.M, cfg.K)


def rate_at(alpha, T_d, cfg: SystemConfig, rx: Receiver):
    """Sum-rate lower bound in bits/s/Hz at ``(alpha, T_d)`` (vectorized).

    ``T_d == 0`` maps to zero rate.
    """
    T_d = np.asarray(T_d, dtype=float)
    safe_td = np.where(T_d > 0, T_d, 1.0)
    sinr = sinr_at(alpha, safe_td, cfg, rx)
    out = np.where(T_d > 0, T_d / cfg.T * cfg.K * np.log2(1.0 + sinr), 0.0)
    return out[()] if out.ndim == 0 else out


def rate(split: PowerSplit, rx: Receiver) -> float:
    return float(rate_at(split.alpha, split.T_d, split.cfg, rx))


def sinr_coefficients(T_d: float, cfg: SystemConfig) -> SinrCoefficients:
    rt = cfg.rho * cfg.T
    K = cfg.K
    if K > 1:
        a1 = 1.0 + (T_d - K) / (rt * (K - 1))
        b1 = (rt * K + T_d) / (rt * rt * (K - 1))
    else:
        a1 = b1 = None
    gamma = (K * rt + T_d) / (rt * (T_d - K)) if T_d != K else None
    return SinrCoefficients(a1=a1, b1=b1, gamma=gamma)


def sinr_mrc_alpha(alpha, T_d: float, cfg: SystemConfig):
    """MRC SINR in the rational-in-alpha form ``(M-1)/(K-1) * a(a-1)/(a^2 - a1 a - b1)``."""
    if cfg.K == 1:
        raise ConfigError("the alpha-rational MRC form needs K >= 2")
    co = sinr_coefficients(T_d, cfg)
    alpha = np.asarray(alpha, dtype=float)
    out = (cfg.M - 1) / (cfg.K - 1) * alpha * (alpha - 1.0) / (alpha * alpha - co.a1 * alpha - co.b1)
    return out[()] if out.ndim == 0 else out


def sinr_zf_alpha(alpha, T_d: float, cfg: SystemConfig):
    # The gamma-rational form is 0/0 at T_d == K; the direct form is not.
    return sinr_at(alpha, T_d, cfg, Receiver.ZF)


def sinr_zf_alpha_rational(alpha, T_d: float, cfg: SystemConfig):
    """ZF SINR as ``T rho (M-K) a(1-a) / ((T_d-K)(gamma+a))``; undefined at ``T_d == K``."""
    co = sinr_coefficients(T_d, cfg)
    if co.gamma is None:
        raise ConfigError("the gamma form of the ZF SINR is singular at T_d == K")
    alpha = np.asarray(alpha, dtype=float)
    out = (cfg.T * cfg.rho * (cfg.M - cfg.K) * alpha * (1.0 - alpha)
           / ((T_d - cfg.K) * (co.gamma + alpha)))
    return out[()] if out.ndim == 0 else out


def energy_efficiency(rate_value, rho):
    """Rate per unit average power, in bits/s/Hz per linear power unit."""
    if not rho > 0:
        raise ValueError("rho must be positive")
    return rate_value / rho
