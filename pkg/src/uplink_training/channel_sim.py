"""Monte Carlo link-level simulation of pilot training and linear combining.

Every trial owns a fixed block of a Philox counter stream keyed by the
seed, so a trial's draws depend only on ``(seed, trial index)``. Batching
is purely a memory knob: any partition of the trials produces the same
per-trial values.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator

import numpy as np

from .sinr_model import ConfigError, PowerSplit, Receiver, SystemConfig

# uniforms per Philox counter increment
_BLOCK = 4
_BOOTSTRAP = 200
# Gram matrices above this condition number are treated as rank deficient
_COND_LIMIT = 1e12


@dataclass(frozen=True)
class MonteCarloSpec:
    trials: int = 10_000
    seed: int = 0
    symbols_per_trial: int = 4
    batch: int = 2_000

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if self.symbols_per_trial < 1:
            raise ValueError("symbols_per_trial must be >= 1")
        if self.batch < 1:
            raise ValueError("batch must be >= 1")
        if not 0 <= self.seed < 2 ** 64:
            raise ValueError("seed must fit in 64 bits")


@dataclass
class ChannelRealization:
    """A batch of channel draws; arrays have shape ``(trials, M, K)``."""

    H: np.ndarray
    H_hat: np.ndarray

    @property
    def E(self) -> np.ndarray:
        return self.H - self.H_hat


@dataclass(frozen=True)
class SinrEstimate:
    sinr: float
    stderr: float
    trials: int
    resampled: int


@dataclass(frozen=True)
class RateEstimate:
    rate: float
    stderr: float
    sinr: SinrEstimate


def pilot_matrix(K: int, length: int) -> np.ndarray:
    """First ``K`` rows of the unitary DFT of size ``length``; rows are orthonormal."""
    if length < K:
        raise ConfigError(f"pilot length {length} is shorter than K={K}")
    k = np.arange(K)[:, None]
    t = np.arange(length)[None, :]
    return np.exp(-2j * np.pi * k * t / length) / np.sqrt(length)


def pilot_length(split: PowerSplit) -> int:
    # a fractional training length is simulated at the nearest integer with the same pilot energy
    length = int(round(split.T_tau))
    if length < split.cfg.K:
        raise ConfigError(f"training length {split.T_tau} is shorter than K={split.cfg.K}")
    return length


class _Layout:
    """Per-trial slice map into the uniform block: H, N, x, n (two uniforms per complex)."""

    def __init__(self, M, K, L, S):
        sizes = {"H": M * K, "N": M * L, "x": K * S, "n": M * S}
        self.shapes = {"H": (M, K), "N": (M, L), "x": (K, S), "n": (M, S)}
        self.slices = {}
        pos = 0
        for name, size in sizes.items():
            self.slices[name] = slice(pos, pos + 2 * size)
            pos += 2 * size
        self.width = -(-pos // _BLOCK) * _BLOCK

    def complex_normal(self, u, name):
        part = u[:, self.slices[name]]
        half = part.shape[1] // 2
        radius = np.sqrt(-np.log1p(-part[:, :half]))
        z = radius * np.exp(2j * np.pi * part[:, half:])
        return z.reshape((u.shape[0],) + self.shapes[name])


def _uniforms(key, first_trial, count, width):
    bitgen = np.random.Philox(key=key)
    bitgen.advance(first_trial * (width // _BLOCK))
    return np.random.Generator(bitgen).random((count, width))


def _batches(split: PowerSplit, spec: MonteCarloSpec) -> Iterator[tuple]:
    cfg = split.cfg
    L = pilot_length(split)
    layout = _Layout(cfg.M, cfg.K, L, spec.symbols_per_trial)
    phi = pilot_matrix(cfg.K, L)
    e_tau = split.e_tau
    scale = math.sqrt(e_tau) / (e_tau + 1.0)
    for start in range(0, spec.trials, spec.batch):
        count = min(spec.batch, spec.trials - start)
        u = _uniforms(spec.seed, start, count, layout.width)
        H = layout.complex_normal(u, "H")
        N = layout.complex_normal(u, "N")
        Y = math.sqrt(e_tau) * (H @ phi) + N
        H_hat = scale * (Y @ phi.conj().T)
        yield start, ChannelRealization(H=H, H_hat=H_hat), layout, u


def simulate_training(split: PowerSplit, spec: MonteCarloSpec) -> Iterator[ChannelRealization]:
    """Yield batches of true channels and their MMSE estimates from orthogonal pilots."""
    for _, real, _, _ in _batches(split, spec):
        yield real


def _resample_channel(split, spec, trial, attempt, layout, phi):
    # rank-deficient draws are replaced from a side stream keyed by the attempt number
    u = _uniforms([spec.seed, attempt + 1], trial, 1, layout.width)
    H = layout.complex_normal(u, "H")
    N = layout.complex_normal(u, "N")
    e_tau = split.e_tau
    H_hat = math.sqrt(e_tau) / (e_tau + 1.0) * ((math.sqrt(e_tau) * (H @ phi) + N) @ phi.conj().T)
    return H[0], H_hat[0]


def _combiner(H_hat, rx, rho_d):
    Hh = np.conj(np.swapaxes(H_hat, -1, -2))
    if rx is Receiver.MRC:
        return Hh, np.zeros(H_hat.shape[0], dtype=bool)
    gram = Hh @ H_hat
    bad = np.linalg.cond(gram) > _COND_LIMIT
    G = np.zeros_like(Hh)
    ok = ~bad
    if ok.any():
        G[ok] = np.linalg.solve(gram[ok], Hh[ok]) / math.sqrt(rho_d)
    return G, bad


def _trial_ratios(split: PowerSplit, rx: Receiver, spec: MonteCarloSpec):
    """Per-trial residual-to-desired power ratio averaged over users, plus desired/residual powers."""
    cfg = split.cfg
    rho_d = split.rho_d
    ratios = np.empty(spec.trials)
    desired = np.empty(spec.trials)
    residual = np.empty(spec.trials)
    resampled = 0
    phi = None
    for start, real, layout, u in _batches(split, spec):
        H, H_hat = real.H, real.H_hat
        G, bad = _combiner(H_hat, rx, rho_d)
        if bad.any():
            if phi is None:
                phi = pilot_matrix(cfg.K, pilot_length(split))
            H = H.copy()
            H_hat = H_hat.copy()
            for i in np.nonzero(bad)[0]:
                attempt = 0
                while True:
                    resampled += 1
                    H[i], H_hat[i] = _resample_channel(split, spec, start + i, attempt, layout, phi)
                    g, b = _combiner(H_hat[i:i + 1], rx, rho_d)
                    if not b[0]:
                        G[i] = g[0]
                        break
                    attempt += 1
        x = layout.complex_normal(u, "x")
        n = layout.complex_normal(u, "n")
        y = math.sqrt(rho_d) * (H @ x) + n
        x_hat = G @ y
        coeff = math.sqrt(rho_d) * np.diagonal(G @ H_hat, axis1=-2, axis2=-1)
        resid = x_hat - coeff[..., None] * x
        p_des = np.abs(coeff) ** 2
        p_res = np.mean(np.abs(resid) ** 2, axis=-1)
        stop = start + H.shape[0]
        ratios[start:stop] = np.mean(p_res / p_des, axis=-1)
        desired[start:stop] = np.mean(p_des, axis=-1)
        residual[start:stop] = np.mean(p_res, axis=-1)
    return ratios, desired, residual, resampled


def empirical_sinr(split: PowerSplit, rx, spec: MonteCarloSpec, aggregate: str = "inverse_mean") -> SinrEstimate:
    """Estimate the effective SINR of ``rx`` by simulation.

    Conditioned on the estimate, user k's desired term is the k-th diagonal
    entry of ``G H_hat`` (times ``sqrt(rho_d)``); everything else in the
    combiner output, including the estimation-error leakage, is residual.

    aggregate
        ``"inverse_mean"`` returns ``1 / mean(residual / desired)``, the
        quantity the closed-form SINRs equal in expectation.
        ``"ratio_of_means"`` returns ``mean(desired) / mean(residual)``,
        which overstates the closed form by roughly ``(M+1)/(M-1)`` for MRC.
    """
    rx = Receiver.parse(rx)
    if aggregate not in ("inverse_mean", "ratio_of_means"):
        raise ValueError(f"unknown aggregate {aggregate!r}")
    if split.rho_d == 0.0 or split.e_tau == 0.0:
        pilot_length(split)
        return SinrEstimate(0.0, 0.0, spec.trials, 0)
    ratios, desired, residual, resampled = _trial_ratios(split, rx, spec)

    if aggregate == "inverse_mean":
        def stat(idx):
            return 1.0 / np.mean(ratios[idx], axis=-1)
    else:
        def stat(idx):
            return np.mean(desired[idx], axis=-1) / np.mean(residual[idx], axis=-1)

    value = float(stat(slice(None)))
    boot = np.random.Generator(np.random.Philox(key=[spec.seed, 2 ** 63]))
    draws = np.empty(_BOOTSTRAP)
    for b in range(_BOOTSTRAP):
        draws[b] = stat(boot.integers(0, spec.trials, spec.trials))
    stderr = float(np.std(draws, ddof=1)) if spec.trials > 1 else math.inf
    return SinrEstimate(value, stderr, spec.trials, resampled)


def empirical_rate(split: PowerSplit, rx, spec: MonteCarloSpec) -> RateEstimate:
    """Sum-rate bound from the simulated SINR; standard error by the delta method."""
    cfg = split.cfg
    est = empirical_sinr(split, rx, spec)
    factor = split.T_d / cfg.T * cfg.K
    value = factor * math.log2(1.0 + est.sinr)
    stderr = factor * est.stderr / ((1.0 + est.sinr) * math.log(2.0))
    return RateEstimate(value, stderr, est)


@dataclass(frozen=True)
class EstimationMoments:
    """Sample moments of channel-estimate entries with their standard errors."""

    var_hat: float
    var_hat_se: float
    var_err: float
    var_err_se: float
    cross: float
    cross_se: float
    samples: int


def estimation_moments(split: PowerSplit, spec: MonteCarloSpec) -> EstimationMoments:
    """Per-entry variance of the estimate and of the error, and their cross moment.

    The MMSE estimate should give ``e/(e+1)``, ``1/(e+1)`` and zero with
    ``e = T_tau rho_tau``.
    """
    hat2, err2, cross = [], [], []
    for real in simulate_training(split, spec):
        hat2.append(np.abs(real.H_hat.ravel()) ** 2)
        err2.append(np.abs(real.E.ravel()) ** 2)
        cross.append(np.real(real.H_hat.ravel() * np.conj(real.E.ravel())))
    hat2 = np.concatenate(hat2)
    err2 = np.concatenate(err2)
    cross = np.concatenate(cross)
    n = hat2.size

    def se(v):
        return float(np.std(v, ddof=1) / math.sqrt(n)) if n > 1 else math.inf

    return EstimationMoments(
        var_hat=float(np.mean(hat2)), var_hat_se=se(hat2),
        var_err=float(np.mean(err2)), var_err_se=se(err2),
        cross=float(np.mean(cross)), cross_se=se(cross),
        samples=n,
    )
