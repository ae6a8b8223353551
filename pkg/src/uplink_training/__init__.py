"""Optimal pilot training energy and duration for uplink MU-MIMO with MRC / ZF receivers."""

from .alpha_solver import (
    FeasibleInterval,
    FixedTdSolution,
    alpha_star_mrc_unconstrained,
    alpha_star_unconstrained,
    alpha_star_zf_unconstrained,
    feasible_alpha,
    solve_fixed_td,
)
from .channel_sim import (
    MonteCarloSpec,
    RateEstimate,
    SinrEstimate,
    empirical_rate,
    empirical_sinr,
    estimation_moments,
    simulate_training,
)
from .grid_oracle import GridSpec, grid_argmax, grid_argmax_fixed_td
from .joint_solver import (
    CaseLabel,
    CaseThresholds,
    OptimizationResult,
    case1_line_rate,
    equal_power,
    optimize,
    optimize_integer,
    optimize_unconstrained,
    search_case1,
    thresholds,
)
from .sinr_model import (
    ConfigError,
    PowerSplit,
    Receiver,
    SinrCoefficients,
    SystemConfig,
    energy_efficiency,
    rate,
    rate_at,
    sinr_mrc,
    sinr_mrc_alpha,
    sinr_zf,
    sinr_zf_alpha,
)

__version__ = "0.1.0"
