"""Suboptimality bounds and horizon analysis for multistep MPC.

Computes the closed-form performance index α_{N,m}^ω for systems whose stage
costs admit a controllability bound linear in the initial cost, cross-checks
it against an explicit LP formulation, studies its dependence on the
optimization horizon N, the control horizon m, and the terminal weight ω,
and verifies the bounds empirically with a multistep MPC simulator.
"""
from ._accel import NUMBA_ENABLED, backend_name
from .alphacore import (
    AlphaQuery,
    AlphaResult,
    DegenerateDenominator,
    InvalidQuery,
    alpha_c1_special,
    alpha_closed_form,
    alpha_onestep,
    alpha_onestep_finite,
)
from .horizon import (
    HALF_N,
    HorizonSearchResult,
    RegionGrid,
    alpha_star,
    asymptotic_bounds,
    default_region_axes,
    m_sweep,
    min_stabilizing_horizon,
    region_area,
    stability_region,
)
from .kl0 import GammaTable, Kl0Beta, check_submultiplicative, eval_beta, gamma_table
from .lp import LpSolution, LpTableau, NumericalBreakdown, SizeExceeded
from .lp import solve as lp_solve
from .oracle import (
    FULL,
    REDUCED,
    RELAXED,
    ActiveSetReport,
    AlphaLpInstance,
    OracleInfeasible,
    active_set_report,
    alpha_lp,
    build_alpha_lp,
)
from .sim import (
    HorizonSchedule,
    LyapunovReport,
    MpcRun,
    NoValidSegments,
    estimate_alpha,
    lyapunov_check,
    phi,
    run_mpc,
    sigma,
    verify_controllability_example,
)
from .systems import (
    BackendUnavailable,
    OcpInfeasible,
    OcpSolution,
    SystemModel,
    custom_system,
    discretize_linear,
    inverted_pendulum,
    linear_l1_system,
    rk4_step,
    sampled_data_system,
    scalar_cubic_system,
    solve_ocp,
)

__version__ = "0.1.0"
