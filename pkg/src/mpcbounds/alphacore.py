"""Closed-form evaluation of the multistep-MPC suboptimality index α_{N,m}^ω.

α certifies how much of the infinite-horizon optimal performance a receding
horizon controller retains when it optimizes over N steps, applies m of them,
and weights the final stage cost by ω. α = 1 exactly when ω ≥ γ_{m+1}
(saturation); otherwise a ratio of γ-products gives the exact optimum of the
underlying linear program, valid whenever the controllability bound is
submultiplicative.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from .kl0 import Kl0Beta, check_submultiplicative, gamma_table

__all__ = [
    "AlphaQuery",
    "AlphaResult",
    "InvalidQuery",
    "DegenerateDenominator",
    "alpha_closed_form",
    "alpha_c1_special",
    "alpha_onestep_finite",
]

# Below this, a denominator factor carries no significant digits.
DENOM_TOL = 1e-14
# Log-space product path kicks in past these (overflow guard on long sweeps).
_LOG_FACTOR_LIMIT = 1e3
_LOG_N_LIMIT = 40

CLOSED_FORM = "closed_form"
LP_ORACLE = "lp_oracle"


class InvalidQuery(ValueError):
    """Query outside the admissible (N, m, ω) / β domain."""


class DegenerateDenominator(ArithmeticError):
    """A denominator factor of the α formula is nonpositive or below tolerance."""


@dataclass(frozen=True)
class AlphaQuery:
    beta: Kl0Beta
    N: int
    m: int
    omega: float = 1.0

    def __post_init__(self):
        if self.N < 2:
            raise InvalidQuery(f"N must be >= 2, got {self.N}")
        if not 1 <= self.m <= self.N - 1:
            raise InvalidQuery(f"m must lie in [1, N-1] = [1, {self.N - 1}], got {self.m}")
        if self.omega < 1.0:
            raise InvalidQuery(f"omega must be >= 1, got {self.omega}")


@dataclass(frozen=True)
class AlphaResult:
    alpha: float
    saturated: bool
    method: str
    lower_bound_only: bool = False


def _plain_alpha(g, N, m, omega):
    # g is 0-indexed: g[k-1] = gamma_k
    gm1 = g[m]
    p1 = 1.0
    for i in range(m + 2, N + 1):
        p1 *= g[i - 1] - 1.0
    q1 = 1.0
    for i in range(m + 1, N + 1):
        q1 *= g[i - 1]
    p2 = 1.0
    q2 = 1.0
    for i in range(N - m + 1, N + 1):
        p2 *= g[i - 1] - 1.0
        q2 *= g[i - 1]
    d1 = q1 - (gm1 - omega) * p1
    d2 = q2 - p2
    if d1 <= DENOM_TOL or d2 <= DENOM_TOL:
        raise DegenerateDenominator(
            f"denominator factors ({d1:.3e}, {d2:.3e}) below tolerance {DENOM_TOL}"
        )
    return 1.0 - (gm1 - omega) * p1 * p2 / (d1 * d2)


def _log_alpha(g, N, m, omega):
    # All factors positive here; work with ratios of log-products so that
    # horizons in the thousands neither overflow nor lose the leading digits.
    gm1 = g[m]
    log_p1 = 0.0
    log_q1 = 0.0
    for i in range(m + 1, N + 1):
        log_q1 += math.log(g[i - 1])
        if i >= m + 2:
            log_p1 += math.log(g[i - 1] - 1.0)
    log_p2 = 0.0
    log_q2 = 0.0
    for i in range(N - m + 1, N + 1):
        log_p2 += math.log(g[i - 1] - 1.0)
        log_q2 += math.log(g[i - 1])
    r1 = math.exp(math.log(gm1 - omega) + log_p1 - log_q1)
    r2 = math.exp(log_p2 - log_q2)
    om_r1 = 1.0 - r1
    om_r2 = 1.0 - r2
    # d1 = q1*(1-r1): in log form the absolute threshold is log_q1 + log(1-r1).
    if om_r1 <= 0.0 or om_r2 <= 0.0 or \
            log_q1 + math.log(om_r1) < math.log(DENOM_TOL) or \
            log_q2 + math.log(om_r2) < math.log(DENOM_TOL):
        raise DegenerateDenominator("denominator factor below tolerance in log-space path")
    return 1.0 - r1 * r2 / (om_r1 * om_r2)


def alpha_from_gammas(gammas, N: int, m: int, omega: float) -> float:
    """Formula branch on a precomputed γ_1..γ_N sequence (no saturation test)."""
    g = list(gammas)
    factors_pos = all(g[i - 1] > 1.0 for i in range(min(m + 2, N - m + 1), N + 1))
    big = any(g[i - 1] > _LOG_FACTOR_LIMIT for i in range(m + 1, N + 1))
    if factors_pos and (big or N > _LOG_N_LIMIT):
        return _log_alpha(g, N, m, omega)
    return _plain_alpha(g, N, m, omega)


def alpha_closed_form(q: AlphaQuery, allow_non_submultiplicative: bool = False) -> AlphaResult:
    """Exact suboptimality index for a linear controllability bound.

    Saturation (γ_{m+1} ≤ ω, exact comparison; ties saturate) returns α = 1
    without touching the product formula. Otherwise the bound must be
    submultiplicative over the horizon for the value to be the true optimum;
    with ``allow_non_submultiplicative`` the formula value is still returned,
    capped at 1 and flagged ``lower_bound_only``.
    """
    gt = gamma_table(q.beta, q.N, q.omega)
    if gt[q.m + 1] <= q.omega:
        return AlphaResult(alpha=1.0, saturated=True, method=CLOSED_FORM)
    lower_bound_only = False
    if not check_submultiplicative(q.beta, q.N):
        if not allow_non_submultiplicative:
            raise InvalidQuery(
                "beta is not submultiplicative over the horizon; the closed form is "
                "only a lower bound (pass allow_non_submultiplicative=True to get it)"
            )
        lower_bound_only = True
    val = alpha_from_gammas(gt.gammas, q.N, q.m, q.omega)
    if lower_bound_only:
        val = min(1.0, val)
    return AlphaResult(alpha=val, saturated=False, method=CLOSED_FORM,
                       lower_bound_only=lower_bound_only)


def alpha_c1_special(sigma: float, N: int, omega: float = 1.0) -> float:
    """α for exponential bounds with no overshoot (C = 1): min{1, 1 − (1+σω−ω)σ^{N−1}}.

    Independent of the control horizon m; always positive.
    """
    if not 0.0 < sigma < 1.0:
        raise InvalidQuery(f"sigma must lie in (0, 1), got {sigma}")
    if N < 2:
        raise InvalidQuery(f"N must be >= 2, got {N}")
    if omega < 1.0:
        raise InvalidQuery(f"omega must be >= 1, got {omega}")
    eta = 1.0 + sigma * omega - omega
    return min(1.0, 1.0 - eta * sigma ** (N - 1))


def alpha_onestep(gamma: float, N: int, m: int, omega: float = 1.0) -> float:
    """α for one-step finite-time bounds (c_0 = γ, c_n = 0 beyond), any m.

    Evaluated with every power expressed through ρ = (γ−1)/γ ∈ (0,1), i.e.
    numerator and denominator divided by γ^N, so horizon scans into the
    thousands stay inside float range.
    """
    if gamma <= 0:
        raise InvalidQuery(f"gamma must be positive, got {gamma}")
    if N < 2 or not 1 <= m <= N - 1:
        raise InvalidQuery(f"need N >= 2 and 1 <= m <= N-1, got N={N}, m={m}")
    if omega < 1.0:
        raise InvalidQuery(f"omega must be >= 1, got {omega}")
    if gamma <= omega:
        return 1.0
    rho = (gamma - 1.0) / gamma
    t1 = 1.0 - (gamma - omega) / gamma * rho ** (N - m - 1)
    t2 = 1.0 - rho**m
    if t1 <= DENOM_TOL or t2 <= DENOM_TOL:
        raise DegenerateDenominator("one-step denominator below tolerance")
    return 1.0 - (gamma - omega) / gamma * rho ** (N - 1) / (t1 * t2)


def alpha_onestep_finite(gamma: float, N: int, omega: float = 1.0) -> float:
    """Classical-MPC (m = 1) specialization of :func:`alpha_onestep`."""
    return alpha_onestep(gamma, N, 1, omega)
