"""Parameter-space studies: stability regions, minimal horizons, m-sweeps.

The (C, σ) stability-region grid is the hot loop of this module (hundreds of
thousands of closed-form evaluations per figure), so it runs through a numba
kernel, with a vectorized numpy twin as the fallback backend. Both paths
implement the same γ-product formula and are pinned against
:func:`alphacore.alpha_closed_form` in the tests.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from ._accel import NUMBA_ENABLED, maybe_njit, thread_count
from .alphacore import AlphaQuery, InvalidQuery, alpha_closed_form, alpha_onestep
from .kl0 import Kl0Beta

__all__ = [
    "RegionGrid",
    "HorizonSearchResult",
    "HALF_N",
    "stability_region",
    "region_area",
    "min_stabilizing_horizon",
    "asymptotic_bounds",
    "alpha_star",
    "m_sweep",
    "default_region_axes",
]

HALF_N = "half"

DEFAULT_C_RANGE = (1.0, 20.0)
DEFAULT_SIGMA_RANGE = (0.01, 0.99)
DEFAULT_RESOLUTION = 400


@dataclass(frozen=True)
class RegionGrid:
    C_axis: np.ndarray
    sigma_axis: np.ndarray
    N: int
    m: int
    omega: float
    cells: np.ndarray        # alpha values, shape (len(C_axis), len(sigma_axis))
    stable_mask: np.ndarray  # cells >= 0


@dataclass(frozen=True)
class HorizonSearchResult:
    gamma: float
    omega: float
    m_rule: object  # int for a fixed control horizon, HALF_N for m = floor(N/2)
    N_min: int
    bound_value: float  # analytic lower bound on N (NaN if none is stated for the rule)
    alpha_at_min: float


@maybe_njit(cache=True, nogil=True)
def _alpha_exp_cell(C, s, N, m, omega):  # pragma: no cover - via grid kernel
    g = np.empty(N)
    run = 0.0
    c = C
    for k in range(N):
        g[k] = run + omega * c
        run += c
        c *= s
    gm1 = g[m]
    if gm1 <= omega:
        return 1.0
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
    if d1 <= 1e-14 or d2 <= 1e-14:
        return np.nan
    return 1.0 - (gm1 - omega) * p1 * p2 / (d1 * d2)


@maybe_njit(cache=True, nogil=True)
def _alpha_exp_block(C_axis, s_axis, N, m, omega, out):  # pragma: no cover
    for a in range(C_axis.size):
        for b in range(s_axis.size):
            out[a, b] = _alpha_exp_cell(C_axis[a], s_axis[b], N, m, omega)


def _alpha_exp_grid_numpy(C_axis, s_axis, N, m, omega):
    """Vectorized twin of the numba kernel (pure-numpy backend)."""
    C = C_axis[:, None]
    s = s_axis[None, :]
    shape = (C_axis.size, s_axis.size)
    g = np.empty((N,) + shape)
    run = np.zeros(shape)
    c = np.broadcast_to(C, shape).copy()
    for k in range(N):
        g[k] = run + omega * c
        run = run + c
        c = c * s
    gm1 = g[m]
    p1 = np.ones(shape)
    for i in range(m + 2, N + 1):
        p1 *= g[i - 1] - 1.0
    q1 = np.ones(shape)
    for i in range(m + 1, N + 1):
        q1 *= g[i - 1]
    p2 = np.ones(shape)
    q2 = np.ones(shape)
    for i in range(N - m + 1, N + 1):
        p2 *= g[i - 1] - 1.0
        q2 *= g[i - 1]
    d1 = q1 - (gm1 - omega) * p1
    d2 = q2 - p2
    with np.errstate(divide="ignore", invalid="ignore"):
        val = 1.0 - (gm1 - omega) * p1 * p2 / (d1 * d2)
    val = np.where((d1 <= 1e-14) | (d2 <= 1e-14), np.nan, val)
    return np.where(gm1 <= omega, 1.0, val)


def default_region_axes(resolution: int = DEFAULT_RESOLUTION):
    C_axis = np.linspace(*DEFAULT_C_RANGE, resolution)
    s_axis = np.linspace(*DEFAULT_SIGMA_RANGE, resolution)
    return C_axis, s_axis


def stability_region(N: int, m: int, omega: float = 1.0,
                     C_axis=None, sigma_axis=None) -> RegionGrid:
    """α over a (C, σ) grid of exponential bounds; stable where α ≥ 0."""
    if C_axis is None or sigma_axis is None:
        dC, ds = default_region_axes()
        C_axis = dC if C_axis is None else C_axis
        sigma_axis = ds if sigma_axis is None else sigma_axis
    C_axis = np.ascontiguousarray(C_axis, float)
    sigma_axis = np.ascontiguousarray(sigma_axis, float)
    if C_axis.ndim != 1 or sigma_axis.ndim != 1 or not C_axis.size or not sigma_axis.size:
        raise InvalidQuery("axes must be nonempty 1-d arrays")
    if np.any(np.diff(C_axis) <= 0) or np.any(np.diff(sigma_axis) <= 0):
        raise InvalidQuery("axes must be strictly increasing")
    if C_axis[0] < 1.0 or sigma_axis[0] <= 0.0 or sigma_axis[-1] >= 1.0:
        raise InvalidQuery("need C >= 1 and sigma in (0, 1)")
    if N < 2 or not 1 <= m <= N - 1 or omega < 1.0:
        raise InvalidQuery(f"bad (N, m, omega) = ({N}, {m}, {omega})")

    cells = np.empty((C_axis.size, sigma_axis.size))
    workers = thread_count()
    if NUMBA_ENABLED:
        if workers > 1 and C_axis.size >= 2 * workers:
            chunks = np.array_split(np.arange(C_axis.size), workers)
            with ThreadPoolExecutor(max_workers=workers) as pool:
                futs = [
                    pool.submit(_alpha_exp_block, C_axis[ch], sigma_axis,
                                N, m, omega, cells[ch[0]: ch[-1] + 1])
                    for ch in chunks if ch.size
                ]
                for f in futs:
                    f.result()
        else:
            _alpha_exp_block(C_axis, sigma_axis, N, m, omega, cells)
    else:
        cells[:] = _alpha_exp_grid_numpy(C_axis, sigma_axis, N, m, omega)
    with np.errstate(invalid="ignore"):
        mask = cells >= 0.0
    return RegionGrid(C_axis=C_axis, sigma_axis=sigma_axis, N=N, m=m,
                      omega=float(omega), cells=cells, stable_mask=mask)


def region_area(grid: RegionGrid) -> float:
    """Riemann-sum stability area: stable-cell fraction times the axes rectangle."""
    rect = (grid.C_axis[-1] - grid.C_axis[0]) * (grid.sigma_axis[-1] - grid.sigma_axis[0])
    return float(np.mean(grid.stable_mask) * rect)


def _scan_start(m_rule, gamma, omega):
    if m_rule == HALF_N:
        return 2
    return max(2, int(m_rule) + 1)


def _alpha_for_rule(gamma, N, m_rule, omega):
    m = N // 2 if m_rule == HALF_N else int(m_rule)
    return alpha_onestep(gamma, N, m, omega), m


def min_stabilizing_horizon(gamma: float, omega: float = 1.0,
                            m_rule=1, N_cap: int = 2_000_000) -> HorizonSearchResult:
    """Smallest N with α ≥ 0 for the one-step bound (c_0 = γ), found by scan.

    m_rule is a fixed control horizon (int) or HALF_N for m = ⌊N/2⌋. The
    analytic bound_value accompanies the scan for m_rule 1 (log formula) and
    HALF_N (even/odd formula matching the parity of the found N); other fixed
    horizons have no stated bound and report NaN.
    """
    if gamma <= 0:
        raise InvalidQuery(f"gamma must be positive, got {gamma}")
    if omega < 1.0:
        raise InvalidQuery(f"omega must be >= 1, got {omega}")
    if m_rule != HALF_N and int(m_rule) < 1:
        raise InvalidQuery(f"fixed control horizon must be >= 1, got {m_rule}")

    N = _scan_start(m_rule, gamma, omega)
    if gamma <= omega:
        return HorizonSearchResult(gamma=gamma, omega=omega, m_rule=m_rule,
                                   N_min=N, bound_value=float("nan"), alpha_at_min=1.0)
    while N <= N_cap:
        a, _ = _alpha_for_rule(gamma, N, m_rule, omega)
        if a >= 0.0:
            return HorizonSearchResult(
                gamma=gamma, omega=omega, m_rule=m_rule, N_min=N,
                bound_value=_analytic_bound(gamma, omega, m_rule, N), alpha_at_min=a)
        N += 1
    raise InvalidQuery(f"no stabilizing horizon found below cap {N_cap}")


def _analytic_bound(gamma, omega, m_rule, N_found):
    denom = math.log(gamma) - math.log(gamma - 1.0)
    if m_rule == 1:
        return 2.0 + math.log(gamma - omega) / denom
    if m_rule == HALF_N:
        if N_found % 2 == 0:
            return 2.0 * math.log((2 * gamma - omega - 1.0) / (gamma - 1.0)) / denom
        return (math.log((2 * gamma - omega) / gamma)
                + math.log((2 * gamma - omega) / (gamma - 1.0))) / denom
    return float("nan")


def asymptotic_bounds(gamma: float, omega: float = 1.0, m_rule=1) -> float:
    """Large-γ growth of the minimal horizon: γ·ln γ for m = 1, 2·ln2·γ for m = ⌊N/2⌋."""
    if gamma <= max(omega, 1.0):
        raise InvalidQuery(f"need gamma > max(omega, 1), got gamma={gamma}, omega={omega}")
    if m_rule == HALF_N:
        return 2.0 * math.log(2.0) * gamma
    if int(m_rule) == 1:
        return gamma * math.log(gamma)
    raise InvalidQuery(f"no asymptotic expression for fixed m = {m_rule}")


def alpha_star(beta: Kl0Beta, N: int, M, omega: float = 1.0) -> float:
    """min over the admissible control-horizon set M of α_{N,m}^ω."""
    ms = sorted(set(int(m) for m in M))
    if not ms:
        raise InvalidQuery("M must be nonempty")
    if ms[0] < 1 or ms[-1] > N - 1:
        raise InvalidQuery(f"M must lie inside [1, N-1], got {ms}")
    return min(alpha_closed_form(AlphaQuery(beta, N, m, omega)).alpha for m in ms)


def m_sweep(beta: Kl0Beta, N: int, omega: float = 1.0) -> list[tuple[int, float]]:
    """(m, α) for every admissible control horizon m = 1..N−1."""
    return [(m, alpha_closed_form(AlphaQuery(beta, N, m, omega)).alpha)
            for m in range(1, N)]
