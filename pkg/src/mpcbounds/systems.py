"""Discrete-time plant models and finite-horizon optimal control backends.

Two OCP backends sit behind one entry point:

  * linear dynamics with 1-norm stage costs solve exactly as a linear program
    (every absolute value split into a positive/negative pair, dynamics as
    equality rows) on the in-house simplex;
  * anything else enumerates a user-supplied finite control grid exhaustively,
    with an optional Powell polish over the continuous control box.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import lp

__all__ = [
    "SystemModel",
    "OcpSolution",
    "OcpInfeasible",
    "BackendUnavailable",
    "linear_l1_system",
    "custom_system",
    "inverted_pendulum",
    "scalar_cubic_system",
    "discretize_linear",
    "solve_ocp",
]

LINEAR_L1 = "linear_l1"
CUSTOM = "custom"

MAX_ENUM_SEQUENCES = 300_000


class OcpInfeasible(Exception):
    pass


class BackendUnavailable(Exception):
    pass


@dataclass(frozen=True)
class SystemModel:
    """Immutable plant description; shareable across runs and threads."""

    name: str
    kind: str
    state_dim: int
    control_dim: int
    step: Callable
    stage_cost: Callable
    control_bounds: tuple | None = None  # (lo, hi) arrays, entries may be +-inf
    A: np.ndarray | None = None
    B: np.ndarray | None = None
    q: np.ndarray | None = None
    r: np.ndarray | None = None
    control_grid: tuple[float, ...] | None = field(default=None)


@dataclass(frozen=True)
class OcpSolution:
    controls: np.ndarray  # (N, control_dim)
    value: float
    method: str
    certified: bool  # True for the exact backends (LP, full enumeration)


def linear_l1_system(A, B, q, r, control_bounds=None, name="linear_l1") -> SystemModel:
    """x⁺ = A x + B u with stage cost ‖diag(q)·x‖₁ + ‖diag(r)·u‖₁."""
    A = np.asarray(A, float)
    B = np.asarray(B, float)
    nx = A.shape[0]
    B = B.reshape(nx, -1)
    nu = B.shape[1]
    q = np.broadcast_to(np.asarray(q, float), (nx,)).copy()
    r = np.broadcast_to(np.asarray(r, float), (nu,)).copy()
    if np.any(q < 0) or np.any(r < 0):
        raise ValueError("cost weights must be nonnegative")

    def step(x, u):
        return A @ x + B @ u

    def stage_cost(x, u):
        return float(q @ np.abs(x) + r @ np.abs(u))

    return SystemModel(name=name, kind=LINEAR_L1, state_dim=nx, control_dim=nu,
                       step=step, stage_cost=stage_cost, control_bounds=control_bounds,
                       A=A, B=B, q=q, r=r)


def custom_system(step, stage_cost, state_dim, control_dim,
                  control_grid=None, control_bounds=None, name="custom") -> SystemModel:
    grid = tuple(float(u) for u in control_grid) if control_grid is not None else None
    return SystemModel(name=name, kind=CUSTOM, state_dim=state_dim, control_dim=control_dim,
                       step=step, stage_cost=stage_cost, control_bounds=control_bounds,
                       control_grid=grid)


def discretize_linear(Ac, Bc, T, tol=1e-12):
    """Zero-order-hold discretization by truncated exponential series.

    Ad = e^{Ac T}, Bd = (∫₀ᵀ e^{Ac s} ds) Bc, both series stopped once the
    running term drops below tol relative to the accumulated matrix.
    """
    Ac = np.asarray(Ac, float)
    Bc = np.asarray(Bc, float).reshape(Ac.shape[0], -1)
    n = Ac.shape[0]
    Ad = np.eye(n)
    term = np.eye(n)
    j = 1
    while True:
        term = term @ (Ac * T) / j
        Ad = Ad + term
        if np.abs(term).max() <= tol * max(1.0, np.abs(Ad).max()):
            break
        j += 1
        if j > 200:
            raise ArithmeticError("exponential series failed to converge")
    S = np.eye(n) * T
    term = np.eye(n)
    j = 1
    while True:
        term = term @ Ac
        add = term * T ** (j + 1) / math.factorial(j + 1)
        S = S + add
        if np.abs(add).max() <= tol * max(1.0, np.abs(S).max()):
            break
        j += 1
        if j > 200:
            raise ArithmeticError("integral series failed to converge")
    return Ad, S @ Bc


def inverted_pendulum(T=0.7, g=9.81, k=0.1, q=2.0, r=4.0) -> SystemModel:
    """Sampled linear inverted pendulum on a cart (upright equilibrium at 0)."""
    Ac = np.array([[0.0, 1.0, 0.0, 0.0],
                   [g, -k, 0.0, 0.0],
                   [0.0, 0.0, 0.0, 1.0],
                   [0.0, 0.0, 0.0, 0.0]])
    Bc = np.array([[0.0], [1.0], [0.0], [1.0]])
    Ad, Bd = discretize_linear(Ac, Bc, T)
    return linear_l1_system(Ad, Bd, q, r, name="inverted_pendulum")


def rk4_step(f, x, u, T, substeps: int = 10):
    """Classical RK4 integration of dx/dt = f(x, u) over one sampling period."""
    h = T / substeps
    x = np.asarray(x, float)
    for _ in range(substeps):
        k1 = np.asarray(f(x, u), float)
        k2 = np.asarray(f(x + 0.5 * h * k1, u), float)
        k3 = np.asarray(f(x + 0.5 * h * k2, u), float)
        k4 = np.asarray(f(x + h * k3, u), float)
        x = x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    return x


def sampled_data_system(f, stage_cost, state_dim, control_dim, T,
                        substeps: int = 10, control_grid=None,
                        control_bounds=None, name="sampled") -> SystemModel:
    """Continuous-time plant under zero-order hold, discretized by fixed-step
    RK4 with `substeps` stages per sampling period. The resulting discrete
    model is treated as exact by the MPC loop."""

    def step(x, u):
        return rk4_step(f, x, u, T, substeps)

    return custom_system(step, stage_cost, state_dim, control_dim,
                         control_grid=control_grid, control_bounds=control_bounds,
                         name=name)


def scalar_cubic_system() -> SystemModel:
    """Scalar plant x⁺ = x + u·x³ on (−1, 1) with the flattened stage cost
    exp(−1/(2x²)); exponentially controllable with decay e^{−1/e} under u ≡ −1."""

    def step(x, u):
        return x + u * x**3

    def stage_cost(x, u):
        v = float(abs(x[0]))
        if v >= 1.0:
            return v
        if v == 0.0:
            return 0.0
        return math.exp(-1.0 / (2.0 * v * v))

    grid = tuple(np.linspace(-1.0, 1.0, 9))
    return custom_system(step, stage_cost, 1, 1, control_grid=grid,
                         control_bounds=(np.array([-1.0]), np.array([1.0])),
                         name="scalar_cubic")


def _weights(N, omega):
    w = np.ones(N)
    w[N - 1] = omega
    return w


def solve_ocp(sys: SystemModel, x0, N: int, omega: float = 1.0,
              polish: bool = False) -> OcpSolution:
    """Finite-horizon OCP: minimize Σ_{n<N−1} ℓ(x(n),u(n)) + ω·ℓ(x(N−1),u(N−1))."""
    if N < 1:
        raise ValueError("N must be >= 1")
    if omega < 1.0:
        raise ValueError("omega must be >= 1")
    x0 = np.asarray(x0, float).reshape(sys.state_dim)
    if not np.all(np.isfinite(x0)):
        raise ValueError("initial state must be finite")
    if sys.kind == LINEAR_L1:
        return _solve_ocp_lp(sys, x0, N, omega)
    return _solve_ocp_grid(sys, x0, N, omega, polish)


def _solve_ocp_lp(sys: SystemModel, x0, N, omega) -> OcpSolution:
    nx, nu = sys.state_dim, sys.control_dim
    Ad, Bd, q, r = sys.A, sys.B, sys.q, sys.r
    w = _weights(N, omega)
    nxv = nx * (N - 1)  # split state vars for x(1..N-1)
    nuv = nu * N
    nv = 2 * nxv + 2 * nuv

    def xp(n):  # block start of positive part of x(n), n = 1..N-1
        return (n - 1) * nx

    def xm(n):
        return nxv + (n - 1) * nx

    def up(n):
        return 2 * nxv + n * nu

    def um(n):
        return 2 * nxv + nuv + n * nu

    cost = np.zeros(nv)
    for n in range(1, N):
        cost[xp(n): xp(n) + nx] += w[n] * q
        cost[xm(n): xm(n) + nx] += w[n] * q
    for n in range(N):
        cost[up(n): up(n) + nu] += w[n] * r
        cost[um(n): um(n) + nu] += w[n] * r

    rows = nx * (N - 1)
    bound_rows = 0
    lo = hi = None
    if sys.control_bounds is not None:
        lo = np.asarray(sys.control_bounds[0], float).reshape(nu)
        hi = np.asarray(sys.control_bounds[1], float).reshape(nu)
        bound_rows = N * (int(np.isfinite(lo).sum()) + int(np.isfinite(hi).sum()))
    A = np.zeros((rows + bound_rows, nv))
    b = np.zeros(rows + bound_rows)
    senses = [lp.EQ] * rows + [lp.LE] * bound_rows
    for n in range(N - 1):  # x(n+1) − Ad x(n) − Bd u(n) = 0, x(0) fixed
        rs = n * nx
        A[rs: rs + nx, xp(n + 1): xp(n + 1) + nx] = np.eye(nx)
        A[rs: rs + nx, xm(n + 1): xm(n + 1) + nx] = -np.eye(nx)
        if n >= 1:
            A[rs: rs + nx, xp(n): xp(n) + nx] -= Ad
            A[rs: rs + nx, xm(n): xm(n) + nx] += Ad
        A[rs: rs + nx, up(n): up(n) + nu] -= Bd
        A[rs: rs + nx, um(n): um(n) + nu] += Bd
        if n == 0:
            b[rs: rs + nx] = Ad @ x0
    if bound_rows:
        rr = rows
        for n in range(N):
            for j in range(nu):
                if np.isfinite(hi[j]):  # u_j(n) <= hi_j
                    A[rr, up(n) + j] = 1.0
                    A[rr, um(n) + j] = -1.0
                    b[rr] = hi[j]
                    rr += 1
                if np.isfinite(lo[j]):  # -u_j(n) <= -lo_j
                    A[rr, up(n) + j] = -1.0
                    A[rr, um(n) + j] = 1.0
                    b[rr] = -lo[j]
                    rr += 1

    tab = lp.LpTableau(objective=cost, A=A, senses=senses, b=b)
    sol = lp.solve(tab)
    if sol.status == lp.INFEASIBLE:
        raise OcpInfeasible("control bounds make the horizon problem infeasible")
    if sol.status != lp.OPTIMAL:
        raise lp.LpError(f"OCP solve ended {sol.status}")
    u = np.empty((N, nu))
    for n in range(N):
        u[n] = sol.x[up(n): up(n) + nu] - sol.x[um(n): um(n) + nu]
    value = sol.objective_value + w[0] * float(q @ np.abs(x0))
    return OcpSolution(controls=u, value=value, method="lp", certified=True)


def _rollout_cost(sys, x0, u_seq, N, omega):
    w = _weights(N, omega)
    x = np.array(x0, float)
    total = 0.0
    for n in range(N):
        u = np.asarray(u_seq[n], float).reshape(sys.control_dim)
        total += w[n] * sys.stage_cost(x, u)
        x = np.asarray(sys.step(x, u), float).reshape(sys.state_dim)
    return total


def _solve_ocp_grid(sys: SystemModel, x0, N, omega, polish) -> OcpSolution:
    if sys.control_grid is None and not polish:
        raise BackendUnavailable(
            f"system {sys.name!r} has no control grid; pass polish=True for a local search")
    best_u = None
    best_val = np.inf
    certified = False
    if sys.control_grid is not None:
        n_seq = len(sys.control_grid) ** (N * sys.control_dim)
        if n_seq > MAX_ENUM_SEQUENCES and not polish:
            raise BackendUnavailable(
                f"{n_seq} control sequences exceed the enumeration cap; pass polish=True")
        if n_seq <= MAX_ENUM_SEQUENCES:
            for seq in itertools.product(sys.control_grid, repeat=N * sys.control_dim):
                u_seq = np.array(seq, float).reshape(N, sys.control_dim)
                val = _rollout_cost(sys, x0, u_seq, N, omega)
                if val < best_val:
                    best_val = val
                    best_u = u_seq
            certified = True
    if best_u is None:
        best_u = np.zeros((N, sys.control_dim))
        best_val = _rollout_cost(sys, x0, best_u, N, omega)
    if polish:
        best_u, best_val = _powell_polish(sys, x0, N, omega, best_u)
        certified = False
    return OcpSolution(controls=best_u, value=best_val, method="grid", certified=certified)


def _powell_polish(sys, x0, N, omega, u_start):
    from scipy.optimize import minimize

    shape = (N, sys.control_dim)
    lo = hi = None
    if sys.control_bounds is not None:
        lo = np.asarray(sys.control_bounds[0], float).reshape(sys.control_dim)
        hi = np.asarray(sys.control_bounds[1], float).reshape(sys.control_dim)

    def fun(flat):
        u = flat.reshape(shape)
        if lo is not None:
            u = np.clip(u, lo, hi)
        return _rollout_cost(sys, x0, u, N, omega)

    res = minimize(fun, u_start.ravel(), method="Powell",
                   options={"xtol": 1e-10, "ftol": 1e-12, "maxiter": 2000})
    u = res.x.reshape(shape)
    if lo is not None:
        u = np.clip(u, lo, hi)
    val = _rollout_cost(sys, x0, u, N, omega)
    if val <= res.fun:
        return u, val
    return u_start, _rollout_cost(sys, x0, u_start, N, omega)
