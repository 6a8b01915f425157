"""Dense two-phase primal simplex with Bland's anti-cycling rule.

Small standard-form solver backing both the α oracle and the 1-norm optimal
control problems. Bland's rule everywhere: the oracle LPs are degenerate by
construction (the optimum sits on a full set of active rows), so cycling
protection matters more than pivot speed at these sizes.

After the simplex terminates, the basic solution is recomputed from the
*original* constraint columns and refined once more (iterative refinement).
This keeps the solution error relative to the data scale, which multistep
closed loops on unstable plants need: the tableau's accumulated roundoff is
absolute and gets amplified exponentially over open-loop segments.

Tolerances live here and only here:
    RC_TOL         reduced-cost threshold for entering variables
    PIVOT_TOL      smallest acceptable pivot magnitude (absolute)
    REL_PIVOT_TOL  smallest acceptable pivot relative to its column
    FEAS_TOL       relative primal feasibility accepted for Optimal solutions
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ._accel import maybe_njit

__all__ = [
    "LpTableau",
    "LpSolution",
    "LpError",
    "SizeExceeded",
    "NumericalBreakdown",
    "solve",
    "OPTIMAL",
    "INFEASIBLE",
    "UNBOUNDED",
]

RC_TOL = 1e-9
PIVOT_TOL = 1e-11
# entries below this fraction of the column's largest magnitude are treated
# as zero in the ratio test: pivoting on accumulated roundoff in a degenerate
# row corrupts the basis far faster than any cycling would
REL_PIVOT_TOL = 1e-9
FEAS_TOL = 1e-9
MAX_ITER = 200_000
SIZE_CAP = 500

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"

LE, EQ, GE = "<=", "=", ">="


class LpError(Exception):
    pass


class SizeExceeded(LpError):
    pass


class NumericalBreakdown(LpError):
    pass


@dataclass
class LpTableau:
    """minimize objective·x subject to A x (senses) b, lb ≤ x ≤ ub.

    senses entries are "<=", "=", ">=" per row. Lower bounds default to 0 and
    must be finite; upper bounds are optional (np.inf = absent).
    """

    objective: np.ndarray
    A: np.ndarray
    senses: list[str]
    b: np.ndarray
    lb: np.ndarray = field(default=None)
    ub: np.ndarray = field(default=None)

    def __post_init__(self):
        self.objective = np.asarray(self.objective, float)
        self.A = np.atleast_2d(np.asarray(self.A, float))
        self.b = np.asarray(self.b, float)
        n = self.objective.size
        m = self.b.size
        if self.A.shape != (m, n):
            raise ValueError(f"A must be {m}x{n}, got {self.A.shape}")
        if len(self.senses) != m:
            raise ValueError("one sense per row required")
        for s in self.senses:
            if s not in (LE, EQ, GE):
                raise ValueError(f"unknown sense {s!r}")
        self.lb = np.zeros(n) if self.lb is None else np.asarray(self.lb, float)
        self.ub = np.full(n, np.inf) if self.ub is None else np.asarray(self.ub, float)
        if self.lb.shape != (n,) or self.ub.shape != (n,):
            raise ValueError("bounds must have one entry per variable")
        if not (np.all(np.isfinite(self.objective)) and np.all(np.isfinite(self.A))
                and np.all(np.isfinite(self.b)) and np.all(np.isfinite(self.lb))):
            raise ValueError("tableau entries must be finite (lb included)")
        if np.any(self.ub < self.lb):
            raise ValueError("upper bound below lower bound")

    @property
    def n_vars(self) -> int:
        return self.objective.size

    @property
    def n_rows(self) -> int:
        return self.b.size


@dataclass(frozen=True)
class LpSolution:
    status: str
    x: np.ndarray | None
    objective_value: float


@maybe_njit(cache=True)
def _simplex_loop(T, basis, ncols):  # pragma: no cover - exercised via solve()
    """Bland pivoting on a canonical tableau; last row holds reduced costs.

    Returns (code, iterations): 0 optimal, 1 unbounded, 2 pivot breakdown,
    3 iteration limit. Only columns < ncols may enter (blocks artificials in
    phase 2).
    """
    m = T.shape[0] - 1
    rhs = T.shape[1] - 1
    for it in range(MAX_ITER):
        enter = -1
        for j in range(ncols):
            if T[m, j] < -RC_TOL:
                enter = j
                break
        if enter < 0:
            return 0, it
        colmax = 0.0
        for i in range(m):
            a = abs(T[i, enter])
            if a > colmax:
                colmax = a
        cutoff = max(PIVOT_TOL, REL_PIVOT_TOL * colmax)
        leave = -1
        best = np.inf
        tiny_only = False
        for i in range(m):
            a = T[i, enter]
            if a > cutoff:
                ratio = T[i, rhs] / a
                if ratio < best:
                    best = ratio
                    leave = i
                elif ratio == best and (leave < 0 or basis[i] < basis[leave]):
                    leave = i
            elif a > 0.0:
                tiny_only = True
        if leave < 0:
            if tiny_only and colmax <= PIVOT_TOL:
                return 2, it
            return 1, it
        piv = T[leave, enter]
        for j in range(rhs + 1):
            T[leave, j] /= piv
        for i in range(m + 1):
            if i != leave:
                f = T[i, enter]
                if f != 0.0:
                    for j in range(rhs + 1):
                        T[i, j] -= f * T[leave, j]
        basis[leave] = enter
    return 3, MAX_ITER


def _standard_form(lp: LpTableau):
    """Shift bounds to x >= 0, add ub rows and slack columns: A_std y = b_std."""
    n = lp.n_vars
    shift = lp.lb
    b = lp.b - lp.A @ shift
    rows = [lp.A]
    senses = list(lp.senses)
    rhs = list(b)
    ub_idx = np.where(np.isfinite(lp.ub))[0]
    if ub_idx.size:
        bound_rows = np.zeros((ub_idx.size, n))
        for r, j in enumerate(ub_idx):
            bound_rows[r, j] = 1.0
            senses.append(LE)
            rhs.append(lp.ub[j] - lp.lb[j])
        rows.append(bound_rows)
    A = np.vstack(rows)
    b = np.array(rhs)
    m = A.shape[0]
    n_slack = sum(1 for s in senses if s != EQ)
    A_std = np.zeros((m, n + n_slack))
    A_std[:, :n] = A
    col = n
    for i, s in enumerate(senses):
        if s == LE:
            A_std[i, col] = 1.0
            col += 1
        elif s == GE:
            A_std[i, col] = -1.0
            col += 1
    c_std = np.zeros(n + n_slack)
    c_std[:n] = lp.objective
    return A_std, b, c_std


def _refine_basic(A_std, b_std, basis, kept, x):
    """Recompute x_basis from original columns; two refinement rounds.

    Degenerate vertices legitimately produce basic components at -1e-9-ish;
    those are clamped and the residual comparison picks the better vector.
    """
    if kept.size == 0:
        return x
    B = A_std[kept][:, basis]
    rhs = b_std[kept]
    try:
        xb = np.linalg.solve(B, rhs)
        for _ in range(2):
            xb += np.linalg.solve(B, rhs - B @ xb)
    except np.linalg.LinAlgError:
        return x
    scale = max(1.0, np.abs(rhs).max())
    if np.any(xb < -1e-7 * scale):
        return x
    neg = xb < 0.0
    if np.any(neg) and not np.all(neg):
        # degenerate vertex: those basics are 0 in exact arithmetic, so pin
        # them and re-solve the rest (consistent system, lstsq for safety)
        xb2, *_ = np.linalg.lstsq(B[:, ~neg], rhs, rcond=None)
        if np.all(xb2 >= -1e-12 * scale):
            repaired = np.zeros_like(xb)
            repaired[~neg] = np.maximum(xb2, 0.0)
            if np.abs(B @ repaired - rhs).max() <= np.abs(B @ np.maximum(xb, 0) - rhs).max():
                xb = repaired
    x2 = np.zeros_like(x)
    x2[basis] = np.maximum(xb, 0.0)
    old = np.abs(A_std @ x - b_std).max() if x is not None else np.inf
    new = np.abs(A_std @ x2 - b_std).max()
    return x2 if new <= old + 1e-12 else x


def solve(lp: LpTableau) -> LpSolution:
    """Two-phase simplex. Raises SizeExceeded / NumericalBreakdown; otherwise
    returns Optimal (with x satisfying every row to FEAS_TOL relative),
    Infeasible, or Unbounded."""
    if lp.n_vars > SIZE_CAP or lp.n_rows > SIZE_CAP:
        raise SizeExceeded(f"{lp.n_rows} rows x {lp.n_vars} vars exceeds soft cap {SIZE_CAP}")
    A_std, b_std, c_std = _standard_form(lp)
    m, n = A_std.shape

    A1 = A_std.copy()
    b1 = b_std.copy()
    neg = b1 < 0
    A1[neg] *= -1.0
    b1[neg] *= -1.0

    # phase 1: artificial basis, minimize artificial mass
    T = np.zeros((m + 1, n + m + 1))
    T[:m, :n] = A1
    T[:m, n:n + m] = np.eye(m)
    T[:m, -1] = b1
    basis = np.arange(n, n + m, dtype=np.int64)
    for i in range(m):
        T[m, :] -= T[i, :]
    T[m, n:n + m] = 0.0
    code, _ = _simplex_loop(T, basis, n)
    if code == 2:
        raise NumericalBreakdown("persistent tiny pivots in phase 1")
    if code == 3:
        raise NumericalBreakdown("phase 1 iteration limit")
    scale = max(1.0, np.abs(b1).max()) if b1.size else 1.0
    if -T[m, -1] > FEAS_TOL * scale:
        return LpSolution(status=INFEASIBLE, x=None, objective_value=np.nan)

    # pivot leftover artificials out on the largest structural entry;
    # an all-zero structural row is redundant and gets dropped
    keep = np.ones(m, bool)
    for i in range(m):
        if basis[i] >= n:
            piv_col = int(np.argmax(np.abs(T[i, :n]))) if n else -1
            if piv_col < 0 or abs(T[i, piv_col]) <= PIVOT_TOL:
                keep[i] = False
                continue
            p = T[i, piv_col]
            T[i, :] /= p
            for r in range(m + 1):
                if r != i and T[r, piv_col] != 0.0:
                    T[r, :] -= T[r, piv_col] * T[i, :]
            basis[i] = piv_col
    kept = np.where(keep)[0]
    mk = kept.size
    T2 = np.zeros((mk + 1, n + 1))
    T2[:mk, :n] = T[kept][:, :n]
    T2[:mk, -1] = T[kept][:, -1]
    basis = basis[kept].copy()

    # phase 2: true objective, reduced costs from the canonical tableau
    T2[-1, :n] = c_std
    for i in range(mk):
        cb = c_std[basis[i]]
        if cb != 0.0:
            T2[-1, :] -= cb * T2[i, :]

    # Long degenerate pivot runs let roundoff drift into the tableau. A
    # terminal claim (unbounded, or a vertex missing feasibility) is only
    # believed when it reproduces with zero pivots from a canonical form
    # rebuilt exactly at the current basis.
    fresh = False
    for _ in range(6):
        code, iters = _simplex_loop(T2, basis, n)
        if code == 2:
            raise NumericalBreakdown("persistent tiny pivots in phase 2")
        if code == 3:
            raise NumericalBreakdown("phase 2 iteration limit")
        trusted = fresh and iters == 0
        if code == 1:
            if trusted:
                return LpSolution(status=UNBOUNDED, x=None, objective_value=-np.inf)
            refreshed = _refresh_tableau(A_std, b_std, c_std, basis, kept)
            if refreshed is None:
                raise NumericalBreakdown("basis lost feasibility during pivoting")
            T2 = refreshed
            fresh = True
            continue
        y = np.zeros(n)
        y[basis] = T2[:mk, -1]
        y = _refine_basic(A_std, b_std, basis, kept, y)
        x = lp.lb + y[:lp.n_vars]
        resid = _row_residual(lp, x)
        if resid <= FEAS_TOL:
            return LpSolution(status=OPTIMAL, x=x, objective_value=float(lp.objective @ x))
        if trusted:
            raise NumericalBreakdown(
                f"optimal vertex violates feasibility: residual {resid:.3e}")
        refreshed = _refresh_tableau(A_std, b_std, c_std, basis, kept)
        if refreshed is None:
            raise NumericalBreakdown(
                f"optimal vertex violates feasibility: residual {resid:.3e}")
        T2 = refreshed
        fresh = True
    raise NumericalBreakdown("phase 2 failed to stabilize")


def _refresh_tableau(A_std, b_std, c_std, basis, kept):
    """Exact canonical tableau for the given basis, or None if it is singular
    or infeasible beyond roundoff."""
    mk = kept.size
    n = A_std.shape[1]
    B = A_std[kept][:, basis]
    try:
        body = np.linalg.solve(B, np.column_stack([A_std[kept], b_std[kept]]))
    except np.linalg.LinAlgError:
        return None
    rhs = body[:, -1]
    scale = max(1.0, np.abs(b_std).max()) if b_std.size else 1.0
    if np.any(rhs < -FEAS_TOL * scale):
        return None
    T2 = np.zeros((mk + 1, n + 1))
    T2[:mk, :n] = body[:, :n]
    T2[:mk, -1] = np.maximum(rhs, 0.0)
    T2[-1, :n] = c_std
    for i in range(mk):
        cb = c_std[basis[i]]
        if cb != 0.0:
            T2[-1, :] -= cb * T2[i, :]
    return T2


def _row_residual(lp: LpTableau, x) -> float:
    """Worst relative constraint violation of x over the original rows."""
    Ax = lp.A @ x
    worst = 0.0
    for i, s in enumerate(lp.senses):
        scale = max(1.0, abs(lp.b[i]), np.abs(lp.A[i]).max() * max(1.0, np.abs(x).max()))
        if s == LE:
            v = (Ax[i] - lp.b[i]) / scale
        elif s == GE:
            v = (lp.b[i] - Ax[i]) / scale
        else:
            v = abs(Ax[i] - lp.b[i]) / scale
        worst = max(worst, v)
    worst = max(worst, float(np.max(lp.lb - x, initial=0.0)))
    finite_ub = np.isfinite(lp.ub)
    if finite_ub.any():
        worst = max(worst, float(np.max((x - lp.ub)[finite_ub], initial=0.0)))
    return worst
