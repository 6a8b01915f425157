"""Brute-force LP oracle for the suboptimality index.

Builds the optimization problem behind α_{N,m}^ω as an explicit linear
program in three equivalent shapes and solves it with the in-house simplex,
independently of the closed form in :mod:`alphacore`:

    FULL      all necessary-condition rows over λ_0..λ_{N−1} plus the value
              variable ν, with the denominator pinned by Σ_{n<m} λ_n = 1.
              Least-transformed; exists to be the independent cross-check.
    REDUCED   ν and λ_0 eliminated; N−1 variables, rows rearranged so every
              coefficient is an explicit γ.
    RELAXED   REDUCED minus the rows that pairwise comparison shows dominated;
              at a non-saturated optimum every remaining row is active and
              every λ strictly positive (active_set_report verifies this).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import lp
from .alphacore import LP_ORACLE, AlphaQuery, AlphaResult
from .kl0 import gamma_table

__all__ = [
    "FULL",
    "REDUCED",
    "RELAXED",
    "VARIANTS",
    "AlphaLpInstance",
    "ActiveSetReport",
    "OracleError",
    "OracleInfeasible",
    "build_alpha_lp",
    "alpha_lp",
    "active_set_report",
]

FULL = "full"
REDUCED = "reduced"
RELAXED = "relaxed"
VARIANTS = (FULL, REDUCED, RELAXED)

ACTIVE_TOL = 1e-8
# nonbasic variables come out of the simplex as exact zeros, so strict
# positivity is testable exactly; genuinely positive lambdas can sit at 1e-12
# when the gamma ladder spans many decades
POSITIVE_TOL = 0.0


class OracleError(Exception):
    pass


class OracleInfeasible(OracleError):
    """The LP came back infeasible although the feasible set is provably nonempty."""


@dataclass(frozen=True)
class AlphaLpInstance:
    query: AlphaQuery
    variant: str
    tableau: lp.LpTableau
    variable_names: tuple[str, ...]
    # objective offset: alpha = offset + optimum (1 for the reduced shapes)
    offset: float


def _build_full(q: AlphaQuery, g) -> lp.LpTableau:
    N, m, om = q.N, q.m, q.omega
    nv = N + 1  # lam_0..lam_{N-1}, nu
    cost = np.zeros(nv)
    cost[: N - 1] = 1.0
    cost[N - 1] = om
    cost[N] = -1.0
    rows, senses, rhs = [], [], []
    # cost-chain rows: the tail of any optimal cost sequence is bounded by the
    # controllability aggregate of its first element
    for k in range(N - 1):
        row = np.zeros(nv)
        row[k: N - 1] += 1.0
        row[N - 1] += om
        row[k] -= g[N - k]
        rows.append(row)
        senses.append(lp.LE)
        rhs.append(0.0)
    # value rows: nu is dominated by every split of the tail cost at offset j
    for j in range(N - m):
        row = np.zeros(nv)
        row[N] = 1.0
        row[m: m + j] -= 1.0
        row[j + m] -= g[N - j]
        rows.append(row)
        senses.append(lp.LE)
        rhs.append(0.0)
    # denominator normalization
    row = np.zeros(nv)
    row[:m] = 1.0
    rows.append(row)
    senses.append(lp.EQ)
    rhs.append(1.0)
    return lp.LpTableau(objective=cost, A=np.array(rows), senses=senses, b=np.array(rhs))


def _build_reduced(q: AlphaQuery, g, relaxed: bool) -> lp.LpTableau:
    N, m, om = q.N, q.m, q.omega
    nv = N - 1  # lam_1..lam_{N-1}; column i holds lam_{i+1}

    def col(n):
        return n - 1

    cost = np.zeros(nv)
    cost[col(N - 1)] = -(g[m + 1] - om)
    rows, senses, rhs = [], [], []
    row = np.zeros(nv)
    for n in range(1, m):
        row[col(n)] = g[N]
    for n in range(m, N - 1):
        row[col(n)] = 1.0
    row[col(N - 1)] += om
    rows.append(row)
    senses.append(lp.LE)
    rhs.append(g[N] - 1.0)
    top = (m - 1) if relaxed else (N - 2)
    for j in range(1, top + 1):
        row = np.zeros(nv)
        row[col(j): col(N - 1)] += 1.0
        row[col(j)] -= g[N - j]
        row[col(N - 1)] += om
        rows.append(row)
        senses.append(lp.LE)
        rhs.append(0.0)
    for j in range(m, N - 1):
        row = np.zeros(nv)
        row[col(j): col(N - 1)] += 1.0
        row[col(j)] -= g[N - j + m]
        row[col(N - 1)] += g[m + 1]
        rows.append(row)
        senses.append(lp.LE)
        rhs.append(0.0)
    return lp.LpTableau(objective=cost, A=np.array(rows), senses=senses, b=np.array(rhs))


def build_alpha_lp(q: AlphaQuery, variant: str = FULL) -> AlphaLpInstance:
    if variant not in VARIANTS:
        raise ValueError(f"variant must be one of {VARIANTS}, got {variant!r}")
    gt = gamma_table(q.beta, q.N, q.omega)
    if variant == FULL:
        tab = _build_full(q, gt)
        names = tuple(f"lam{n}" for n in range(q.N)) + ("nu",)
        offset = 0.0
    else:
        tab = _build_reduced(q, gt, relaxed=(variant == RELAXED))
        names = tuple(f"lam{n}" for n in range(1, q.N))
        offset = 1.0
    return AlphaLpInstance(query=q, variant=variant, tableau=tab,
                           variable_names=names, offset=offset)


def alpha_lp(q: AlphaQuery, variant: str = FULL) -> AlphaResult:
    """α via the LP route. Saturated queries whose necessary conditions admit
    no cost sequence at all (degenerate β with c_0 < 1) come back infeasible;
    the optimum is 1 there, which is what gets returned."""
    inst = build_alpha_lp(q, variant)
    sol = lp.solve(inst.tableau)
    gt = gamma_table(q.beta, q.N, q.omega)
    saturated = gt[q.m + 1] <= q.omega
    if sol.status == lp.OPTIMAL:
        return AlphaResult(alpha=inst.offset + sol.objective_value,
                           saturated=saturated, method=LP_ORACLE)
    if sol.status == lp.INFEASIBLE:
        if saturated:
            return AlphaResult(alpha=1.0, saturated=True, method=LP_ORACLE)
        raise OracleInfeasible(
            f"{variant} oracle infeasible for non-saturated query {q} (construction bug)")
    raise OracleError(f"{variant} oracle unbounded for {q}")


@dataclass(frozen=True)
class ActiveSetReport:
    applicable: bool
    all_rows_active: bool = False
    all_lambda_positive: bool = False
    row_residuals: tuple[float, ...] = ()
    min_lambda: float = float("nan")
    reason: str = ""

    @property
    def ok(self) -> bool:
        return self.applicable and self.all_rows_active and self.all_lambda_positive


def active_set_report(solution: lp.LpSolution, instance: AlphaLpInstance) -> ActiveSetReport:
    """Check that a non-saturated RELAXED optimum makes every row an equality
    with strictly positive λ (the structure the closed form is built on)."""
    if instance.variant != RELAXED:
        return ActiveSetReport(applicable=False, reason="only meaningful for the relaxed shape")
    q = instance.query
    gt = gamma_table(q.beta, q.N, q.omega)
    if gt[q.m + 1] <= q.omega:
        return ActiveSetReport(applicable=False, reason="saturated query (alpha = 1)")
    if solution.status != lp.OPTIMAL or solution.x is None:
        return ActiveSetReport(applicable=False, reason=f"solution status {solution.status}")
    tab = instance.tableau
    resid = tab.A @ solution.x - tab.b
    scales = np.maximum(1.0, np.abs(tab.b))
    rel = np.abs(resid) / scales
    return ActiveSetReport(
        applicable=True,
        all_rows_active=bool(np.all(rel <= ACTIVE_TOL)),
        all_lambda_positive=bool(np.all(solution.x > POSITIVE_TOL)),
        row_residuals=tuple(float(r) for r in rel),
        min_lambda=float(np.min(solution.x)),
    )
