"""Brute-force LP reference: enumerate basic feasible solutions.

Independent of the simplex path; the fuzz suite and the `verify`
subcommand use it to pin the simplex optimum on small instances. Only meaningful
for feasible, bounded problems of a handful of variables.
"""
from __future__ import annotations

from itertools import combinations

import numpy as np

from .lp import LpTableau, _standard_form

__all__ = ["brute_force_optimum"]


def brute_force_optimum(tab: LpTableau, tol: float = 1e-9):
    """(value, x) of the best basic feasible solution, or (None, None)."""
    A, b, c = _standard_form(tab)
    m, n = A.shape
    best_val = None
    best_x = None
    for cols in combinations(range(n), m):
        B = A[:, cols]
        try:
            xb = np.linalg.solve(B, b)
        except np.linalg.LinAlgError:
            continue
        if not np.all(np.isfinite(xb)) or np.any(xb < -tol):
            continue
        if np.abs(B @ xb - b).max() > 1e-7 * max(1.0, np.abs(b).max()):
            continue
        x = np.zeros(n)
        x[list(cols)] = np.maximum(xb, 0.0)
        val = float(c @ x)
        if best_val is None or val < best_val:
            best_val = val
            best_x = tab.lb + x[: tab.n_vars]
    return best_val, best_x
