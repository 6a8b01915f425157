"""Backend benchmark: numba-jitted kernels vs the pure-numpy path.

Run as `python -m mpcbounds.benchmark`. Times the two hot kernels, simplex
pivoting (through full oracle/OCP solves) and the stability-region grid,
once per backend and prints the speedups. Requires the default numba backend
to compare both; under MPCBOUNDS_BACKEND=numpy only the numpy path runs.
"""
from __future__ import annotations

import time

import numpy as np

from . import _accel, horizon, lp, oracle, systems
from .alphacore import AlphaQuery
from .kl0 import Kl0Beta


def _time(fn, repeat=3):
    best = np.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def _lp_workload():
    betas = [Kl0Beta.exponential(2.0, 0.625), Kl0Beta.finite([1, 1.25, 1.5, 1.25, 0.5])]
    for beta in betas:
        for N in (6, 10):
            for m in range(1, N, 2):
                q = AlphaQuery(beta, N, m, 1.5)
                for variant in oracle.VARIANTS:
                    oracle.alpha_lp(q, variant)


def _ocp_workload():
    pend = systems.inverted_pendulum()
    rng = np.random.default_rng(7)
    for _ in range(20):
        x0 = rng.uniform(-0.5, 0.5, size=4)
        systems.solve_ocp(pend, x0, 10)


def _grid_workload_numba():
    C_axis, s_axis = np.linspace(1, 20, 200), np.linspace(0.01, 0.99, 200)
    out = np.empty((200, 200))
    horizon._alpha_exp_block(C_axis, s_axis, 7, 2, 1.0, out)
    return out


def _grid_workload_numpy():
    C_axis, s_axis = np.linspace(1, 20, 200), np.linspace(0.01, 0.99, 200)
    return horizon._alpha_exp_grid_numpy(C_axis, s_axis, 7, 2, 1.0)


def main():
    print(f"active backend: {_accel.backend_name()}")
    rows = []

    if _accel.NUMBA_ENABLED:
        # warm up compilation before timing
        _grid_workload_numba()
        _lp_workload()
        t_grid_nb = _time(_grid_workload_numba)
        t_lp_nb = _time(_lp_workload)
        t_ocp_nb = _time(_ocp_workload)

        # pure-python simplex = the same loop uncompiled (the numpy fallback path)
        compiled = lp._simplex_loop
        lp._simplex_loop = compiled.py_func
        try:
            t_lp_py = _time(_lp_workload, repeat=1)
            t_ocp_py = _time(_ocp_workload, repeat=1)
        finally:
            lp._simplex_loop = compiled
        t_grid_np = _time(_grid_workload_numpy)

        a = _grid_workload_numba()
        b = _grid_workload_numpy()
        agree = np.nanmax(np.abs(a - b))
        rows.append(("region grid 200x200 (N=7,m=2)", t_grid_nb, t_grid_np))
        rows.append(("alpha-oracle LP batch (60 solves)", t_lp_nb, t_lp_py))
        rows.append(("pendulum OCP batch (20 solves)", t_ocp_nb, t_ocp_py))
        print(f"backend agreement on grid cells: max |diff| = {agree:.3e}")
        print(f"{'kernel':<36} {'numba':>10} {'numpy':>10} {'speedup':>9}")
        for name, tn, tp in rows:
            print(f"{name:<36} {tn * 1e3:9.1f}ms {tp * 1e3:9.1f}ms {tp / tn:8.1f}x")
    else:
        t_grid_np = _time(_grid_workload_numpy)
        t_lp = _time(_lp_workload, repeat=1)
        t_ocp = _time(_ocp_workload, repeat=1)
        print("numba backend disabled (MPCBOUNDS_BACKEND=numpy); numpy-path timings only")
        print(f"region grid 200x200: {t_grid_np * 1e3:.1f} ms")
        print(f"alpha-oracle LP batch: {t_lp * 1e3:.1f} ms")
        print(f"pendulum OCP batch: {t_ocp * 1e3:.1f} ms")
        print("set MPCBOUNDS_BACKEND=numba to compare both backends")


if __name__ == "__main__":
    main()
