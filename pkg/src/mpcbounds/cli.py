"""Command-line front end: every analysis as a subcommand with CSV/JSON output.

Exit codes: 0 success, 1 usage error, 2 numerical error, 3 verification
failure. CSV uses '.' decimals, '\\n' line endings, a header row, and floats
with 17 significant digits so files round-trip and diff bit-stably.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import horizon, lp, oracle, sim, systems
from .alphacore import (
    AlphaQuery,
    DegenerateDenominator,
    InvalidQuery,
    alpha_c1_special,
    alpha_closed_form,
)
from .kl0 import Kl0Beta, check_submultiplicative, gamma_table
from .oracle import OracleError
from .systems import BackendUnavailable, OcpInfeasible
from .vertexenum import brute_force_optimum

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_NUMERICAL = 2
EXIT_VERIFY = 3

NUMERICAL_ERRORS = (DegenerateDenominator, lp.LpError, OracleError,
                    OcpInfeasible, BackendUnavailable, sim.NoValidSegments)


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


def fmt(v) -> str:
    """17 significant digits: round-trip exact for float64."""
    if isinstance(v, str):
        return v
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return f"{float(v):.17g}"


def _write_csv(path, header, rows):
    text = ",".join(header) + "\n"
    for row in rows:
        text += ",".join(fmt(v) for v in row) + "\n"
    if path is None:
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


def _beta_from_args(args) -> Kl0Beta:
    if getattr(args, "beta_config", None):
        cfg = json.loads(Path(args.beta_config).read_text())
        return Kl0Beta.from_config(cfg)
    if args.beta == "exp":
        if args.C is None or args.sigma is None:
            raise _UsageError("--beta exp requires --C and --sigma")
        return Kl0Beta.exponential(args.C, args.sigma)
    if args.beta == "finite":
        if not args.c:
            raise _UsageError("--beta finite requires --c")
        return Kl0Beta.finite(args.c)
    raise _UsageError("specify --beta {exp,finite} or --beta-config FILE")


def _add_beta_flags(p):
    p.add_argument("--beta", choices=["exp", "finite"], help="bound family")
    p.add_argument("--C", type=float, help="exponential overshoot (>= 1)")
    p.add_argument("--sigma", type=float, help="exponential decay rate in (0,1)")
    p.add_argument("--c", type=float, nargs="+", help="finite-time coefficients")
    p.add_argument("--beta-config", help="JSON file with a bound description")


def _add_output_flags(p):
    p.add_argument("--output", help="write CSV/JSON here instead of stdout")
    p.add_argument("--format", choices=["csv", "json"], default="csv")


def build_parser() -> _Parser:
    ap = _Parser(prog="mpcbounds", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("alpha", help="closed-form suboptimality index")
    _add_beta_flags(p)
    p.add_argument("--N", type=int, required=True)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--omega", type=float, default=1.0)
    p.add_argument("--allow-non-submultiplicative", action="store_true")

    p = sub.add_parser("oracle", help="LP-oracle value and gap to the closed form")
    _add_beta_flags(p)
    p.add_argument("--N", type=int, required=True)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--omega", type=float, default=1.0)
    p.add_argument("--variant", choices=list(oracle.VARIANTS), default=oracle.FULL)

    p = sub.add_parser("sweep-m", help="alpha for every control horizon m = 1..N-1")
    _add_beta_flags(p)
    p.add_argument("--N", type=int, required=True)
    p.add_argument("--omega", type=float, default=1.0)
    _add_output_flags(p)

    p = sub.add_parser("region", help="(C, sigma) stability region on a grid")
    p.add_argument("--N", type=int, required=True)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--omega", type=float, default=1.0)
    p.add_argument("--C-min", type=float, default=horizon.DEFAULT_C_RANGE[0])
    p.add_argument("--C-max", type=float, default=horizon.DEFAULT_C_RANGE[1])
    p.add_argument("--sigma-min", type=float, default=horizon.DEFAULT_SIGMA_RANGE[0])
    p.add_argument("--sigma-max", type=float, default=horizon.DEFAULT_SIGMA_RANGE[1])
    p.add_argument("--resolution", type=int, default=horizon.DEFAULT_RESOLUTION)
    p.add_argument("--gnuplot", action="store_true",
                   help="also write a gnuplot script next to the CSV")
    _add_output_flags(p)

    p = sub.add_parser("min-horizon", help="minimal stabilizing optimization horizon")
    p.add_argument("--gamma", type=float, required=True)
    p.add_argument("--omega", type=float, default=1.0)
    p.add_argument("--m-rule", default="1",
                   help="fixed control horizon (integer) or 'half' for m = floor(N/2)")

    p = sub.add_parser("simulate", help="run a closed-loop experiment from a config file")
    p.add_argument("--config", required=True)
    p.add_argument("--output", required=True, help="directory for run artifacts")

    p = sub.add_parser("verify", help="run the cross-validation suite")
    p.add_argument("--fast", action="store_true", help="smaller corpora")
    return ap


def _cmd_alpha(args) -> int:
    beta = _beta_from_args(args)
    q = AlphaQuery(beta, args.N, args.m, args.omega)
    res = alpha_closed_form(q, allow_non_submultiplicative=args.allow_non_submultiplicative)
    if res.saturated:
        print("1 (saturated)")
    elif res.lower_bound_only:
        print(f"{res.alpha!r} (lower bound only: bound not submultiplicative)")
    else:
        print(repr(res.alpha))
    return EXIT_OK


def _cmd_oracle(args) -> int:
    beta = _beta_from_args(args)
    q = AlphaQuery(beta, args.N, args.m, args.omega)
    res = oracle.alpha_lp(q, args.variant)
    closed = alpha_closed_form(q, allow_non_submultiplicative=True)
    gap = abs(res.alpha - closed.alpha)
    print(f"{res.alpha!r} gap {gap:.3e}")
    return EXIT_OK


def _cmd_sweep_m(args) -> int:
    beta = _beta_from_args(args)
    rows = horizon.m_sweep(beta, args.N, args.omega)
    if args.format == "json":
        payload = {"N": args.N, "omega": args.omega,
                   "rows": [{"m": m, "alpha": a} for m, a in rows]}
        text = json.dumps(payload, indent=2) + "\n"
        Path(args.output).write_text(text) if args.output else sys.stdout.write(text)
    else:
        _write_csv(args.output, ["m", "alpha"], rows)
    return EXIT_OK


def _cmd_region(args) -> int:
    C_axis = np.linspace(args.C_min, args.C_max, args.resolution)
    s_axis = np.linspace(args.sigma_min, args.sigma_max, args.resolution)
    grid = horizon.stability_region(args.N, args.m, args.omega, C_axis, s_axis)
    area = horizon.region_area(grid)
    if args.format == "json":
        payload = {
            "N": args.N, "m": args.m, "omega": args.omega, "area": area,
            "C_axis": [float(v) for v in grid.C_axis],
            "sigma_axis": [float(v) for v in grid.sigma_axis],
            "alpha": [[float(v) for v in row] for row in grid.cells],
        }
        text = json.dumps(payload) + "\n"
        Path(args.output).write_text(text) if args.output else sys.stdout.write(text)
    else:
        rows = ((grid.C_axis[i], grid.sigma_axis[j], grid.cells[i, j], grid.stable_mask[i, j])
                for i in range(grid.C_axis.size) for j in range(grid.sigma_axis.size))
        _write_csv(args.output, ["C", "sigma", "alpha", "stable"], rows)
    summary = (f"area {fmt(area)} stable_fraction {fmt(float(np.mean(grid.stable_mask)))} "
               f"N {args.N} m {args.m} omega {fmt(args.omega)}")
    # keep stdout clean when the CSV itself goes to stdout
    print(summary, file=sys.stdout if args.output else sys.stderr)
    if args.gnuplot:
        if not args.output:
            raise _UsageError("--gnuplot requires --output")
        gp = Path(args.output).with_suffix(".gp")
        gp.write_text(
            "set datafile separator ','\n"
            "set xlabel 'sigma'\nset ylabel 'C'\nset view map\n"
            f"splot '{args.output}' using 2:1:($4) every ::1 with points palette title 'stable'\n")
    return EXIT_OK


def _cmd_min_horizon(args) -> int:
    rule = horizon.HALF_N if args.m_rule == "half" else int(args.m_rule)
    res = horizon.min_stabilizing_horizon(args.gamma, args.omega, rule)
    print(f"N_min {res.N_min} bound {fmt(res.bound_value)}")
    return EXIT_OK


def _system_from_config(cfg):
    entry = cfg.get("system", "pendulum")
    if entry == "pendulum":
        return systems.inverted_pendulum(T=cfg.get("T", 0.7))
    if isinstance(entry, dict) and entry.get("kind") == "linear_l1":
        bounds = None
        if "u_min" in entry or "u_max" in entry:
            B = np.asarray(entry["B"], float)
            nu = B.reshape(len(entry["A"]), -1).shape[1]
            lo = np.asarray(entry.get("u_min", [-np.inf] * nu), float)
            hi = np.asarray(entry.get("u_max", [np.inf] * nu), float)
            bounds = (lo, hi)
        return systems.linear_l1_system(entry["A"], entry["B"], entry["q"], entry["r"],
                                        control_bounds=bounds,
                                        name=entry.get("name", "linear_l1"))
    raise _UsageError(f"unknown system entry {entry!r}")


def _schedule_from_config(cfg):
    sch = cfg.get("schedule", {"rule": "constant", "m": 1})
    rule = sch.get("rule", "constant")
    if rule == "constant":
        return sim.HorizonSchedule.constant(int(sch["m"]))
    if rule == "cyclic":
        return sim.HorizonSchedule.cyclic(sch["sequence"])
    if rule == "random":
        return sim.HorizonSchedule.random(sch["M"], int(sch["seed"]))
    raise _UsageError(f"unknown schedule rule {rule!r}")


def _run_to_dict(run: sim.MpcRun) -> dict:
    return {
        "system": run.system,
        "N": run.N,
        "omega": run.omega,
        "epsilon": run.epsilon,
        "seed": run.seed,
        "schedule_realized": list(run.schedule_realized),
        "sigma_times": list(run.sigma_times),
        "states": run.states.tolist(),
        "controls": run.controls.tolist(),
        "stage_costs": run.stage_costs.tolist(),
        "VN_samples": run.VN_samples.tolist(),
        "alpha_estimates": list(run.alpha_estimates),
        "alpha_min": None if np.isnan(run.alpha_min) else run.alpha_min,
    }


def _run_step_rows(run: sim.MpcRun):
    seg = 0
    last_seg = run.n_segments - 1
    for n in range(run.states.shape[0]):
        while seg < last_seg and run.sigma_times[seg + 1] <= n:
            seg += 1
        row = [n]
        row.extend(run.states[n])
        if n < run.controls.shape[0]:
            row.extend(run.controls[n])
            row.append(run.stage_costs[n])
        else:
            # terminal state row: no control applied
            row.extend([0.0] * (run.controls.shape[1] if run.controls.size else 1))
            row.append(0.0)
        row.append(seg)
        yield row


def _cmd_simulate(args) -> int:
    cfg = json.loads(Path(args.config).read_text())
    system = _system_from_config(cfg)
    schedule = _schedule_from_config(cfg)
    N = int(cfg["N"])
    omega = float(cfg.get("omega", 1.0))
    eps = float(cfg.get("epsilon", sim.DEFAULT_EPSILON))
    steps = int(cfg.get("steps", 1))
    max_segments = cfg.get("max_segments")
    if max_segments is not None:
        max_segments = int(max_segments)
    x0_list = [np.asarray(x, float) for x in cfg["x0"]]
    outdir = Path(args.output)
    outdir.mkdir(parents=True, exist_ok=True)

    summary = []
    for idx, x0 in enumerate(x0_list):
        run = sim.run_mpc(system, x0, N, omega, schedule, steps=steps,
                          max_segments=max_segments, epsilon=eps)
        (outdir / f"run_{idx:03d}.json").write_text(json.dumps(_run_to_dict(run), indent=1))
        nx = run.states.shape[1]
        nu = run.controls.shape[1] if run.controls.size else system.control_dim
        header = (["n"] + [f"x{i}" for i in range(nx)] + [f"u{j}" for j in range(nu)]
                  + ["cost", "segment_index"])
        _write_csv(outdir / f"run_{idx:03d}.csv", header, _run_step_rows(run))
        summary.append([idx] + list(x0) + [run.alpha_min if not np.isnan(run.alpha_min) else ""]
                       + [run.n_segments, float(np.linalg.norm(run.states[-1]))])
    nx = len(x0_list[0])
    _write_csv(outdir / "summary.csv",
               ["run"] + [f"x0_{i}" for i in range(nx)] + ["alpha_min", "segments", "final_norm"],
               summary)
    print(f"wrote {len(x0_list)} runs to {outdir}")
    return EXIT_OK


def _verify_suite(fast: bool):
    """Cross-validation checks mirroring the test suite, sized for a CLI run."""
    rng = np.random.default_rng(20240901)
    betas = [
        Kl0Beta.exponential(1.0, 0.5),
        Kl0Beta.exponential(2.0, 0.625),
        Kl0Beta.exponential(5.0, 0.9),
        Kl0Beta.finite([1, 1.25, 1.5, 1.25, 0.5, 0.25, 0.0625]),
        Kl0Beta.finite([1, 1.5, 2 / 3, 1]),
    ]
    Ns = [2, 5, 9] if fast else [2, 3, 5, 7, 9, 11]
    omegas = [1.0, 2.0]
    results = []

    worst = 0.0
    for beta in betas:
        for N in Ns:
            for m in range(1, N):
                for om in omegas:
                    q = AlphaQuery(beta, N, m, om)
                    a_cf = alpha_closed_form(q).alpha
                    for variant in oracle.VARIANTS:
                        worst = max(worst, abs(a_cf - oracle.alpha_lp(q, variant).alpha))
    results.append(("oracle equivalence (3 variants)", worst <= 1e-8, f"max gap {worst:.2e}"))

    worst = 0.0
    for beta in betas:
        for N in Ns:
            for m in range(1, N // 2 + 1):
                a1 = alpha_closed_form(AlphaQuery(beta, N, m, 1.0)).alpha
                a2 = alpha_closed_form(AlphaQuery(beta, N, N - m, 1.0)).alpha
                worst = max(worst, abs(a1 - a2))
    results.append(("omega=1 symmetry", worst <= 1e-10, f"max gap {worst:.2e}"))

    ok = True
    for beta in betas[:3]:
        for N in Ns:
            vals = [alpha_closed_form(AlphaQuery(beta, N, m, 1.0)).alpha for m in range(1, N)]
            for m in range(1, N // 2):
                ok &= vals[m] >= vals[m - 1] - 1e-12
    results.append(("exponential monotonicity in m (omega=1)", ok, ""))

    worst = 0.0
    for _ in range(30 if fast else 200):
        s = rng.uniform(0.05, 0.95)
        N = int(rng.integers(2, 20))
        om = rng.uniform(1.0, 8.0)
        ref = alpha_c1_special(s, N, om)
        vals = [alpha_closed_form(AlphaQuery(Kl0Beta.exponential(1.0, s), N, m, om)).alpha
                for m in range(1, N)]
        worst = max(worst, max(abs(v - ref) for v in vals))
    results.append(("C=1 closed form, m-independent", worst <= 1e-12, f"max gap {worst:.2e}"))

    beta = Kl0Beta.finite([1, 1.5, 2 / 3, 1])
    a52 = alpha_closed_form(AlphaQuery(beta, 5, 2, 8.0))
    a53 = alpha_closed_form(AlphaQuery(beta, 5, 3, 8.0))
    results.append(("saturation case (N=5, omega=8)",
                    a52.saturated and a52.alpha == 1.0 and a53.alpha < 1.0, ""))

    ok = True
    for g in (2.0, 5.0, 10.0):
        res = horizon.min_stabilizing_horizon(g, 1.0, 1)
        ok &= res.N_min == max(2, int(np.ceil(res.bound_value)))
    results.append(("one-step minimal horizon = analytic bound", ok, ""))

    worst = 0.0
    bad = 0
    for _ in range(25 if fast else 100):
        n = int(rng.integers(2, 6))
        mrows = int(rng.integers(1, 4))
        A = rng.normal(size=(mrows, n))
        b = rng.uniform(0.5, 2.0, size=mrows)
        A_full = np.vstack([A, np.ones(n)])
        b_full = np.append(b, rng.uniform(2.0, 6.0))
        senses = ["<="] * (mrows + 1)
        c = rng.normal(size=n)
        tab = lp.LpTableau(objective=c, A=A_full, senses=senses, b=b_full)
        sol = lp.solve(tab)
        ref, _ = brute_force_optimum(tab)
        if sol.status != lp.OPTIMAL or ref is None:
            bad += 1
            continue
        worst = max(worst, abs(sol.objective_value - ref))
    results.append(("simplex vs vertex enumeration", worst <= 1e-8 and bad == 0,
                    f"max gap {worst:.2e}"))

    ok = True
    for beta, N, m in [(Kl0Beta.finite([2.0]), 4, 1), (Kl0Beta.exponential(2.0, 0.625), 5, 2)]:
        q = AlphaQuery(beta, N, m, 1.0)
        inst = oracle.build_alpha_lp(q, oracle.RELAXED)
        rep = oracle.active_set_report(lp.solve(inst.tableau), inst)
        ok &= rep.ok
    results.append(("relaxed optimum: all rows active, lambda > 0", ok, ""))

    results.append(("scalar example controllability inequality",
                    sim.verify_controllability_example(2000 if fast else 10_000), ""))
    return results


def _cmd_verify(args) -> int:
    results = _verify_suite(args.fast)
    width = max(len(name) for name, _, _ in results)
    failed = 0
    for name, ok, note in results:
        status = "PASS" if ok else "FAIL"
        line = f"{name:<{width}}  {status}"
        if note:
            line += f"  {note}"
        print(line)
        failed += 0 if ok else 1
    print(f"{len(results) - failed}/{len(results)} checks passed")
    return EXIT_OK if failed == 0 else EXIT_VERIFY


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        handler = {
            "alpha": _cmd_alpha,
            "oracle": _cmd_oracle,
            "sweep-m": _cmd_sweep_m,
            "region": _cmd_region,
            "min-horizon": _cmd_min_horizon,
            "simulate": _cmd_simulate,
            "verify": _cmd_verify,
        }[args.command]
        return handler(args)
    except _UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (InvalidQuery, ValueError) as exc:
        print(f"invalid request: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except NUMERICAL_ERRORS as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
