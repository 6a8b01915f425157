"""Multistep MPC simulator with time-varying control horizons.

A run replans at the transmission times σ(k) = m_0 + … + m_{k−1}, applies the
first m_k optimal controls open-loop, and records everything needed for the
a-posteriori suboptimality estimate: per-segment stage costs and V_N samples.
Segments whose cost sum stays below the practical-stability floor ε are
excluded from the estimate: below that floor the closed loop has reached the
practical region and the samples carry rollout noise instead of signal.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .systems import SystemModel, solve_ocp

__all__ = [
    "HorizonSchedule",
    "MpcRun",
    "LyapunovReport",
    "NoValidSegments",
    "sigma",
    "phi",
    "run_mpc",
    "estimate_alpha",
    "lyapunov_check",
    "verify_controllability_example",
]

DEFAULT_EPSILON = 1e-4


class NoValidSegments(Exception):
    """Every segment's cost sum sat below the practical-stability floor."""


@dataclass(frozen=True)
class HorizonSchedule:
    """Control-horizon sequence generator over an admissible set M.

    rule "constant": m_i ≡ m. rule "cyclic": repeats `sequence`. rule
    "random": seeded uniform draws from M (seed recorded for reproducibility).
    """

    M: tuple[int, ...]
    rule: str = "constant"
    m: int | None = None
    sequence: tuple[int, ...] = ()
    seed: int | None = None

    def __post_init__(self):
        M = tuple(sorted(set(int(v) for v in self.M)))
        if not M or M[0] < 1:
            raise ValueError("M must be a nonempty set of positive horizons")
        object.__setattr__(self, "M", M)
        if self.rule == "constant":
            mm = self.m if self.m is not None else M[-1]
            if mm not in M:
                raise ValueError(f"constant horizon {mm} not in M={M}")
            object.__setattr__(self, "m", int(mm))
        elif self.rule == "cyclic":
            seq = tuple(int(v) for v in self.sequence)
            if not seq or any(v not in M for v in seq):
                raise ValueError("cyclic schedule needs a nonempty sequence inside M")
            object.__setattr__(self, "sequence", seq)
        elif self.rule == "random":
            if self.seed is None:
                raise ValueError("random schedule requires a seed")
        else:
            raise ValueError(f"unknown schedule rule {self.rule!r}")

    @property
    def m_star(self) -> int:
        return self.M[-1]

    @classmethod
    def constant(cls, m: int) -> "HorizonSchedule":
        return cls(M=(m,), rule="constant", m=m)

    @classmethod
    def cyclic(cls, sequence) -> "HorizonSchedule":
        seq = tuple(int(v) for v in sequence)
        return cls(M=tuple(sorted(set(seq))), rule="cyclic", sequence=seq)

    @classmethod
    def random(cls, M, seed: int) -> "HorizonSchedule":
        return cls(M=tuple(M), rule="random", seed=seed)

    def realize(self, count: int) -> list[int]:
        """First `count` control horizons m_0..m_{count−1} (deterministic)."""
        if self.rule == "constant":
            return [self.m] * count
        if self.rule == "cyclic":
            reps = -(-count // len(self.sequence))
            return list(self.sequence * reps)[:count]
        rng = np.random.default_rng(self.seed)
        return [int(v) for v in rng.choice(self.M, size=count)]


def sigma(ms, k: int) -> int:
    """σ(k) = Σ_{j<k} m_j, the k-th transmission time (σ(0) = 0)."""
    ms = list(ms)
    if k < 0 or k > len(ms):
        raise ValueError(f"k={k} outside the realized schedule of length {len(ms)}")
    return int(np.sum(ms[:k], dtype=int))


def phi(ms, n: int) -> int:
    """φ(n) = max{σ(k) : σ(k) ≤ n}, the last transmission time before n."""
    if n < 0:
        raise ValueError("n must be nonnegative")
    t = 0
    for m in ms:
        if t + m > n:
            return t
        t += m
    if t <= n:
        return t
    return 0


@dataclass
class MpcRun:
    system: str
    N: int
    omega: float
    epsilon: float
    schedule_realized: list[int]
    sigma_times: list[int]          # sigma(0..K), length segments+1
    states: np.ndarray              # (sigma(K)+1, state_dim)
    controls: np.ndarray            # (sigma(K), control_dim)
    stage_costs: np.ndarray         # (sigma(K),)
    VN_samples: np.ndarray          # V_N(x(sigma(k))), length segments+1
    alpha_estimates: list[float] = field(default_factory=list)  # retained segments only
    alpha_min: float = float("nan")
    seed: int | None = None

    @property
    def n_segments(self) -> int:
        return len(self.schedule_realized)

    def segment_cost(self, k: int) -> float:
        a, b = self.sigma_times[k], self.sigma_times[k + 1]
        return float(np.sum(self.stage_costs[a:b]))


def run_mpc(sys: SystemModel, x0, N: int, omega: float = 1.0,
            schedule: HorizonSchedule | None = None, steps: int = 1,
            max_segments: int | None = None,
            epsilon: float = DEFAULT_EPSILON) -> MpcRun:
    """Closed-loop multistep MPC until the trajectory covers `steps` time
    steps (or `max_segments` replanning segments, whichever binds first)."""
    if max_segments is None and steps < 1:
        raise ValueError("steps must be >= 1")
    if max_segments is not None and max_segments < 1:
        raise ValueError("max_segments must be >= 1")
    if schedule is None:
        schedule = HorizonSchedule.constant(1)
    if schedule.m_star > N - 1:
        raise ValueError(f"largest control horizon {schedule.m_star} exceeds N-1 = {N - 1}")

    x = np.asarray(x0, float).reshape(sys.state_dim)
    states = [x.copy()]
    controls = []
    costs = []
    vns = []
    ms = []
    sigmas = [0]
    # every segment advances time by >= 1, so this bounds the segment count
    plan = schedule.realize(max_segments if max_segments is not None else steps)
    k = 0
    while True:
        # segment-count mode when max_segments given, time-cover mode otherwise
        if max_segments is not None:
            if k >= max_segments:
                break
        elif sigmas[-1] >= steps:
            break
        m_k = plan[k]
        sol = solve_ocp(sys, x, N, omega)
        vns.append(sol.value)
        for i in range(m_k):
            u = sol.controls[i]
            costs.append(sys.stage_cost(x, u))
            x = np.asarray(sys.step(x, u), float).reshape(sys.state_dim)
            states.append(x.copy())
            controls.append(np.array(u, float))
        ms.append(m_k)
        sigmas.append(sigmas[-1] + m_k)
        k += 1
    vns.append(solve_ocp(sys, x, N, omega).value)

    run = MpcRun(system=sys.name, N=N, omega=float(omega), epsilon=float(epsilon),
                 schedule_realized=ms, sigma_times=sigmas,
                 states=np.array(states), controls=np.array(controls),
                 stage_costs=np.array(costs), VN_samples=np.array(vns),
                 seed=schedule.seed)
    try:
        run.alpha_min = estimate_alpha(run, epsilon)
        run.alpha_estimates = _segment_alphas(run, epsilon)[0]
    except NoValidSegments:
        run.alpha_min = float("nan")
        run.alpha_estimates = []
    return run


def _segment_alphas(run: MpcRun, epsilon: float):
    retained, skipped = [], 0
    for k in range(run.n_segments):
        den = run.segment_cost(k)
        if den <= epsilon:
            skipped += 1
            continue
        retained.append((run.VN_samples[k] - run.VN_samples[k + 1]) / den)
    return retained, skipped


def estimate_alpha(run: MpcRun, epsilon: float | None = None) -> float:
    """min over retained segments of (V_N drop) / (segment cost), capped at 1.

    Segments with cost sum ≤ ε are inside the practical region and skipped;
    raises NoValidSegments when that leaves nothing."""
    if run.n_segments < 1:
        raise NoValidSegments("run contains no segments")
    eps = run.epsilon if epsilon is None else epsilon
    retained, _ = _segment_alphas(run, eps)
    if not retained:
        raise NoValidSegments(f"all {run.n_segments} segments below epsilon={eps}")
    return min(1.0, min(retained))


@dataclass(frozen=True)
class LyapunovReport:
    alpha_star: float
    checked_segments: int
    skipped_practical: int
    violations: tuple[int, ...]   # segment indices
    worst_slack: float            # most positive lhs-rhs difference seen


def lyapunov_check(sys: SystemModel, run: MpcRun, alpha_star: float,
                   epsilon: float | None = None, slack: float = 1e-9) -> LyapunovReport:
    """Verify V_N(x(σ(k+1))) ≤ V_N(x(σ(k))) − α*·V_{m_k}(x(σ(k))) per segment.

    V_{m_k} is solved fresh with horizon m_k and ω = 1. Segments inside the
    practical region (cost ≤ ε) are reported separately, not failed: below
    the floor the V_N samples are rollout noise by construction.
    """
    eps = run.epsilon if epsilon is None else epsilon
    violations = []
    worst = -np.inf
    checked = 0
    skipped = 0
    for k in range(run.n_segments):
        if run.segment_cost(k) <= eps:
            skipped += 1
            continue
        checked += 1
        lhs = run.VN_samples[k + 1]
        rhs = run.VN_samples[k]
        if alpha_star != 0.0:
            x_k = run.states[run.sigma_times[k]]
            vm = solve_ocp(sys, x_k, run.schedule_realized[k], omega=1.0).value
            rhs = rhs - alpha_star * vm
        gap = lhs - rhs
        worst = max(worst, gap)
        if gap > slack:
            violations.append(k)
    return LyapunovReport(alpha_star=float(alpha_star), checked_segments=checked,
                          skipped_practical=skipped, violations=tuple(violations),
                          worst_slack=float(worst))


def verify_controllability_example(n_points: int = 10_000) -> bool:
    """Check ℓ(x − x³) ≤ e^{−1}·ℓ(x) on a dense grid of x ∈ (−1, 1) \\ {0}.

    Both sides underflow near 0, so the comparison runs on the exponents:
    −1/(2y²) ≤ −1 − 1/(2x²) with y = x − x³.
    """
    xs = np.linspace(-1.0, 1.0, n_points + 2)[1:-1]
    xs = xs[np.abs(xs) > 1e-12]
    y = xs - xs**3
    lhs = -1.0 / (2.0 * y * y)
    rhs = -1.0 - 1.0 / (2.0 * xs * xs)
    return bool(np.all(lhs <= rhs + 1e-12))
