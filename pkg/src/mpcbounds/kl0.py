"""Controllability bounds linear in their first argument, and the γ_k aggregates.

A bound β(r, n) = c_n · r describes how fast optimal stage costs can be
driven to zero: exponentially (c_n = C σⁿ) or in finite time (c_n given
explicitly, zero beyond the stored support). Everything downstream (the
closed-form suboptimality index, the LP oracle, the horizon sweeps) only
ever sees the coefficients through γ_k = Σ_{n≤k−2} c_n + ω·c_{k−1}.
"""
from __future__ import annotations

from dataclasses import dataclass, field

__all__ = [
    "Kl0Beta",
    "GammaTable",
    "eval_beta",
    "gamma_table",
    "check_submultiplicative",
]

EXPONENTIAL = "exponential"
FINITE = "finite"


@dataclass(frozen=True)
class Kl0Beta:
    """A KL0 controllability function linear in r.

    kind "exponential": c_n = C σⁿ with overshoot C ≥ 1 and decay σ ∈ (0, 1).
    kind "finite": coefficients c_0, c_1, … stored explicitly, zero past the
    stored list (finite-time and general tabulated bounds share this storage).
    """

    kind: str
    C: float = 0.0
    sigma: float = 0.0
    coeffs: tuple[float, ...] = field(default=())

    def __post_init__(self):
        if self.kind == EXPONENTIAL:
            if not self.C >= 1.0:
                raise ValueError(f"exponential overshoot C must be >= 1, got {self.C}")
            if not 0.0 < self.sigma < 1.0:
                raise ValueError(f"decay rate sigma must lie in (0, 1), got {self.sigma}")
        elif self.kind == FINITE:
            cs = tuple(float(c) for c in self.coeffs)
            if any(c < 0 for c in cs):
                raise ValueError("finite-time coefficients must be nonnegative")
            if cs and cs[0] <= 0.0 and any(c > 0 for c in cs[1:]):
                raise ValueError("c_0 must be positive when later coefficients are nonzero")
            object.__setattr__(self, "coeffs", cs)
        else:
            raise ValueError(f"unknown kind {self.kind!r}")

    @classmethod
    def exponential(cls, C: float, sigma: float) -> "Kl0Beta":
        return cls(kind=EXPONENTIAL, C=float(C), sigma=float(sigma))

    @classmethod
    def finite(cls, coeffs) -> "Kl0Beta":
        return cls(kind=FINITE, coeffs=tuple(float(c) for c in coeffs))

    @classmethod
    def from_config(cls, cfg: dict) -> "Kl0Beta":
        """Parse {"kind":"exponential","C":..,"sigma":..} or {"kind":"finite","c":[..]}."""
        kind = cfg.get("kind")
        if kind == EXPONENTIAL:
            return cls.exponential(cfg["C"], cfg["sigma"])
        if kind == FINITE:
            return cls.finite(cfg["c"])
        raise ValueError(f"unknown beta kind {kind!r}")

    def to_config(self) -> dict:
        if self.kind == EXPONENTIAL:
            return {"kind": EXPONENTIAL, "C": self.C, "sigma": self.sigma}
        return {"kind": FINITE, "c": list(self.coeffs)}

    def coefficient(self, n: int) -> float:
        """c_n, the factor multiplying r in β(r, n)."""
        if n < 0:
            raise ValueError("n must be nonnegative")
        if self.kind == EXPONENTIAL:
            return self.C * self.sigma**n
        return self.coeffs[n] if n < len(self.coeffs) else 0.0

    def coefficients(self, count: int) -> list[float]:
        return [self.coefficient(n) for n in range(count)]


@dataclass(frozen=True)
class GammaTable:
    """γ_1..γ_N under terminal weight ω; gammas[k-1] holds γ_k."""

    omega: float
    gammas: tuple[float, ...]

    def __getitem__(self, k: int) -> float:
        """1-indexed access: table[k] = γ_k."""
        if not 1 <= k <= len(self.gammas):
            raise IndexError(f"gamma index {k} outside 1..{len(self.gammas)}")
        return self.gammas[k - 1]

    def __len__(self) -> int:
        return len(self.gammas)


def eval_beta(beta: Kl0Beta, r: float, n: int) -> float:
    """β(r, n) = c_n · r."""
    if r < 0:
        raise ValueError("r must be nonnegative")
    return beta.coefficient(n) * r


def gamma_table(beta: Kl0Beta, N: int, omega: float = 1.0) -> GammaTable:
    """γ_k = Σ_{n=0}^{k−2} c_n + ω·c_{k−1} for k = 1..N.

    The running partial sum is Kahan-compensated: γ_N feeds products of
    near-equal terms in the closed form, so long-horizon sweeps need the
    summation stable.
    """
    if N < 1:
        raise ValueError("N must be >= 1")
    if omega < 1.0:
        raise ValueError("omega must be >= 1")
    cs = beta.coefficients(N)
    gammas = []
    run = 0.0
    comp = 0.0  # Kahan carry
    for k in range(1, N + 1):
        c_prev = cs[k - 1]
        gammas.append(run + omega * c_prev)
        y = c_prev - comp
        t = run + y
        comp = (t - run) - y
        run = t
    return GammaTable(omega=float(omega), gammas=tuple(gammas))


def check_submultiplicative(beta: Kl0Beta, horizon: int) -> bool:
    """True iff c_{n+m} ≤ c_n·c_m for all n + m ≤ horizon.

    Always true for exponential bounds (σ^{n+m} = σⁿσᵐ and C ≥ 1); for
    finite-time bounds the pairwise check runs over the requested horizon.
    """
    if horizon < 1:
        raise ValueError("horizon must be >= 1")
    if beta.kind == EXPONENTIAL:
        return True
    cs = beta.coefficients(horizon + 1)
    for n in range(horizon + 1):
        for m in range(horizon + 1 - n):
            if cs[n + m] > cs[n] * cs[m] + 1e-12 * max(1.0, cs[n] * cs[m]):
                return False
    return True
