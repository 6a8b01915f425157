import numpy as np
import pytest

from mpcbounds import (
    AlphaQuery,
    DegenerateDenominator,
    InvalidQuery,
    Kl0Beta,
    alpha_c1_special,
    alpha_closed_form,
    alpha_lp,
    alpha_onestep,
    alpha_onestep_finite,
)

FIG3 = Kl0Beta.finite([1, 1.25, 1.5, 1.25, 0.5, 0.25, 0.0625])
FOUR_COEFF = Kl0Beta.finite([1, 1.5, 2 / 3, 1])
BETA1 = Kl0Beta.finite([1.24, 1.14, 1.04])
BETA2 = Kl0Beta.finite([1, 1.2, 1.1, 1.1, 1.2, 1, 0.75, 0.25])


def alpha(beta, N, m, omega=1.0):
    return alpha_closed_form(AlphaQuery(beta, N, m, omega)).alpha


def test_saturated_single_coefficient():
    res = alpha_closed_form(AlphaQuery(Kl0Beta.finite([0.5]), 3, 1, 1.0))
    assert res.alpha == 1.0 and res.saturated


def test_one_step_gamma_two():
    res = alpha_closed_form(AlphaQuery(Kl0Beta.finite([2.0]), 3, 1, 1.0))
    assert not res.saturated
    assert res.alpha == pytest.approx(2 / 3, abs=1e-14)
    assert alpha_onestep_finite(2.0, 3, 1.0) == pytest.approx(res.alpha, abs=1e-12)


def test_exponential_no_overshoot():
    res = alpha_closed_form(AlphaQuery(Kl0Beta.exponential(1.0, 0.5), 4, 2, 1.0))
    assert res.alpha == pytest.approx(0.9375, abs=1e-14)


def test_c1_special_values():
    assert alpha_c1_special(0.5, 4, 1.0) == pytest.approx(0.9375, abs=1e-15)
    assert alpha_c1_special(0.5, 2, 2.0) == 1.0  # eta = 0
    assert alpha_c1_special(0.9, 2, 1.0) == pytest.approx(0.19, abs=1e-14)


def test_onestep_examples():
    assert alpha_onestep_finite(2.0, 2, 1.0) == pytest.approx(0.0, abs=1e-14)
    assert alpha_onestep_finite(1.0, 9, 1.0) == 1.0
    assert alpha_onestep_finite(2.0, 3, 1.0) == pytest.approx(alpha(Kl0Beta.finite([2.0]), 3, 1))


def test_symmetry_omega_one():
    for beta in (FIG3, FOUR_COEFF, BETA1, BETA2,
                 Kl0Beta.exponential(2.0, 0.625), Kl0Beta.exponential(5.0, 0.9)):
        for N in range(2, 13):
            for m in range(1, N // 2 + 1):
                assert alpha(beta, N, m) == pytest.approx(alpha(beta, N, N - m), abs=1e-10)


def test_one_sided_symmetry_general_omega():
    # exponential bounds, and finite-time bounds supported on {0, 1, 2}
    betas = [Kl0Beta.exponential(2.0, 0.625), Kl0Beta.exponential(8.0, 0.3),
             Kl0Beta.finite([1.3, 1.1, 0.9]), Kl0Beta.finite([2.0, 1.5])]
    for beta in betas:
        for N in range(3, 11):
            for m in range(1, N // 2 + 1):
                for om in (1.0, 1.3, 2.5, 6.0):
                    assert alpha(beta, N, m, om) <= alpha(beta, N, N - m, om) + 1e-12


def test_monotonicity_in_m():
    # exponential with omega = 1 or omega >= 1/(1-sigma)
    for C in (1.2, 2.0, 5.0):
        for s in (0.1, 0.5, 0.8):
            for om in (1.0, 1.0 / (1 - s), 1.0 / (1 - s) + 2.0):
                beta = Kl0Beta.exponential(C, s)
                for N in range(4, 13):
                    for m in range(1, N // 2):
                        assert alpha(beta, N, m + 1, om) >= alpha(beta, N, m, om) - 1e-12
    # finite-time supported on {0, 1}
    for beta in (Kl0Beta.finite([2.0, 1.5]), Kl0Beta.finite([1.5, 0.5])):
        for om in (1.0, 1.5, 4.0):
            for N in range(4, 13):
                for m in range(1, N // 2):
                    assert alpha(beta, N, m + 1, om) >= alpha(beta, N, m, om) - 1e-12


def test_monotonicity_counterexample_preserved():
    # c = [1.24, 1.14, 1.04] loses monotonicity at N = 4, omega = 1
    vals = [alpha(BETA1, 4, m) for m in (1, 2, 3)]
    assert vals[1] < vals[0]
    # frozen values, cross-checked against all three LP oracle variants
    assert vals[0] == pytest.approx(0.010000534531981131, abs=1e-9)
    assert vals[1] == pytest.approx(-0.005624324451116713, abs=1e-9)
    assert vals[2] == pytest.approx(vals[0], abs=1e-10)


def test_large_weight_saturates_small_m_only():
    # c = [1, 3/2, 2/3, 1] at omega = 8: m = 2 saturates, m = 3 does not
    r52 = alpha_closed_form(AlphaQuery(FOUR_COEFF, 5, 2, 8.0))
    r53 = alpha_closed_form(AlphaQuery(FOUR_COEFF, 5, 3, 8.0))
    assert r52.saturated and r52.alpha == 1.0
    assert not r53.saturated and r53.alpha < 1.0


def test_m_independence_at_c_equal_one():
    rng = np.random.default_rng(7)
    for _ in range(100):
        s = rng.uniform(0.02, 0.98)
        N = int(rng.integers(2, 25))
        om = rng.uniform(1.0, 10.0)
        ref = alpha_c1_special(s, N, om)
        beta = Kl0Beta.exponential(1.0, s)
        vals = [alpha(beta, N, m, om) for m in range(1, N)]
        assert max(abs(v - ref) for v in vals) <= 1e-12


def test_convergence_in_N():
    for beta in (Kl0Beta.exponential(2.0, 0.625), Kl0Beta.finite([2.5, 1.5, 0.5])):
        for m in (1, 2):
            N = m + 1
            while alpha(beta, max(N, m + 1), min(m, N - 1)) < 0.99:
                N += 1
                assert N < 200, "alpha failed to approach 1"
            assert alpha(beta, N, m) >= 0.99


def test_log_space_path_matches_lp():
    # N > 40 triggers the log-space product path; LP oracle is the reference
    beta = Kl0Beta.exponential(2.0, 0.9)
    q = AlphaQuery(beta, 44, 3, 1.5)
    a_cf = alpha_closed_form(q).alpha
    a_lp = alpha_lp(q, "reduced").alpha
    assert a_cf == pytest.approx(a_lp, abs=1e-8)


def test_log_space_path_matches_plain_onestep():
    # large gamma triggers log-space in the generic formula; the one-step
    # rearrangement never overflows and serves as the independent reference
    g = 2.0e3
    for N in (50, 120):
        q = AlphaQuery(Kl0Beta.finite([g]), N, 1, 1.0)
        assert alpha_closed_form(q).alpha == pytest.approx(
            alpha_onestep_finite(g, N), rel=1e-10)


def test_onestep_long_horizon_finite():
    v = alpha_onestep(1000.0, 6906, 1, 1.0)
    assert np.isfinite(v) and 0 <= v <= 1
    assert alpha_onestep(1000.0, 6905, 1, 1.0) < 0


def test_invalid_queries():
    with pytest.raises(InvalidQuery):
        AlphaQuery(Kl0Beta.finite([2.0]), 3, 3, 1.0)
    with pytest.raises(InvalidQuery):
        AlphaQuery(Kl0Beta.finite([2.0]), 1, 1, 1.0)
    with pytest.raises(InvalidQuery):
        AlphaQuery(Kl0Beta.finite([2.0]), 3, 1, 0.5)


def test_non_submultiplicative_guard_and_flag():
    beta = Kl0Beta.finite([1, 0.5, 0.6])
    q = AlphaQuery(beta, 4, 1, 1.0)
    with pytest.raises(InvalidQuery):
        alpha_closed_form(q)
    res = alpha_closed_form(q, allow_non_submultiplicative=True)
    assert res.lower_bound_only and res.alpha <= 1.0


def test_degenerate_denominator():
    # front coefficients below 1 push two gamma factors under 1; the second
    # denominator goes negative, which the formula must refuse
    beta = Kl0Beta.finite([0.2, 0.05, 0.05, 3.0])
    q = AlphaQuery(beta, 4, 3, 1.0)
    with pytest.raises(DegenerateDenominator):
        alpha_closed_form(q, allow_non_submultiplicative=True)
