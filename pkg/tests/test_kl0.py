import numpy as np
import pytest

from mpcbounds import Kl0Beta, check_submultiplicative, eval_beta, gamma_table


def test_eval_beta_exponential():
    b = Kl0Beta.exponential(2.0, 0.5)
    assert eval_beta(b, 1.0, 2) == pytest.approx(0.5)


def test_eval_beta_finite_tail_is_zero():
    b = Kl0Beta.finite([3.7])
    assert eval_beta(b, 3.0, 1) == 0.0
    assert eval_beta(b, 3.0, 0) == pytest.approx(11.1)


def test_eval_beta_zero_r():
    b = Kl0Beta.exponential(1.0, 0.5)
    assert eval_beta(b, 0.0, 7) == 0.0


def test_eval_beta_linearity():
    rng = np.random.default_rng(3)
    for b in (Kl0Beta.exponential(2.5, 0.7), Kl0Beta.finite([1, 0.4, 0.2])):
        for _ in range(50):
            r = rng.uniform(0, 10)
            a = rng.uniform(0, 5)
            n = int(rng.integers(0, 6))
            assert eval_beta(b, a * r, n) == pytest.approx(a * eval_beta(b, r, n), rel=1e-15)


def test_gamma_table_two_term_sum():
    gt = gamma_table(Kl0Beta.exponential(2.0, 0.5), 2, 1.0)
    assert gt[2] == pytest.approx(3.0)
    assert gt[1] == pytest.approx(2.0)


def test_gamma_table_four_coefficients():
    # c = [1, 3/2, 2/3, 1]: direct summation gives gamma_4 = 25/6
    gt = gamma_table(Kl0Beta.finite([1, 1.5, 2 / 3, 1]), 4, 1.0)
    assert gt[4] == pytest.approx(25 / 6, rel=1e-15)


def test_gamma_table_weighted_final_term():
    gt = gamma_table(Kl0Beta.finite([1, 1.5, 2 / 3, 1]), 4, 7.5)
    assert gt[3] == pytest.approx(7.5, rel=1e-12)


def test_gamma_one_equals_weighted_c0():
    gt = gamma_table(Kl0Beta.finite([2.0, 1.0]), 3, 1.5)
    assert gt[1] == pytest.approx(3.0)


def test_gamma_exponential_closed_form():
    # gamma_k = C (1 - eta sigma^(k-1)) / (1 - sigma), eta = 1 + sigma*omega - omega
    for C, s, om in [(1.0, 0.5, 1.0), (2.0, 0.625, 1.0), (3.0, 0.9, 2.5), (1.5, 0.3, 4.0)]:
        N = 25
        gt = gamma_table(Kl0Beta.exponential(C, s), N, om)
        eta = 1 + s * om - om
        for k in range(1, N + 1):
            ref = C * (1 - eta * s ** (k - 1)) / (1 - s)
            assert gt[k] == pytest.approx(ref, rel=1e-12)


def test_gamma_monotone_limit_omega_one():
    C, s = 2.0, 0.7
    gt = gamma_table(Kl0Beta.exponential(C, s), 200, 1.0)
    g = np.array(gt.gammas)
    assert np.all(np.diff(g) >= -1e-12)  # nondecreasing up to rounding
    assert g[50] < C / (1 - s)  # approaches the limit from below
    assert g[-1] == pytest.approx(C / (1 - s), rel=1e-14)


def test_submultiplicative_exponential_always():
    assert check_submultiplicative(Kl0Beta.exponential(1.0, 0.9), 30)
    assert check_submultiplicative(Kl0Beta.exponential(50.0, 0.1), 30)


def test_submultiplicative_finite_cases():
    assert check_submultiplicative(Kl0Beta.finite([1, 1.5, 2 / 3, 1]), 10)
    # c_2 = 0.6 > c_1 * c_1 = 0.25
    assert not check_submultiplicative(Kl0Beta.finite([1, 0.5, 0.6]), 10)


def test_validation():
    with pytest.raises(ValueError):
        Kl0Beta.exponential(0.5, 0.5)
    with pytest.raises(ValueError):
        Kl0Beta.exponential(2.0, 1.0)
    with pytest.raises(ValueError):
        Kl0Beta.finite([1.0, -0.1])
    with pytest.raises(ValueError):
        Kl0Beta.finite([0.0, 1.0])
    with pytest.raises(ValueError):
        gamma_table(Kl0Beta.finite([1.0]), 3, 0.5)


def test_config_round_trip():
    for cfg in ({"kind": "exponential", "C": 2.0, "sigma": 0.625},
                {"kind": "finite", "c": [1.0, 1.25, 1.5, 1.25, 0.5, 0.25, 0.0625]}):
        b = Kl0Beta.from_config(cfg)
        assert Kl0Beta.from_config(b.to_config()) == b
