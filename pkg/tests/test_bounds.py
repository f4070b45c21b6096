import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lassocorr.bounds import (
    HighCorrParams,
    REViolatedError,
    event_T_alpha_estimate,
    event_T_alpha_statistic,
    fast_rate_bound,
    high_corr_bound,
    high_corr_bound_display,
    improved_slow_rate,
    re_constant_estimate,
    re_ratio,
    slow_rate_bound,
)
from lassocorr.correlation import dual_norm_sup
from lassocorr.design import DesignMatrix, gen_clustered, gen_equicorrelated, gen_instance
from lassocorr.lasso import lars_lasso_path, solve_many
from lassocorr.simcore import derive_seed, generator


def test_slow_and_improved_rates():
    b0 = np.array([1.0, -2.0, 0.0])
    assert slow_rate_bound(0.5, b0) == 3.0
    assert improved_slow_rate(0.5, b0, np.array([1.1, -2.0, 5.0])) == pytest.approx(0.1)
    assert improved_slow_rate(0.5, b0, np.zeros(3)) == 3.0
    with pytest.raises(ValueError):
        slow_rate_bound(-1.0, b0)
    with pytest.raises(ValueError):
        improved_slow_rate(1.0, b0, np.zeros(2))


def test_fast_rate():
    assert fast_rate_bound(2.0, 3, 0.5, 4) == 12.0
    with pytest.raises(REViolatedError):
        fast_rate_bound(2.0, 3, 0.0, 4)


def test_re_orthogonal_is_one():
    X = np.sqrt(6) * np.eye(6)
    est = re_constant_estimate(X, 2, budget=20)
    assert est.phi_hat == pytest.approx(1.0, abs=1e-12)


def test_re_duplicate_columns_is_zero():
    D = gen_clustered(10, 8, 0.0, 1)
    est = re_constant_estimate(D, 1, budget=5)
    assert est.phi_hat == pytest.approx(0.0, abs=1e-12)
    with pytest.raises(REViolatedError):
        fast_rate_bound(1.0, 1, est.phi_hat, 10)


def test_re_witness_and_monotone_budget():
    D = gen_equicorrelated(15, 30, 0.7, 2)
    small = re_constant_estimate(D, 3, budget=10, seed=4)
    big = re_constant_estimate(D, 3, budget=40, seed=4)
    assert big.phi_hat <= small.phi_hat
    J0, delta = big.witness
    mask = np.zeros(30, dtype=bool)
    mask[list(J0)] = True
    assert len(J0) <= 3
    assert np.abs(delta[~mask]).sum() <= 3 * np.abs(delta[mask]).sum() + 1e-9
    assert re_ratio(D, J0, delta) == pytest.approx(big.phi_hat, rel=1e-12)


def test_re_is_upper_estimate_of_support_restricted_minimum():
    # with the off-support block zero the ratio is the smallest singular value
    D = gen_equicorrelated(12, 6, 0.3, 3)
    est = re_constant_estimate(D, 6, budget=5)
    smin = np.linalg.svd(D.X, compute_uv=False)[-1] / np.sqrt(12)
    assert est.phi_hat <= smin + 1e-9
    assert est.phi_hat >= smin - 1e-9


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**31 - 1), st.sampled_from([0.0, 0.5, 0.9]), st.floats(0.3, 3.0))
def test_bounds_hold_on_event(seed, rho, sigma):
    D = gen_equicorrelated(10, 15, rho, seed)
    inst = gen_instance(D, 3, sigma, derive_seed(seed, 1))
    X, b0 = D.X, inst.beta0
    eps = (inst.Y - X @ b0) / sigma
    lam0 = 2 * sigma * dual_norm_sup(X, eps)
    lams = lam0 * np.array([1.0, 1.5, 3.0])
    B = solve_many(lars_lasso_path(X, inst.Y), lams)
    for lam, b in zip(lams, B):
        pe = float(np.sum((X @ (b - b0)) ** 2))
        imp = improved_slow_rate(lam, b0, b)
        assert pe <= imp + 1e-8
        assert imp <= slow_rate_bound(lam, b0) + 1e-8


# -- high correlation formulas -------------------------------------------------


def test_high_corr_value():
    lam, bound = high_corr_bound(HighCorrParams(0.5, lambda_tilde=10.0), 100, 4.0)
    assert lam == pytest.approx(2.0 ** (4 / 3) * 4.0 ** (-1 / 3), rel=1e-14)
    assert bound == pytest.approx(10.5 * lam * 4.0, rel=1e-14)


@settings(max_examples=200, deadline=None)
@given(st.floats(0.01, 0.99), st.floats(0.1, 100), st.integers(1, 10_000), st.floats(0.01, 100))
def test_high_corr_identities(alpha, lt, n, l1):
    lam, bound = high_corr_bound(HighCorrParams(alpha, lambda_tilde=lt), n, l1)
    assert abs(bound - 10.5 * lam * l1) <= 1e-12 * bound
    base = (2 * lt * n ** (alpha - 1)) ** (2 / (1 + alpha))
    assert abs(lam - base * l1 ** ((alpha - 1) / (1 + alpha))) <= 1e-12 * lam


@settings(max_examples=100, deadline=None)
@given(st.floats(0.01, 0.99), st.floats(0.1, 10), st.floats(0.1, 10), st.integers(1, 1000),
       st.floats(0.01, 0.99), st.floats(0.1, 50))
def test_display_form_relation(alpha, sigma, C, n, kappa, l1):
    params = HighCorrParams(alpha, C=C, kappa=kappa, sigma=sigma)
    _, bound = high_corr_bound(params, n, l1)
    disp = high_corr_bound_display(sigma, C, alpha, n, kappa, l1)
    assert abs(bound - 2 ** (2 / (1 + alpha)) * disp) <= 1e-12 * bound


def test_high_corr_exponent_limits():
    lt, n, l1 = 3.0, 50, 7.0
    lam, bound = high_corr_bound(HighCorrParams(1 - 1e-13, lambda_tilde=lt), n, l1)
    assert lam == pytest.approx(2 * lt, rel=1e-11)
    assert bound == pytest.approx(10.5 * 2 * lt * l1, rel=1e-11)
    lam, bound = high_corr_bound(HighCorrParams(1e-13, lambda_tilde=lt), n, l1)
    assert lam == pytest.approx((2 * lt / n) ** 2 / l1, rel=1e-11)
    assert bound == pytest.approx(10.5 * (2 * lt / n) ** 2, rel=1e-11)


def test_high_corr_validation():
    for a in (0.0, 1.0, -0.2):
        with pytest.raises(ValueError):
            HighCorrParams(a, lambda_tilde=1.0)
    with pytest.raises(ValueError):
        HighCorrParams(0.5).lambda_tilde_for(10)
    with pytest.raises(ValueError):
        high_corr_bound(HighCorrParams(0.5, lambda_tilde=1.0), 10, 0.0)


def test_event_T_alpha():
    D = gen_clustered(10, 20, 0.0, 1)
    eps = generator(2).standard_normal(10)
    b = np.zeros(20)
    assert event_T_alpha_statistic(D, eps, 1.0, 0.5, b) == 0.0
    b[0] = 2.0
    expected = 2 * abs(eps @ D.X[:, 0]) * 2 / ((2 * np.sqrt(10)) ** 0.5 * 2**0.5)
    assert event_T_alpha_statistic(D, eps, 1.0, 0.5, b) == pytest.approx(expected, rel=1e-12)
    assert event_T_alpha_estimate(D, 1.0, 0.5, 1e9, draws=20, search_budget=20) == 1.0
    assert event_T_alpha_estimate(D, 1.0, 0.5, 0.0, draws=20, search_budget=20) == 0.0
