import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lassocorr.design import expand_design, gen_equicorrelated, gen_instance
from lassocorr.lasso import (
    ConvergenceError,
    coordinate_descent_solve,
    kkt_check,
    lars_lasso_path,
    optimal_lambda,
    path_to_csv,
    pe_curve,
    prediction_error,
    solve_at,
    solve_many,
)
from lassocorr.simcore import derive_seed, generator


def soft(z, t):
    return np.sign(z) * np.maximum(np.abs(z) - t, 0.0)


def random_instance(seed, n=None, p=None):
    g = generator(seed)
    n = n or int(g.integers(2, 31))
    p = p or int(g.integers(1, 31))
    X = g.standard_normal((n, p))
    X *= np.sqrt(n) / np.linalg.norm(X, axis=0)
    Y = X[:, : min(3, p)].sum(axis=1) + g.standard_normal(n)
    return X, Y


def orthogonal_design(n, seed):
    Q, _ = np.linalg.qr(generator(seed).standard_normal((n, n)))
    return np.sqrt(n) * Q


def check_path(X, Y, path, tol=1e-8):
    for k in range(len(path)):
        for lam in (path.knots[k], 0.5 * (path.knots[k] + path.knots[k + 1])):
            rep = kkt_check(X, Y, solve_at(path, lam), lam, tol)
            assert rep.passed, (k, lam, rep)


def test_start_knot_and_zero_solution():
    X, Y = random_instance(1, 10, 8)
    path = lars_lasso_path(X, Y)
    assert path.knots[0] == pytest.approx(2 * np.max(np.abs(X.T @ Y)), rel=1e-14)
    assert np.all(solve_at(path, path.knots[0]) == 0)
    assert np.all(solve_at(path, 2 * path.knots[0]) == 0)
    assert path.knots[-1] == 0.0
    assert np.all(np.diff(path.knots) < 0)


def test_zero_response():
    X, _ = random_instance(2, 6, 4)
    path = lars_lasso_path(X, np.zeros(6))
    assert len(path) == 0 and path.knots.tolist() == [0.0]
    assert np.all(solve_at(path, 0.0) == 0) and np.all(solve_at(path, 3.0) == 0)


def test_orthogonal_soft_threshold_closed_form():
    n = 12
    X = orthogonal_design(n, 3)
    Y = generator(4).standard_normal(n) * 3
    path = lars_lasso_path(X, Y)
    z = X.T @ Y
    for lam in np.linspace(0, path.knots[0] * 1.1, 57):
        expect = soft(z, lam / 2) / n
        assert np.max(np.abs(solve_at(path, lam) - expect)) <= 1e-9
        cd = coordinate_descent_solve(X, Y, lam, tol=1e-12)
        assert np.max(np.abs(cd - expect)) <= 1e-10


def test_lars_matches_coordinate_descent_on_100_instances():
    worst = 0.0
    for i in range(100):
        X, Y = random_instance(derive_seed(10, i))
        path = lars_lasso_path(X, Y)
        for lam in np.linspace(0.02, 1.0, 20) * path.knots[0]:
            b = coordinate_descent_solve(X, Y, lam, tol=1e-12)
            worst = max(worst, np.max(np.abs(solve_at(path, lam) - b)))
    assert worst <= 1e-6


def test_kkt_at_every_knot_and_midpoint():
    for i in range(30):
        X, Y = random_instance(derive_seed(11, i))
        check_path(X, Y, lars_lasso_path(X, Y))


def test_path_invariants():
    for i in range(30):
        X, Y = random_instance(derive_seed(12, i))
        n, p = X.shape
        path = lars_lasso_path(X, Y)
        B = path.coefs_at_knots()
        # continuity: both adjacent segments agree at each interior knot
        for k in range(1, len(path)):
            lam = path.knots[k]
            left = path.bases[k - 1] + lam * path.slopes[k - 1]
            right = path.bases[k] + lam * path.slopes[k]
            assert np.max(np.abs(left - right)) <= 1e-9
        loss = np.sum((Y[:, None] - X @ B.T) ** 2, axis=0)
        assert np.all(np.diff(loss) <= 1e-10)  # knots decrease, loss does not increase
        assert all(len(a) <= min(n, p) for a in path.active_sets)


@pytest.mark.parametrize("eta", [1e-12, 1e-3, 0.1])
def test_expanded_designs(eta):
    base = gen_equicorrelated(20, 40, 0.0, 5)
    D = expand_design(base, eta, 6)
    inst = gen_instance(D, 4, 1.0, 7)
    X = D.X / np.sqrt(20)
    Y = X @ inst.beta0 + inst.eps
    path = lars_lasso_path(X, Y)
    # the fitted values of a Lasso solution are unique even when coefficients are not
    for lam in (0.5, 2.0, 4.0):
        b = solve_at(path, lam)
        rep = kkt_check(X, Y, b, lam, 1e-6)
        assert rep.passed, rep


def test_identical_columns():
    X, Y = random_instance(3, 10, 5)
    X = np.hstack([X, X[:, :2], -X[:, [3]]])
    path = lars_lasso_path(X, Y)
    check_path(X, Y, path)


def test_solve_many_matches_solve_at():
    X, Y = random_instance(4, 15, 20)
    path = lars_lasso_path(X, Y)
    lams = np.linspace(0, path.knots[0] * 1.2, 40)
    B = solve_many(path, lams)
    for lam, b in zip(lams, B):
        assert np.array_equal(b, solve_at(path, lam))
    with pytest.raises(ValueError):
        solve_at(path, -1.0)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**40), st.integers(2, 12), st.integers(1, 12))
def test_path_kkt_property(seed, n, p):
    X, Y = random_instance(seed, n, p)
    check_path(X, Y, lars_lasso_path(X, Y))


def test_coordinate_descent_zero_and_cap():
    X, Y = random_instance(5, 8, 5)
    lam0 = 2 * np.max(np.abs(X.T @ Y))
    assert np.all(coordinate_descent_solve(X, Y, lam0) == 0)
    with pytest.raises(ConvergenceError) as err:
        coordinate_descent_solve(X, Y, 0.01, tol=1e-15, max_cycles=1)
    assert err.value.beta.shape == (5,)


def test_kkt_check_examples():
    X, Y = random_instance(6, 8, 5)
    zmax = np.max(np.abs(X.T @ Y))
    assert kkt_check(X, Y, np.zeros(5), 2 * zmax).passed
    assert not kkt_check(X, Y, np.zeros(5), zmax).passed
    b = np.zeros(5)
    b[0] = -1.0  # wrong sign for a positive correlation
    assert not kkt_check(X, Y * 0 + X[:, 0] * 5, b, 1.0).passed


def test_prediction_error():
    X, _ = random_instance(7, 9, 6)
    b0 = generator(1).standard_normal(6)
    b = generator(2).standard_normal(6)
    assert prediction_error(X, b0, b0) == 0.0
    assert prediction_error(X, b, np.zeros(6)) == pytest.approx(np.sum((X @ b) ** 2), rel=1e-14)
    naive = sum(sum(X[i, j] * (b[j] - b0[j]) for j in range(6)) ** 2 for i in range(9))
    assert abs(prediction_error(X, b, b0) - naive) <= 1e-10


def test_optimal_lambda_special_cases():
    X, _ = random_instance(8, 20, 10)
    b0 = np.zeros(10)
    b0[:3] = 1
    path = lars_lasso_path(X, X @ b0)
    lam, pe = optimal_lambda(path, X, b0)
    assert lam == 0.0 and pe <= 1e-20
    Y = generator(9).standard_normal(20)
    path = lars_lasso_path(X, Y)
    lam, pe = optimal_lambda(path, X, np.zeros(10))
    assert lam == path.knots[0] and pe == 0.0


def test_optimal_lambda_beats_dense_grid():
    for i in range(50):
        X, Y = random_instance(derive_seed(13, i))
        b0 = np.zeros(X.shape[1])
        b0[: min(3, X.shape[1])] = 1
        path = lars_lasso_path(X, Y)
        lam, pe = optimal_lambda(path, X, b0)
        grid = np.linspace(0, path.knots[0], 100_000)
        assert pe <= pe_curve(path, X, b0, grid).min() + 1e-9
        assert pe == pytest.approx(prediction_error(X, solve_at(path, lam), b0), rel=1e-9, abs=1e-12)


def test_path_csv():
    X, Y = random_instance(14, 5, 3)
    path = lars_lasso_path(X, Y)
    lines = path_to_csv(path).splitlines()
    assert lines[0] == "lambda,beta_1,beta_2,beta_3"
    assert len(lines) == len(path.knots) + 1
    first = [float(v) for v in lines[1].split(",")]
    assert first[0] == path.knots[0] and first[1:] == [0.0, 0.0, 0.0]
