import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hmdemand.demand import original_restrictions, param_names, rotterdam_design
from hmdemand.errors import (ConvergenceError, DimensionError, RankError,
                             SingularCovarianceError)
from hmdemand.estimator import (RestrictionSet, RotterdamRows, build_rows, durbin_watson,
                                gls_step, information_criteria, sur_fit)
from hmdemand.synth import milk_truth

TYPES = ("A", "B", "C", "D")


def singular_system(rng, T=400, noise=0.01):
    """Rotterdam-shaped design whose equations add up exactly to the regressor."""
    n = len(TYPES)
    R = original_restrictions(TYPES)
    theta = R.expand(rng.normal(0, 0.05, R.k))
    dlogp = rng.normal(0, 0.02, (T, n))
    divisia = rng.normal(0, 0.02, T)
    rows = RotterdamRows(TYPES, np.arange(T), np.zeros((T, n)), dlogp, None, None, divisia, None)
    Z = rotterdam_design(rows)
    eps = rng.normal(0, noise, (T, n))
    eps -= eps.mean(axis=1, keepdims=True)
    y = np.einsum("inp,p->ni", Z, theta) + eps
    return Z, y, R, theta


def test_restriction_map_and_constraint_form_agree(rng):
    R = original_restrictions(TYPES)
    C, r = R.constraints()
    phi = rng.normal(size=R.k)
    assert np.max(np.abs(C @ R.expand(phi) - r)) < 1e-12
    back = RestrictionSet.from_constraints(C, r, R.param_names)
    assert back.k == R.k
    assert back.violation(R.expand(phi)) < 1e-12


def test_unrestricted_single_equation_is_ols(rng):
    N = 50
    X = np.column_stack([np.ones(N), rng.normal(size=N)])
    y = X @ [1.0, 2.0] + rng.normal(0, 0.1, N)
    fit = sur_fit(X[None], y[:, None], RestrictionSet.unrestricted(("a", "b")))
    ols = np.linalg.lstsq(X, y, rcond=None)[0]
    assert np.allclose(fit.phi, ols, atol=1e-12)
    s2 = np.sum((y - X @ ols) ** 2) / N
    assert np.allclose(fit.phi_cov, s2 * np.linalg.inv(X.T @ X), rtol=1e-8)


def test_perfect_fit_is_flagged_exact(rng):
    Z, _, R, theta = singular_system(rng)
    y = np.einsum("inp,p->ni", Z, theta)
    fit = sur_fit(Z, y, R, drop=3)
    assert fit.exact and fit.iterations == 0 and fit.loglik == np.inf
    assert np.max(np.abs(fit.theta - theta)) < 1e-12
    assert np.all(fit.phi_cov == 0)


def test_fixed_point_and_restrictions(rng):
    Z, y, R, _ = singular_system(rng)
    fit = sur_fit(Z, y, R, drop=3)
    assert np.max(np.abs(gls_step(fit, Z, y) - fit.phi)) < 1e-12
    assert R.violation(fit.theta) < 1e-10
    assert fit.trace[-1] < 1e-8
    assert fit.residuals.shape == (y.shape[0], 4)


def test_drop_invariance(rng):
    Z, y, R, _ = singular_system(rng)
    fits = [sur_fit(Z, y, original_restrictions(TYPES, drop=d), drop=d) for d in range(4)]
    for f in fits[1:]:
        assert np.max(np.abs(f.theta - fits[0].theta)) < 1e-6
        assert f.loglik == pytest.approx(fits[0].loglik, rel=1e-6)


def test_keeping_every_adding_up_equation_is_singular(rng):
    Z, y, R, _ = singular_system(rng)
    with pytest.raises(SingularCovarianceError):
        sur_fit(Z, y, R, drop=None)


def test_convergence_failure_carries_trace(rng):
    Z, y, R, _ = singular_system(rng)
    with pytest.raises(ConvergenceError) as err:
        sur_fit(Z, y, R, drop=3, max_iter=1)
    assert len(err.value.trace) == 1


def test_rank_error_names_aliased_parameters(rng):
    N = 30
    x = rng.normal(size=N)
    Z = np.column_stack([np.ones(N), x, 2 * x])[None]
    with pytest.raises(RankError) as err:
        sur_fit(Z, rng.normal(size=(N, 1)), RestrictionSet.unrestricted(("a", "b", "c")))
    assert err.value.names == ["b", "c"]


def test_dimension_checks(rng):
    Z, y, R, _ = singular_system(rng, T=20)
    with pytest.raises(DimensionError):
        sur_fit(Z, y[:, :3], R)
    with pytest.raises(DimensionError):
        sur_fit(Z, y, R, drop=9)


def test_durbin_watson_white_noise_and_random_walk(rng):
    e = rng.normal(size=(4000, 3))
    assert np.all(np.abs(durbin_watson(e) - 2) < 0.2)
    assert np.all(durbin_watson(np.cumsum(e, axis=0)) < 0.1)
    # diffs 1, -3 over squares 1, 4, 1: (1 + 9) / 6
    assert float(durbin_watson(np.array([1.0, 2.0, -1.0]))) == pytest.approx(10 / 6)


def test_information_criteria_hand_values():
    aic, bic = information_criteria(100.0, 3, 50)
    assert aic == -194.0
    assert bic == pytest.approx(3 * np.log(50) - 200)


def test_build_rows_hand_values(noisy_panel):
    rows = build_rows(noisy_panel)
    w = noisy_panel.share
    t = 5
    wbar = (w[t] + w[t + 1]) / 2
    dlp = np.log(noisy_panel.price[t + 1] / noisy_panel.price[t])
    dlx = np.log(noisy_panel.expenditure[t + 1] / noisy_panel.expenditure[t])
    assert rows.divisia[t] == pytest.approx(dlx - wbar @ dlp)
    assert rows.lhs[t] == pytest.approx(wbar * np.log(noisy_panel.quantity[t + 1]
                                                      / noisy_panel.quantity[t]))
    assert rows.nobs == noisy_panel.T - 1


def test_gaussian_loglik_formula(rng):
    Z, y, R, _ = singular_system(rng)
    fit = sur_fit(Z, y, R, drop=3)
    m, N = 3, fit.nobs
    res = fit.residuals[:, list(fit.retained)]
    S = res.T @ res / N
    want = -0.5 * N * (m * np.log(2 * np.pi) + np.log(np.linalg.det(S)) + m)
    assert fit.loglik == pytest.approx(want, rel=1e-10)


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), drop=st.integers(0, 3))
def test_restrictions_hold_exactly_on_any_fit(seed, drop):
    rng = np.random.default_rng(seed)
    Z, y, _, _ = singular_system(rng, T=60)
    R = original_restrictions(TYPES, drop=drop)
    fit = sur_fit(Z, y, R, drop=drop)
    assert R.violation(fit.theta) < 1e-10
    c = fit.theta[8:].reshape(4, 4)
    assert np.max(np.abs(c - c.T)) < 1e-12
    assert np.max(np.abs(c.sum(axis=1))) < 1e-12
    assert abs(fit.theta[4:8].sum() - 1) < 1e-12


def test_param_layout_names():
    names = param_names(("A", "B"))
    assert names == ("a_A", "a_B", "b_A", "b_B", "c_A_A", "c_A_B", "c_B_A", "c_B_B")
    assert milk_truth().c.shape == (5, 5)


def panel_of(price, quantity, types=("A", "B")):
    from hmdemand.panel import MarketPanel

    price, quantity = np.asarray(price, float), np.asarray(quantity, float)
    return MarketPanel(types, np.arange(len(price)), price, quantity)


def test_constant_panel_gives_zero_rows():
    rows = build_rows(panel_of([[2, 3]] * 4, [[5, 7]] * 4))
    for arr in (rows.lhs, rows.dlogp, rows.divisia):
        assert np.all(arr == 0)
    assert np.allclose(rows.wbar.sum(axis=1), 1)


def test_price_doubling():
    rows = build_rows(panel_of([[2, 3], [4, 3], [4, 3]], [[5, 7]] * 3))
    assert rows.dlogp[0, 0] == pytest.approx(np.log(2))
    assert rows.dlogp[0, 1] == 0


def test_two_good_divisia_by_hand():
    p = [[1.0, 2.0], [1.1, 1.8], [1.2, 1.9]]
    q = [[10.0, 5.0], [9.0, 6.0], [9.5, 5.5]]
    rows = build_rows(panel_of(p, q))
    # week 1: x0 = 20, x1 = 9.9 + 10.8 = 20.7; w0 = (.5, .5), w1 = (9.9/20.7, 10.8/20.7)
    w1 = np.array([9.9, 10.8]) / 20.7
    wbar = (np.array([0.5, 0.5]) + w1) / 2
    want = np.log(20.7 / 20) - (wbar[0] * np.log(1.1) + wbar[1] * np.log(0.9))
    assert rows.divisia[0] == pytest.approx(want, abs=1e-15)
    assert rows.lhs[0, 0] == pytest.approx(wbar[0] * np.log(0.9), abs=1e-15)


def test_nonpositive_quantity_names_cell():
    with pytest.raises(Exception, match="week 1, type B"):
        build_rows(panel_of([[1, 1]] * 3, [[1, 1], [1, 0], [1, 1]]))


def test_durbin_watson_hand_examples():
    assert float(durbin_watson(np.array([1.0, -1.0, 1.0, -1.0]))) == 3.0
    assert float(durbin_watson(np.ones(4))) == 0.0
    with pytest.raises(Exception):
        durbin_watson(np.zeros(4))


def test_aic_with_no_parameters():
    assert information_criteria(12.5, 0, 100)[0] == -25.0


def test_published_aic_values():
    assert round(information_criteria(2740.689, 23, 208)[0], 3) == -5435.378
    assert round(information_criteria(2733.933, 13, 208)[0], 3) == -5441.866
