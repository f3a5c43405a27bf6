import numpy as np
import pytest

from hmdemand.demand import (DM_F_O_NNFO, DM_FULL, ModelSpec, ci_containment, dm_spec,
                             elasticities, fit_dm, fit_from_dict, fit_hm, fit_original,
                             fit_to_dict, hm_spec, inside, load_fit, original_restrictions,
                             report_from_values, save_fit, slutsky)
from hmdemand.errors import DimensionError, HMDemandError, RankError, UnknownDistanceError
from hmdemand.reference import EXPENDITURE, HICKSIAN, MARSHALLIAN, MEAN_SHARES, MILK_TYPES
from hmdemand.synth import dm_truth, gen_panel, hm_truth, milk_truth


@pytest.fixture(scope="module")
def original_fit(noisy_panel):
    return fit_original(noisy_panel)


def test_parameter_counts():
    assert ModelSpec("original").n_free(5) == 18
    assert dm_spec(DM_FULL).n_free(5) == 23
    assert dm_spec(DM_F_O_NNFO).n_free(5) == 15
    assert hm_spec().n_free(5) == 13
    assert original_restrictions(MILK_TYPES).k == 18


def test_fitted_counts_match_specs(noisy_panel, bundle, original_fit):
    dm = fit_dm(noisy_panel, bundle.all, bundle.chars, max_iter=1000)
    hm = fit_hm(noisy_panel, bundle.hedonic["HEDONIC"], bundle.hedonic["NN-HEDONIC"],
                max_iter=1000)
    assert (original_fit.k, dm.k, hm.k) == (18, 15, 13)
    assert dm.system.free_names[-7:] == ("lambda_FAT", "lambda_ORGANIC", "lambda_NN-FAT-ORGANIC",
                                         "beta0", "beta_share", "beta_fat", "beta_organic")
    assert hm.system.free_names[-5:] == ("lambda_h", "lambda_nn", "beta0", "beta_share",
                                         "beta_closeness")


def test_zero_noise_recovers_truth(exact_panel):
    truth = milk_truth(noise_scale=0)
    fit = fit_original(exact_panel)
    assert fit.system.exact
    assert np.max(np.abs(fit.c - truth.c)) < 1e-8
    assert np.max(np.abs(fit.b - truth.b)) < 1e-8
    assert np.max(np.abs(fit.intercepts)) < 1e-8


def test_engel_and_symmetry_on_fit(original_fit):
    rep = original_fit.report()
    assert abs(rep.engel_sum() - 1) < 1e-10
    w = rep.wbar
    sym = w[:, None] * rep.hicksian
    assert np.max(np.abs(sym - sym.T)) < 1e-12
    assert np.max(np.abs(rep.hicksian_row_sums())) < 1e-12


def test_delta_method_matches_coefficient_se(original_fit):
    rep = original_fit.report()
    n, w = 5, original_fit.wbar
    se_c = original_fit.system.theta_se[10:].reshape(n, n)
    assert np.allclose(rep.hicksian_se, se_c / w[:, None], rtol=1e-12)
    assert np.allclose(rep.expenditure_se, original_fit.system.theta_se[5:10] / w, rtol=1e-12)


def test_slutsky_on_published_values():
    m = slutsky(HICKSIAN, EXPENDITURE, MEAN_SHARES)
    assert m[0, 0] == pytest.approx(-0.8179, abs=5e-4)
    assert m[1, 1] == pytest.approx(-0.8832, abs=5e-4)
    assert np.max(np.abs(m - MARSHALLIAN)) < 0.05
    rep = report_from_values(MILK_TYPES, HICKSIAN, EXPENDITURE, MEAN_SHARES)
    assert rep.engel_sum() == pytest.approx(1.0, abs=5e-4)


def test_fit_is_inside_its_own_intervals(original_fit):
    rep = original_fit.report()
    result = ci_containment(original_fit.report(), rep)
    assert result.all_inside and result.n_outside == 0


def test_closed_interval_boundary():
    assert inside(1.0 + 1.96, 1.0, 1.0, z=1.96)
    assert not inside(1.0 + 1.97, 1.0, 1.0, z=1.96)


def test_dm_fit_on_original_truth_leaves_some_cells_outside(bundle):
    panel = gen_panel(milk_truth(), 209, seed=21)
    base = fit_original(panel).report()
    dm = fit_dm(panel, bundle.all, bundle.chars, max_iter=1000).report()
    result = ci_containment(dm, base)
    off = ~np.eye(5, dtype=bool)
    assert (~result.marshallian[off]).sum() >= 1


def test_slow_convergence_is_an_error_at_the_default_cap(bundle):
    from hmdemand.errors import ConvergenceError

    panel = gen_panel(milk_truth(), 209, seed=21)
    with pytest.raises(ConvergenceError) as err:
        fit_dm(panel, bundle.all, bundle.chars)
    assert len(err.value.trace) == 100


def test_full_dm_set_is_not_identified(noisy_panel, bundle):
    with pytest.raises(RankError) as err:
        fit_dm(noisy_panel, bundle.all, bundle.chars, names=DM_FULL)
    assert "lambda_NN-FAT-SIZE" in err.value.names


def test_unknown_distance_is_named(noisy_panel, bundle):
    with pytest.raises(UnknownDistanceError) as err:
        fit_dm(noisy_panel, bundle.all, bundle.chars, names=("FAT", "COLOUR"))
    assert "COLOUR" in str(err.value)


def test_hm_rejects_foreign_closeness_index(noisy_panel, bundle):
    with pytest.raises(HMDemandError):
        fit_hm(noisy_panel, bundle.hedonic["HEDONIC"], bundle.hedonic["NN-HEDONIC"],
               closeness=np.ones(5))


def test_metric_truths_are_recovered(bundle):
    hm = fit_hm(gen_panel(hm_truth(bundle), 209, seed=4), bundle.hedonic["HEDONIC"],
                bundle.hedonic["NN-HEDONIC"], shares=MEAN_SHARES)
    z = (hm.system.free("lambda_h") - 0.0453) / hm.system.se[hm.system.free_names.index("lambda_h")]
    assert abs(z) < 3
    dm = fit_dm(gen_panel(dm_truth(bundle), 209, seed=4), bundle.all, bundle.chars)
    assert dm.system.free("lambda_ORGANIC") == pytest.approx(0.04, abs=0.01)


def test_wrong_share_vector_length(original_fit):
    with pytest.raises(DimensionError):
        elasticities(original_fit, np.ones(3) / 3)


def test_fit_json_roundtrip(tmp_path, original_fit):
    back = load_fit(save_fit(original_fit, tmp_path / "fit.json"))
    assert np.array_equal(back.system.theta, original_fit.system.theta)
    assert np.array_equal(back.system.theta_cov, original_fit.system.theta_cov)
    assert back.system.loglik == original_fit.system.loglik
    assert back.spec == original_fit.spec
    assert fit_to_dict(fit_from_dict(fit_to_dict(back))) == fit_to_dict(original_fit)


def test_spec_dict_roundtrip():
    spec = dm_spec(("FAT",), ("share",))
    assert ModelSpec.from_dict(spec.to_dict()) == spec
    assert hm_spec().distances == ("HEDONIC", "NN-HEDONIC")
    with pytest.raises(HMDemandError):
        ModelSpec("aids")


def test_two_goods_leave_one_free_price_parameter():
    R = original_restrictions(("A", "B"), intercept=False)
    assert R.free_names == ("b_A", "c_A_A")


def test_observation_count_is_weeks_minus_one(original_fit, noisy_panel):
    assert original_fit.system.nobs == noisy_panel.T - 1 == 208


def test_zero_distance_matrix_is_unidentified(noisy_panel, bundle):
    zero = {"Z": np.zeros((5, 5))}
    with pytest.raises(RankError, match="lambda_Z"):
        fit_dm(noisy_panel, zero, bundle.chars, names=("Z",), ownprice=("share",))


def test_published_containment_mark():
    assert not inside(0.3173, 0.1523, 0.084)
    assert inside(0.1523 + 1.96 * 0.084, 0.1523, 0.084, z=1.96)


def test_zero_expenditure_effect_keeps_hicksian():
    h = np.array([[-0.5, 0.5], [0.5, -0.5]])
    assert np.array_equal(slutsky(h, np.zeros(2), [0.5, 0.5]), h)


def test_skim_cross_check():
    assert -0.575 - 1.1366 * 0.2713 == pytest.approx(-0.8832, abs=1e-3)


def test_own_price_elasticities_negative(noisy_panel, bundle, original_fit):
    hm = fit_hm(noisy_panel, bundle.hedonic["HEDONIC"], bundle.hedonic["NN-HEDONIC"],
                max_iter=1000)
    for fit in (original_fit, hm):
        assert np.all(np.diag(fit.report().hicksian) < 0)
        assert np.max(np.abs(fit.c - fit.c.T)) < 1e-12


def test_zero_share_rejected(original_fit):
    with pytest.raises(HMDemandError):
        elasticities(original_fit, np.array([0.5, 0.5, 0.0, 0.0, 0.0]))
