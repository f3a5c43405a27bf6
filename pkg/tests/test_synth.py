from dataclasses import replace

import numpy as np
import pytest

from hmdemand.demand import fit_original
from hmdemand.errors import CalibrationError, HMDemandError
from hmdemand.reference import ATTRIBUTE_MEANS, ATTRIBUTES, MEAN_PRICES, MEAN_SHARES
from hmdemand.synth import (Calibration, GroundTruth, gen_panel, gen_purchases, load_truth,
                            milk_truth, preset_truth, save_truth, seeds, share_noise)


def test_same_seed_same_panel():
    a = gen_panel(milk_truth(), 60, seed=7)
    b = gen_panel(milk_truth(), 60, seed=7)
    assert np.array_equal(a.price, b.price) and np.array_equal(a.quantity, b.quantity)
    c = gen_panel(milk_truth(), 60, seed=8)
    assert not np.array_equal(a.price, c.price)


@pytest.mark.parametrize("kind", ["original", "dm", "hm"])
def test_sample_means_near_calibration(kind):
    panel = gen_panel(preset_truth(kind), 209, seed=1)
    assert np.all(np.abs(panel.price.mean(axis=0) / MEAN_PRICES - 1) < 0.05)
    # shares integrate the equation noise, so they wander further than prices
    assert np.all(np.abs(panel.mean_shares() / MEAN_SHARES - 1) < 0.10)
    assert np.allclose(panel.share.sum(axis=1), 1.0)
    assert np.all(panel.price > 0) and np.all(panel.quantity > 0)


def test_first_week_sits_at_calibration():
    panel = gen_panel(milk_truth(), 20, seed=2)
    assert np.allclose(panel.price[0], MEAN_PRICES)
    assert np.allclose(panel.share[0], MEAN_SHARES)


def test_share_noise_sums_to_zero_and_is_positive_definite_on_a_block():
    cov = share_noise(MEAN_SHARES, 0.01)
    assert np.allclose(cov.sum(axis=0), 0, atol=1e-18)
    assert np.linalg.eigvalsh(cov[:4, :4]).min() > 0


def test_soy_records_are_mostly_lactose_and_cholesterol_free():
    table = gen_purchases(milk_truth(), 40000, seed=3)
    soy = table.product_type == "SOY"
    rate = table.attribute("lfcf")[soy].mean()
    assert rate == pytest.approx(ATTRIBUTE_MEANS["SOY"]["lfcf"], abs=0.02)
    assert rate > 0.95
    assert np.all(table.attribute("soy")[soy] == 1) and np.all(table.attribute("soy")[~soy] == 0)


def test_purchase_attribute_means_follow_profiles():
    table = gen_purchases(milk_truth(), 40000, seed=4)
    sel = table.product_type == "PERCENT2"
    fat = table.attribute("fat_g")[sel].mean()
    assert fat == pytest.approx(ATTRIBUTE_MEANS["PERCENT2"]["fat_g"], rel=0.03)
    assert np.all(table.price > 0)


def test_minimum_record_count():
    with pytest.raises(HMDemandError):
        gen_purchases(milk_truth(), len(ATTRIBUTES) + 1, seed=0)


def test_truth_json_roundtrip(tmp_path):
    for kind in ("original", "hm"):
        truth = preset_truth(kind)
        save_truth(truth, tmp_path / "t.json")
        back = load_truth(tmp_path / "t.json")
        assert np.array_equal(back.c, truth.c) and np.array_equal(back.b, truth.b)
        assert np.array_equal(back.noise_cov, truth.noise_cov)
        assert np.array_equal(back.hedonic_beta, truth.hedonic_beta)
        assert back.hedonic_form == truth.hedonic_form and back.kind == truth.kind


def test_truth_validation():
    t = milk_truth()
    with pytest.raises(HMDemandError):
        replace(t, b=t.b * 2)
    bad_c = t.c.copy()
    bad_c[0, 1] += 0.01
    with pytest.raises(HMDemandError):
        replace(t, c=bad_c)
    with pytest.raises(HMDemandError):
        replace(t, noise_cov=-np.eye(5))


def test_calibration_and_length_checks():
    with pytest.raises(HMDemandError):
        gen_panel(milk_truth(), 9, seed=0)
    with pytest.raises(CalibrationError):
        gen_panel(milk_truth(), 20, calibration=Calibration(shares=np.full(5, 0.3)))
    with pytest.raises(CalibrationError):
        gen_panel(milk_truth(), 20, calibration=Calibration(prices=-MEAN_PRICES))


def test_seeds_are_reproducible_and_distinct():
    assert seeds(5, 4) == seeds(5, 4)
    assert len(set(seeds(5, 50))) == 50


@pytest.mark.slow
def test_estimation_error_shrinks_with_sample_length():
    truth = milk_truth()

    def median_error(weeks):
        errs = []
        for s in seeds(99, 50):
            fit = fit_original(gen_panel(truth, weeks, seed=s))
            errs.append(np.max(np.abs(fit.c - truth.c)))
        return np.median(errs)

    assert median_error(800) < median_error(200)


def test_custom_truth_needs_hedonic_for_purchases():
    t = GroundTruth(("A", "B"), [0.5, 0.5], [[-0.1, 0.1], [0.1, -0.1]])
    with pytest.raises(HMDemandError):
        gen_purchases(t, 20)
