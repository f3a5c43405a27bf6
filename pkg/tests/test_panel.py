import numpy as np
import pytest

from hmdemand.errors import HMDemandError, LoadError, NutrientError, PanelGapError
from hmdemand.panel import (MarketPanel, REFERENCE_INTAKES, aggregate_weekly,
                            attribute_profile, bundled_profiles_path, dri_transform,
                            load_purchases, make_purchases, read_panel, write_panel,
                            write_purchases)
from hmdemand.reference import ATTRIBUTES, MEAN_PRICES, MILK_TYPES

TYPES = ("A", "B")


def table(weeks, types, prices, servings):
    n = len(weeks)
    return make_purchases(weeks, types, [f"u{k}" for k in range(n)], prices, servings,
                          np.zeros((n, len(ATTRIBUTES))), types=TYPES)


def test_weekly_price_is_servings_weighted():
    t = table([0, 0, 0, 1, 1], ["A", "A", "B", "A", "B"], [10, 20, 5, 12, 6], [1, 3, 2, 1, 1])
    panel = aggregate_weekly(t)
    # (10*1 + 20*3) / 4 = 17.5
    assert panel.price[0, 0] == pytest.approx(17.5)
    assert panel.quantity[0].tolist() == [4.0, 2.0]
    assert panel.share[0] == pytest.approx([70 / 80, 10 / 80])


def test_simple_weighting_is_plain_mean():
    t = table([0, 0, 0, 1, 1], ["A", "A", "B", "A", "B"], [10, 20, 5, 12, 6], [1, 3, 2, 1, 1])
    assert aggregate_weekly(t, weighting="simple").price[0, 0] == pytest.approx(15.0)


def test_gap_is_reported_with_week_and_type():
    t = table([0, 0, 1, 2, 2], ["A", "B", "A", "A", "B"], [1, 1, 1, 1, 1], [1, 1, 1, 1, 1])
    with pytest.raises(PanelGapError) as err:
        aggregate_weekly(t)
    assert err.value.gaps == [(1, "B")]
    assert "week 1, B" in str(err.value)


def test_carry_fill_reuses_previous_price_with_zero_quantity():
    t = table([0, 0, 1, 2, 2], ["A", "B", "A", "A", "B"], [1, 7, 1, 1, 9], [1, 1, 1, 1, 1])
    panel = aggregate_weekly(t, fill="carry")
    assert panel.price[1, 1] == 7.0
    assert panel.quantity[1, 1] == 0.0
    assert np.allclose(panel.share.sum(axis=1), 1.0)


def test_missing_week_in_span_is_a_gap():
    t = table([0, 0, 2, 2], ["A", "B", "A", "B"], [1, 1, 1, 1], [1, 1, 1, 1])
    with pytest.raises(PanelGapError) as err:
        aggregate_weekly(t)
    assert set(err.value.gaps) == {(1, "A"), (1, "B")}


def test_bundled_profiles_load_and_match_published_prices(profile):
    assert profile.types == MILK_TYPES
    assert np.allclose(profile.mean_price, MEAN_PRICES)
    assert profile.column("fat_g")[0] == pytest.approx(4.77)


def test_purchase_roundtrip(tmp_path):
    src = load_purchases(bundled_profiles_path())
    path = write_purchases(src, tmp_path / "p.csv")
    back = load_purchases(path)
    assert np.array_equal(back.attributes, src.attributes)
    assert np.array_equal(back.price, src.price)
    assert list(back.product_type) == list(src.product_type)


def bad_file(tmp_path, row, column, value):
    lines = bundled_profiles_path().read_text().splitlines()
    header = lines[0].split(",")
    cells = lines[row].split(",")
    cells[header.index(column)] = value
    lines[row] = ",".join(cells)
    path = tmp_path / "bad.csv"
    path.write_text("\n".join(lines) + "\n")
    return path


@pytest.mark.parametrize("column,value", [("fat_g", "abc"), ("price_per_serving", "-1"),
                                          ("organic", "2"), ("product_type", "CHOC")])
def test_load_error_names_row_and_column(tmp_path, column, value):
    path = bad_file(tmp_path, 3, column, value)
    with pytest.raises(LoadError) as err:
        load_purchases(path)
    assert err.value.row == 3
    assert err.value.column == column
    assert f"row 3, column {column}" in str(err.value)


def test_schema_maps_renamed_headers(tmp_path):
    text = bundled_profiles_path().read_text().replace("price_per_serving", "cents", 1)
    path = tmp_path / "renamed.csv"
    path.write_text(text)
    with pytest.raises(LoadError):
        load_purchases(path)
    assert len(load_purchases(path, schema={"price_per_serving": "cents"})) == 5


def test_dri_transform_hand_values():
    index, sodium = dri_transform({"calcium_mg": 300.0, "vitamin_d_iu": 100.0, "sodium_mg": 120.0})
    # calcium 30%, vitamin D 25% -> mean 27.5; sodium 5%
    assert index == pytest.approx(27.5)
    assert sodium == pytest.approx(5.0)
    assert dri_transform({"sodium_mg": 240.0}) == (None, pytest.approx(10.0))
    with pytest.raises(NutrientError):
        dri_transform({"unobtainium_mg": 1.0})
    assert REFERENCE_INTAKES["calcium_mg"] == 1000.0


def test_panel_roundtrip(tmp_path, noisy_panel):
    back = read_panel(write_panel(noisy_panel, tmp_path / "panel.csv"))
    assert np.array_equal(back.price, noisy_panel.price)
    assert np.array_equal(back.quantity, noisy_panel.quantity)
    assert back.types == noisy_panel.types


def test_panel_rejects_nonpositive_price():
    with pytest.raises(HMDemandError):
        MarketPanel(TYPES, np.arange(2), np.array([[1.0, 0.0], [1.0, 1.0]]), np.ones((2, 2)))


def test_read_panel_rejects_inconsistent_shares(tmp_path, noisy_panel):
    path = write_panel(noisy_panel, tmp_path / "panel.csv")
    lines = path.read_text().splitlines()
    cells = lines[5].split(",")
    cells[-1] = "0.5"
    lines[5] = ",".join(cells)
    path.write_text("\n".join(lines) + "\n")
    with pytest.raises(LoadError):
        read_panel(path)


def test_attribute_profile_population_sd():
    x = np.zeros((4, len(ATTRIBUTES)))
    x[:, ATTRIBUTES.index("fat_g")] = [1.0, 3.0, 5.0, 7.0]
    t = make_purchases([0] * 4, ["A", "A", "B", "B"], ["x", "y", "x", "x"], [1, 1, 2, 4],
                       [1, 1, 1, 3], x, types=TYPES)
    prof = attribute_profile(t)
    assert prof.column("fat_g").tolist() == [2.0, 6.0]
    assert prof.sds[:, ATTRIBUTES.index("fat_g")].tolist() == [1.0, 1.0]
    assert prof.unique_upcs == {"A": 2, "B": 1}
    assert prof.mean_price[1] == pytest.approx((2 + 12) / 4)


def test_weighted_mean_hand_example():
    t = table([0, 0, 0], ["A", "A", "B"], [20, 10, 5], [10, 30, 1])
    panel = aggregate_weekly(t)
    assert panel.price[0, 0] == pytest.approx(12.5)
    assert panel.quantity[0, 0] == 40.0


def test_single_record_cells_reproduce_the_records():
    t = table([0, 0, 1, 1], ["A", "B", "A", "B"], [3, 4, 5, 6], [7, 8, 9, 10])
    panel = aggregate_weekly(t)
    assert panel.price.tolist() == [[3, 4], [5, 6]]
    assert panel.quantity.tolist() == [[7, 8], [9, 10]]


def test_aggregation_is_order_invariant_and_bounded(rng):
    N = 200
    t = table(rng.integers(0, 5, N), rng.choice(TYPES, N), rng.uniform(5, 30, N),
              rng.uniform(1, 10, N))
    a = aggregate_weekly(t)
    b = aggregate_weekly(t.take(rng.permutation(N)))
    assert np.allclose(a.price, b.price, rtol=1e-14) and np.allclose(a.quantity, b.quantity)
    assert np.max(np.abs(a.share.sum(axis=1) - 1)) < 1e-12
    col = t.type_index()
    for w in range(5):
        for i in range(2):
            sel = (t.week == w) & (col == i)
            assert t.price[sel].min() - 1e-12 <= a.price[w, i] <= t.price[sel].max() + 1e-12


def test_three_row_file(tmp_path):
    lines = bundled_profiles_path().read_text().splitlines()[:4]
    path = tmp_path / "three.csv"
    path.write_text("\n".join(lines) + "\n")
    assert len(load_purchases(path)) == 3


def test_bad_price_on_second_row(tmp_path):
    path = bad_file(tmp_path, 2, "price_per_serving", "abc")
    with pytest.raises(LoadError, match="row 2, column price_per_serving"):
        load_purchases(path)


def test_dri_definition_examples():
    assert dri_transform({"calcium_mg": 1000.0})[0] == pytest.approx(100.0)
    half = {k: REFERENCE_INTAKES[k] / 2 for k in ("calcium_mg", "iron_mg", "zinc_mg",
                                                  "vitamin_c_mg")}
    assert dri_transform(half) == (pytest.approx(50.0), None)


def test_bundled_fat_means(profile):
    assert profile.column("fat_g").tolist() == [4.77, 0.53, 8.15, 2.26, 2.41]
    assert np.all(profile.sds == 0)


def test_calibrated_panel_reproduces_shares():
    from hmdemand.reference import MEAN_SHARES
    from hmdemand.synth import gen_panel, milk_truth

    panel = gen_panel(milk_truth(), 12, seed=0)
    assert np.max(np.abs(panel.share[0] - MEAN_SHARES)) < 1e-12
