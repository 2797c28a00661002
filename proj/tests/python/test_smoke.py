import math

import numpy as np
import pytest

import foodcal


def test_food_table():
    rows = foodcal.foods()
    assert len(rows) == 19
    apple = next(r for r in rows if r["label"] == "apple")
    assert apple["density_g_cm3"] == 0.78
    assert apple["energy_kcal_g"] == 0.52


def test_calories():
    r = foodcal.calories_from_volume(200.0, "apple")
    assert math.isclose(r["mass_g"], 156.0, rel_tol=1e-12)
    assert math.isclose(r["calories_kcal"], 81.12, rel_tol=1e-12)
    with pytest.raises(foodcal.FoodcalError) as info:
        foodcal.calories_from_volume(0.0, "apple")
    assert info.value.kind == "NonpositiveVolume"


def test_mean_error():
    out = foodcal.mean_error([("a", "apple", 110.0, 100.0), ("b", "apple", 90.0, 100.0), ("c", "apple", 130.0, 100.0)])
    assert len(out) == 1
    assert math.isclose(out[0]["mean_error"], 0.1, rel_tol=1e-12)
    with pytest.raises(foodcal.FoodcalError):
        foodcal.mean_error([])


def test_coin_and_grabcut():
    img = np.zeros((100, 120, 3), dtype=np.uint8)
    img[:] = (60, 120, 70)
    yy, xx = np.mgrid[0:100, 0:120]
    img[(xx - 60) ** 2 + (yy - 50) ** 2 <= 25**2] = (210, 205, 190)
    c = foodcal.detect_coin(img, (30, 20, 90, 80))
    assert abs(c["r"] - 25) < 1.0
    assert abs(c["cm_per_px"] - 0.05) < 0.003

    mask, energies = foodcal.grabcut(img, (28, 18, 92, 82))
    assert mask.shape == (100, 120)
    assert abs(int(mask.sum()) - int(((xx - 60) ** 2 + (yy - 50) ** 2 <= 625).sum())) < 40
    assert all(b <= a + 1e-9 for a, b in zip(energies, energies[1:]))


def test_estimate_and_evaluate(tmp_path):
    manifest = foodcal.write_synthetic_dataset(tmp_path, 3, 7)
    images = tmp_path / "images"
    report = foodcal.estimate(images / "synth_001_T.png", images / "synth_001_S.png")
    assert report["schema"] == 1
    food = report["foods"][0]
    assert food["label"] == "apple"
    assert math.isclose(food["calories_kcal"], food["volume_cm3"] * 0.78 * 0.52, rel_tol=1e-12)

    ev = foodcal.evaluate(manifest, jobs=2, timings=False)
    assert ev["evaluated"] == 3
    assert "timings" not in ev
    assert ev == foodcal.evaluate(manifest, jobs=1, timings=False)


def test_stage_error(tmp_path):
    with pytest.raises(foodcal.FoodcalError) as info:
        foodcal.load_image(tmp_path / "missing.png")
    assert info.value.kind == "MissingFile"
