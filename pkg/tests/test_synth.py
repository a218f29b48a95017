import numpy as np
import pytest

from ftcalib.io import format_dataset, parse_dataset
from ftcalib.model import EstimationConfig
from ftcalib.synth import (
    GRAVITY,
    KINDS,
    RECORDED_TEMPERATURES,
    ScenarioSpec,
    combine,
    first_order_lag,
    generate,
    make_sensor,
    reference_scenario,
    temperature_profile,
)
from ftcalib.validate import calibrate, mse_per_axis


def spec(sensor, **kw):
    base = dict(kind="grid", n=1000, C_true=sensor.C_true, o_true=sensor.o_true,
                Ct_true=sensor.Ct_true, seed=1)
    base.update(kw)
    return ScenarioSpec(**base)


def rel(a, b):
    return np.linalg.norm(a - b) / np.linalg.norm(b)


@pytest.mark.parametrize("kind", KINDS)
def test_deterministic(sensor, kind):
    a, _ = generate(spec(sensor, kind=kind, noise_sigma=0.01))
    b, _ = generate(spec(sensor, kind=kind, noise_sigma=0.01))
    assert format_dataset(a) == format_dataset(b)
    c, _ = generate(spec(sensor, kind=kind, noise_sigma=0.01, seed=2))
    assert not np.array_equal(a.raw, c.raw)


@pytest.mark.parametrize("kind", KINDS)
def test_reference_force_norm_is_weight(sensor, kind):
    ds, _ = generate(spec(sensor, kind=kind, mass=33.0))
    norms = np.linalg.norm(ds.reference[:, :3], axis=1)
    np.testing.assert_allclose(norms, 33 * GRAVITY, rtol=1e-12)


def test_grid_profile_endpoints(sensor):
    ds, _ = generate(spec(sensor, temp_profile=RECORDED_TEMPERATURES["grid"]))
    assert ds.temperature[0] == 32.0
    assert ds.temperature[-1] == 41.2
    assert np.all(np.diff(ds.temperature) >= 0)


@pytest.mark.parametrize("ramp", ["linear", "saturating"])
def test_temperature_profile_shape(ramp):
    t = temperature_profile(500, 38.1, 41.6, ramp)
    assert t[0] == 38.1 and t[-1] == 41.6
    assert np.all(np.diff(t) >= 0)
    if ramp == "saturating":
        # rises quickly first, then slows down
        assert t[250] - t[0] > t[-1] - t[250]
    else:
        np.testing.assert_allclose(np.diff(t), np.diff(t)[0])


def test_first_order_lag_step_response():
    x = np.ones(1001)
    x[0] = 0.0
    y = first_order_lag(x, 0.1, 10.0)
    assert y[0] == 0.0
    # one time constant later the output covers about 63 % of the step
    assert abs(y[100] - (1 - np.exp(-1))) < 0.01
    assert np.all(np.diff(y) >= 0)


def test_truth_model_reproduces_reference(sensor):
    ds, truth = generate(spec(sensor, kind="balancing"))
    np.testing.assert_allclose(truth.predict_dataset(ds), ds.reference, atol=1e-9)
    assert truth.extra_variable_names == ("temperature",)


@pytest.mark.parametrize("kw, exc", [
    (dict(n=9), ValueError),
    (dict(mass=0.0), ValueError),
    (dict(temp_profile=(40.0, 39.0)), ValueError),
    (dict(kind="circle"), ValueError),
    (dict(ramp="step"), ValueError),
    (dict(hysteresis_gain=-1.0), ValueError),
    (dict(noise_sigma=-0.1), ValueError),
    (dict(noise_sigma=(0.1, 0.1)), ValueError),
])
def test_spec_validation(sensor, kw, exc):
    with pytest.raises(exc):
        spec(sensor, **kw)


def test_singular_C_true_rejected(sensor):
    with pytest.raises(np.linalg.LinAlgError):
        generate(spec(sensor, C_true=np.zeros((6, 6))))


def test_noiseless_round_trip(sensor):
    ds, truth = generate(spec(sensor))
    model = calibrate([ds], EstimationConfig("SwT", 0.0, sensor.C_true)).model
    assert rel(model.C, truth.C) < 1e-6
    assert rel(model.o, truth.o) < 1e-6
    assert rel(model.Ct, truth.Ct) < 1e-6


# -- combine ---------------------------------------------------------------

def test_combine_single_keeps_samples(sensor):
    ds, _ = generate(spec(sensor, n=50))
    out = combine([ds])
    for attr in ("time", "raw", "temperature", "reference"):
        np.testing.assert_array_equal(getattr(out, attr), getattr(ds, attr))
    assert out.kind == "combined"


def test_combine_two(sensor):
    g, _ = generate(spec(sensor, n=100, name="g"))
    b, _ = generate(spec(sensor, kind="balancing", n=50, name="b", temp_profile=(38.1, 41.6)))
    out = combine([g, b])
    assert len(out) == 150
    assert out.meta["sources"] == [["g", "grid", 100], ["b", "balancing", 50]]
    assert np.all(np.diff(out.time) > 0)
    np.testing.assert_array_equal(out.raw[:100], g.raw)
    np.testing.assert_array_equal(out.raw[100:], b.raw)


def test_combine_empty():
    with pytest.raises(ValueError):
        combine([])


# -- estimation leverage ---------------------------------------------------

def ct_error(datasets, sensor):
    model = calibrate(datasets, EstimationConfig("CwT", 0.0)).model
    return np.linalg.norm(model.Ct - sensor.Ct_true)


def test_doubling_temperature_range_reduces_ct_error(sensor):
    narrow, wide = [], []
    for seed in range(20):
        a, _ = generate(spec(sensor, seed=seed, noise_sigma=0.005, temp_profile=(36.0, 37.0)))
        b, _ = generate(spec(sensor, seed=seed, noise_sigma=0.005, temp_profile=(35.5, 37.5)))
        narrow.append(ct_error([a], sensor))
        wide.append(ct_error([b], sensor))
    assert np.mean(wide) < np.mean(narrow)


def test_combined_beats_low_range_grid_on_ct(sensor):
    single, paired = [], []
    for seed in range(10):
        g, _ = generate(spec(sensor, seed=seed, noise_sigma=0.005, temp_profile=(32.0, 33.0)))
        b, _ = generate(spec(sensor, kind="balancing", seed=seed + 100, noise_sigma=0.005,
                             temp_profile=RECORDED_TEMPERATURES["balancing_right"]))
        single.append(ct_error([g], sensor))
        paired.append(ct_error([g, b], sensor))
    assert np.mean(paired) < np.mean(single)


def test_hysteresis_degrades_fit(sensor):
    clean, _ = generate(spec(sensor))
    lagged, _ = generate(spec(sensor, hysteresis_gain=1.0, hysteresis_tau=20.0))
    cfg = EstimationConfig("CwT", 0.0)
    mse_clean = mse_per_axis(calibrate([clean], cfg).model, clean).mse
    mse_lag = mse_per_axis(calibrate([lagged], cfg).model, lagged).mse
    assert mse_clean[2] < 1e-12
    assert mse_lag[2] > 1e-4


def test_reference_scenario_layout():
    sc = reference_scenario(seed=3, sensor=make_sensor(3), n=200, n_validation=60)
    assert set(sc) == {"grid", "balancing", "combined", "validation", "truth", "sensor"}
    assert len(sc["combined"]) == 400
    assert len(sc["validation"]) == 180
    assert sc["validation"].temperature[0] == 39.0
    assert sc["validation"].temperature[-1] == 40.5
    assert sc["balancing"].name == "balancing_right"


def test_dataset_csv_round_trip(sensor):
    ds, _ = generate(spec(sensor, n=30, noise_sigma=0.01))
    back = parse_dataset(format_dataset(ds))
    for attr in ("time", "raw", "temperature", "reference"):
        np.testing.assert_array_equal(getattr(back, attr), getattr(ds, attr))
    assert back.meta["temp_end"] == 41.2
    assert back.kind == "grid"
