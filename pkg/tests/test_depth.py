"""Depth regression: power-law and quadratic fits, prediction guards, model I/O."""

from __future__ import annotations

import math
import statistics

import numpy as np
import pytest
from sklearn.base import clone

from roadsentry.depth import (
    CalibrationSample,
    PowerLawModel,
    PowerLawRegressor,
    QuadraticAreaRegressor,
    QuadraticModel,
    fit_power_law,
    fit_quadratic,
    load_builtin_calibration,
    load_calibration_csv,
    model_from_ini,
    model_to_ini,
    predict_distance,
)
from roadsentry.errors import (
    DegenerateData,
    NonPositiveArea,
    NonPositiveSample,
    NotPhysical,
)

from conftest import CALIBRATION_ROWS


def table_samples() -> list[CalibrationSample]:
    return [CalibrationSample(area=a, distance=d) for a, d in CALIBRATION_ROWS]


def test_power_law_matches_stdlib_regression_oracle() -> None:
    model = fit_power_law(table_samples())
    lr = statistics.linear_regression(
        [math.log(a) for a, _ in CALIBRATION_ROWS],
        [math.log(d) for _, d in CALIBRATION_ROWS],
    )
    assert model.b == pytest.approx(lr.slope, rel=1e-12)
    assert model.a == pytest.approx(math.exp(lr.intercept), rel=1e-12)


def test_power_law_frozen_coefficients() -> None:
    model = fit_power_law(table_samples())
    assert model.a == pytest.approx(4319.281142336827, rel=1e-12)
    assert model.b == pytest.approx(-0.5888137500899956, rel=1e-12)
    assert model.log_rms == pytest.approx(0.037904320777941564, rel=1e-9)


def test_power_law_predicts_calibration_within_ten_percent() -> None:
    model = fit_power_law(table_samples())
    rels = {a: abs(predict_distance(model, a) - d) / d for a, d in CALIBRATION_ROWS}
    assert max(rels.values()) < 0.10
    # the worst sample sits near 7 percent, hit at area 33631
    assert max(rels, key=rels.get) == 33631.0
    assert rels[33631.0] == pytest.approx(0.067, abs=0.005)


def test_rounded_coefficient_model_reference_points() -> None:
    model = PowerLawModel(a=4319.3, b=-0.589)
    assert predict_distance(model, 440380.0) == pytest.approx(2.05, abs=0.01)
    assert predict_distance(model, 100000.0) == pytest.approx(4.90, abs=0.01)
    assert predict_distance(model, 96657.0) == pytest.approx(5.0016, abs=2e-3)
    assert predict_distance(model, 12168.0) == pytest.approx(16.9, abs=0.06)


def test_power_law_recovers_synthetic_exactly() -> None:
    true = PowerLawModel(a=2500.0, b=-0.5)
    samples = [
        CalibrationSample(area=a, distance=float(true.evaluate(a)))
        for a in (1000.0, 5000.0, 20000.0, 90000.0)
    ]
    fit = fit_power_law(samples)
    assert fit.a == pytest.approx(2500.0, rel=1e-12)
    assert fit.b == pytest.approx(-0.5, rel=1e-12)
    assert fit.log_rms == pytest.approx(0.0, abs=1e-12)


def test_power_law_degenerate_inputs() -> None:
    with pytest.raises(DegenerateData):
        fit_power_law(table_samples()[:1])
    same = [CalibrationSample(area=500.0, distance=d) for d in (2.0, 3.0, 4.0)]
    with pytest.raises(DegenerateData):
        fit_power_law(same)


def test_quadratic_frozen_coefficients() -> None:
    model = fit_quadratic(table_samples())
    assert model.c2 == pytest.approx(1.4115454491061321e-10, rel=1e-9)
    assert model.c1 == pytest.approx(-8.647968081079852e-05, rel=1e-9)
    assert model.c0 == pytest.approx(13.271138475239686, rel=1e-9)


def test_quadratic_needs_three_distinct_areas() -> None:
    with pytest.raises(DegenerateData):
        fit_quadratic(
            [
                CalibrationSample(10.0, 1.0),
                CalibrationSample(10.0, 2.0),
                CalibrationSample(20.0, 3.0),
            ]
        )


def test_predict_distance_guards() -> None:
    model = fit_power_law(table_samples())
    for bad in (0.0, -5.0, float("inf"), float("nan")):
        with pytest.raises(NonPositiveArea):
            predict_distance(model, bad)
    with pytest.raises(NotPhysical) as exc:
        predict_distance(model, 1e9)  # implausibly huge box, model output < 0.1 m
    assert exc.value.predicted < 0.1


def test_quadratic_model_evaluate() -> None:
    model = QuadraticModel(c2=2.0, c1=-3.0, c0=5.0)
    assert predict_distance(model, 4.0) == 2.0 * 16 - 3.0 * 4 + 5.0


def test_calibration_sample_validation() -> None:
    with pytest.raises(NonPositiveSample):
        CalibrationSample(area=0.0, distance=5.0)
    with pytest.raises(NonPositiveSample):
        CalibrationSample(area=10.0, distance=-1.0)


def test_builtin_calibration_is_the_nine_row_table() -> None:
    samples = load_builtin_calibration()
    assert [(s.area, s.distance) for s in samples] == list(CALIBRATION_ROWS)


def test_csv_round_trip_and_header_check(tmp_path) -> None:
    p = tmp_path / "cal.csv"
    p.write_text("area_px2,distance_m\n1000,5.5\n2000,3.25\n", encoding="utf-8")
    samples = load_calibration_csv(p)
    assert [(s.area, s.distance) for s in samples] == [(1000.0, 5.5), (2000.0, 3.25)]
    bad = tmp_path / "bad.csv"
    bad.write_text("area,dist\n1,2\n", encoding="utf-8")
    with pytest.raises(ValueError):
        load_calibration_csv(bad)


def test_model_ini_round_trip() -> None:
    power = fit_power_law(table_samples())
    assert model_from_ini(model_to_ini(power)) == power
    quad = fit_quadratic(table_samples())
    assert model_from_ini(model_to_ini(quad)) == quad


def test_model_ini_rejects_bad_input() -> None:
    with pytest.raises(ValueError):
        model_from_ini("[other]\nx = 1\n")
    with pytest.raises(ValueError):
        model_from_ini("[depth]\nvariant = cubic\n")


def test_model_validation() -> None:
    with pytest.raises(ValueError):
        PowerLawModel(a=-1.0, b=-0.5)
    with pytest.raises(ValueError):
        PowerLawModel(a=100.0, b=0.2)  # growing distance with area is not physical
    with pytest.raises(ValueError):
        QuadraticModel(c2=float("nan"), c1=0.0, c0=0.0)


def test_power_law_regressor_facade() -> None:
    X = np.array([[a] for a, _ in CALIBRATION_ROWS])
    y = np.array([d for _, d in CALIBRATION_ROWS])
    reg = PowerLawRegressor().fit(X, y)
    direct = fit_power_law(table_samples())
    assert reg.scale_ == direct.a
    assert reg.exponent_ == direct.b
    assert reg.log_rms_ == direct.log_rms
    got = reg.predict(np.array([440380.0, 96657.0]))
    assert got[0] == pytest.approx(float(direct.evaluate(440380.0)), rel=1e-15)
    assert got[1] == pytest.approx(float(direct.evaluate(96657.0)), rel=1e-15)


def test_quadratic_regressor_facade() -> None:
    X = np.array([a for a, _ in CALIBRATION_ROWS])
    y = np.array([d for _, d in CALIBRATION_ROWS])
    reg = QuadraticAreaRegressor().fit(X, y)
    direct = fit_quadratic(table_samples())
    assert reg.coef_.tolist() == [direct.c2, direct.c1, direct.c0]
    assert reg.predict([50000.0])[0] == pytest.approx(float(direct.evaluate(50000.0)), rel=1e-15)


def test_regressor_guards_and_clone() -> None:
    reg = PowerLawRegressor()
    with pytest.raises(ValueError):
        reg.predict([100.0])
    with pytest.raises(ValueError):
        reg.fit(np.array([[1.0, 2.0]]), np.array([1.0]))  # two feature columns
    with pytest.raises(ValueError):
        reg.fit(np.array([1.0, -2.0]), np.array([1.0, 2.0]))
    assert clone(PowerLawRegressor()).get_params() == {}
    assert clone(QuadraticAreaRegressor()).get_params() == {}
