"""Area-to-distance regression from calibration samples.

Two model families: a power law d = a * area^b fitted in log-log space
(what spreadsheet power trendlines compute), and a quadratic
d = c2*area^2 + c1*area + c0 fitted with column-scaled normal equations.
The shipped calibration set lives in data/depth_calibration.csv.
"""

from __future__ import annotations

import configparser
import csv
import io
import math
from dataclasses import dataclass
from importlib import resources
from typing import Sequence, Union

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin

from .errors import DegenerateData, NonPositiveArea, NonPositiveSample, NotPhysical
from .fitting import quadratic_lsq

# Predictions under this are treated as out-of-domain rather than believed.
DISTANCE_FLOOR_M = 0.1


@dataclass(frozen=True)
class CalibrationSample:
    area: float
    distance: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.area) and self.area > 0.0):
            raise NonPositiveSample(f"area must be positive and finite, got {self.area}")
        if not (math.isfinite(self.distance) and self.distance > 0.0):
            raise NonPositiveSample(
                f"distance must be positive and finite, got {self.distance}"
            )


@dataclass(frozen=True)
class PowerLawModel:
    """d = a * area^b with a > 0 and b < 0; log_rms is the log-space fit residual."""

    a: float
    b: float
    log_rms: float = 0.0

    def __post_init__(self) -> None:
        if not (math.isfinite(self.a) and self.a > 0.0):
            raise ValueError("power-law scale a must be positive and finite")
        if not (math.isfinite(self.b) and self.b < 0.0):
            raise ValueError(
                "power-law exponent b must be negative (distance shrinks as area grows)"
            )

    def evaluate(self, area):
        return self.a * np.power(area, self.b)


@dataclass(frozen=True)
class QuadraticModel:
    """d = c2*area^2 + c1*area + c0."""

    c2: float
    c1: float
    c0: float

    def __post_init__(self) -> None:
        for name in ("c2", "c1", "c0"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"quadratic coefficient {name} must be finite")

    def evaluate(self, area):
        return (self.c2 * area + self.c1) * area + self.c0


DepthModel = Union[PowerLawModel, QuadraticModel]


def _split(samples: Sequence[CalibrationSample]) -> tuple[np.ndarray, np.ndarray]:
    areas = np.array([s.area for s in samples], dtype=float)
    dists = np.array([s.distance for s in samples], dtype=float)
    return areas, dists


def fit_power_law(samples: Sequence[CalibrationSample]) -> PowerLawModel:
    """Ordinary least squares on (ln area, ln distance).

    b is the log-log slope, ln a the intercept; log_rms records the RMS
    residual in log space. Raises DegenerateData unless the samples cover
    at least 2 distinct areas.
    """
    if len({s.area for s in samples}) < 2:
        raise DegenerateData("power-law fit needs at least 2 distinct areas")
    areas, dists = _split(samples)
    lx = np.log(areas)
    ly = np.log(dists)
    dx = lx - lx.mean()
    sxx = float(np.dot(dx, dx))
    if sxx == 0.0:
        raise DegenerateData("power-law fit needs at least 2 distinct areas")
    b = float(np.dot(dx, ly - ly.mean()) / sxx)
    ln_a = float(ly.mean() - b * lx.mean())
    resid = ly - (ln_a + b * lx)
    log_rms = float(np.sqrt(np.mean(resid * resid)))
    return PowerLawModel(a=math.exp(ln_a), b=b, log_rms=log_rms)


def fit_quadratic(samples: Sequence[CalibrationSample]) -> QuadraticModel:
    """Degree-2 OLS of distance on area (column-scaled normal equations)."""
    if len({s.area for s in samples}) < 3:
        raise DegenerateData("quadratic fit needs at least 3 distinct areas")
    areas, dists = _split(samples)
    c2, c1, c0 = quadratic_lsq(areas, dists)
    return QuadraticModel(c2=c2, c1=c1, c0=c0)


def predict_distance(model: DepthModel, area: float) -> float:
    """Distance in meters for a bounding-box area in px^2.

    Raises NonPositiveArea unless area is positive and finite, and
    NotPhysical when the model output drops under DISTANCE_FLOOR_M
    (out-of-domain area; callers treat it as an extremely close obstacle).
    """
    if not (isinstance(area, (int, float)) and math.isfinite(area) and area > 0.0):
        raise NonPositiveArea(f"area must be positive and finite, got {area!r}")
    predicted = float(model.evaluate(float(area)))
    if predicted < DISTANCE_FLOOR_M:
        raise NotPhysical(predicted)
    return predicted


def load_calibration_csv(path) -> list[CalibrationSample]:
    """Read samples from CSV with header 'area_px2,distance_m'."""
    with open(path, newline="", encoding="utf-8") as fh:
        return _parse_calibration(csv.reader(fh), str(path))


def load_builtin_calibration() -> list[CalibrationSample]:
    """The nine-sample calibration set shipped with the package."""
    text = (
        resources.files("roadsentry").joinpath("data/depth_calibration.csv").read_text("utf-8")
    )
    return _parse_calibration(csv.reader(text.splitlines()), "builtin calibration")


def _parse_calibration(reader, origin: str) -> list[CalibrationSample]:
    rows = [row for row in reader if row]
    if not rows or [c.strip() for c in rows[0]] != ["area_px2", "distance_m"]:
        raise ValueError(f"{origin}: expected header 'area_px2,distance_m'")
    samples = []
    for row in rows[1:]:
        if len(row) != 2:
            raise ValueError(f"{origin}: expected 2 columns, got {len(row)}")
        samples.append(CalibrationSample(area=float(row[0]), distance=float(row[1])))
    return samples


def model_to_ini(model: DepthModel) -> str:
    """Serialize a fitted model to the package config format ([depth] section)."""
    parser = configparser.ConfigParser()
    if isinstance(model, PowerLawModel):
        parser["depth"] = {
            "variant": "power",
            "a": repr(model.a),
            "b": repr(model.b),
            "log_rms": repr(model.log_rms),
        }
    else:
        parser["depth"] = {
            "variant": "quadratic",
            "c2": repr(model.c2),
            "c1": repr(model.c1),
            "c0": repr(model.c0),
        }
    buf = io.StringIO()
    parser.write(buf)
    return buf.getvalue()


def model_from_ini(text: str) -> DepthModel:
    """Inverse of model_to_ini."""
    parser = configparser.ConfigParser()
    parser.read_string(text)
    if not parser.has_section("depth"):
        raise ValueError("model file needs a [depth] section")
    section = parser["depth"]
    variant = section.get("variant", "")
    if variant == "power":
        return PowerLawModel(
            a=section.getfloat("a"),
            b=section.getfloat("b"),
            log_rms=section.getfloat("log_rms", fallback=0.0),
        )
    if variant == "quadratic":
        return QuadraticModel(
            c2=section.getfloat("c2"),
            c1=section.getfloat("c1"),
            c0=section.getfloat("c0"),
        )
    raise ValueError(f"unknown depth model variant {variant!r}")


def _as_areas(X) -> np.ndarray:
    arr = np.asarray(X, dtype=float)
    if arr.ndim == 2 and arr.shape[1] == 1:
        arr = arr[:, 0]
    if arr.ndim != 1:
        raise ValueError("X must be shape (n,) or (n, 1) of areas")
    if not np.all(np.isfinite(arr)) or np.any(arr <= 0.0):
        raise ValueError("areas must be positive and finite")
    return arr


class PowerLawRegressor(RegressorMixin, BaseEstimator):
    """Estimator facade over fit_power_law; X holds areas, y distances.

    predict() evaluates the raw model without the physical floor; use
    predict_distance for floor-checked single queries.
    """

    def fit(self, X, y) -> "PowerLawRegressor":
        areas = _as_areas(X)
        dists = np.asarray(y, dtype=float)
        if dists.shape != areas.shape:
            raise ValueError("X and y must have matching lengths")
        samples = [CalibrationSample(a, d) for a, d in zip(areas, dists)]
        model = fit_power_law(samples)
        self.model_ = model
        self.scale_ = model.a
        self.exponent_ = model.b
        self.log_rms_ = model.log_rms
        return self

    def predict(self, X) -> np.ndarray:
        if not hasattr(self, "model_"):
            raise ValueError("fit the regressor before predicting")
        return self.model_.evaluate(_as_areas(X))


class QuadraticAreaRegressor(RegressorMixin, BaseEstimator):
    """Estimator facade over fit_quadratic; coef_ is (c2, c1, c0)."""

    def fit(self, X, y) -> "QuadraticAreaRegressor":
        areas = _as_areas(X)
        dists = np.asarray(y, dtype=float)
        if dists.shape != areas.shape:
            raise ValueError("X and y must have matching lengths")
        samples = [CalibrationSample(a, d) for a, d in zip(areas, dists)]
        model = fit_quadratic(samples)
        self.model_ = model
        self.coef_ = np.array([model.c2, model.c1, model.c0])
        return self

    def predict(self, X) -> np.ndarray:
        if not hasattr(self, "model_"):
            raise ValueError("fit the regressor before predicting")
        return self.model_.evaluate(_as_areas(X))
