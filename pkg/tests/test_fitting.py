"""quadratic_lsq against an exact rational normal-equation oracle."""

from __future__ import annotations

import random
from fractions import Fraction

import numpy as np
import pytest

from roadsentry.errors import DegenerateData
from roadsentry.fitting import quadratic_lsq

from conftest import CALIBRATION_ROWS


def exact_quadratic(xs: list[float], ys: list[float]) -> tuple[float, float, float]:
    """Solve the unscaled normal equations in exact rational arithmetic.

    Every float is an exact rational, so Gaussian elimination over Fraction
    gives the true least-squares coefficients with zero rounding error.
    """
    fx = [Fraction(v) for v in xs]
    fy = [Fraction(v) for v in ys]
    cols = [[v * v for v in fx], list(fx), [Fraction(1)] * len(fx)]
    a = [[sum(ci * cj for ci, cj in zip(cols[i], cols[j])) for j in range(3)] for i in range(3)]
    b = [sum(c * y for c, y in zip(cols[i], fy)) for i in range(3)]
    m = [row + [rhs] for row, rhs in zip(a, b)]
    for col in range(3):
        pivot = max(range(col, 3), key=lambda r: abs(m[r][col]))
        if m[pivot][col] == 0:
            raise ZeroDivisionError("singular system")
        m[col], m[pivot] = m[pivot], m[col]
        for r in range(3):
            if r != col and m[r][col] != 0:
                f = m[r][col] / m[col][col]
                m[r] = [mr - f * mc for mr, mc in zip(m[r], m[col])]
    return tuple(float(m[i][3] / m[i][i]) for i in range(3))  # type: ignore[return-value]


def test_matches_exact_oracle_on_calibration_table() -> None:
    xs = [a for a, _ in CALIBRATION_ROWS]
    ys = [d for _, d in CALIBRATION_ROWS]
    got = quadratic_lsq(np.array(xs), np.array(ys))
    want = exact_quadratic(xs, ys)
    for g, w in zip(got, want):
        assert g == pytest.approx(w, rel=1e-9, abs=1e-15)


def test_matches_exact_oracle_on_random_sets() -> None:
    rng = random.Random(20240817)
    for _ in range(100):
        n = rng.randint(3, 12)
        xs = rng.sample(range(-500, 2000), n)
        xs = [x + rng.random() for x in xs]
        ys = [rng.uniform(-100.0, 100.0) for _ in range(n)]
        got = quadratic_lsq(np.array(xs), np.array(ys))
        want = exact_quadratic(xs, ys)
        for g, w in zip(got, want):
            assert g == pytest.approx(w, rel=1e-9, abs=1e-9)


def test_recovers_exact_polynomial() -> None:
    xs = np.array([-3.0, -1.0, 0.0, 2.0, 5.0, 7.0])
    ys = 1.25 * xs * xs - 4.0 * xs + 0.5
    c2, c1, c0 = quadratic_lsq(xs, ys)
    assert c2 == pytest.approx(1.25, abs=1e-12)
    assert c1 == pytest.approx(-4.0, abs=1e-12)
    assert c0 == pytest.approx(0.5, abs=1e-12)


def test_rejects_short_input() -> None:
    with pytest.raises(DegenerateData):
        quadratic_lsq(np.array([1.0, 2.0]), np.array([3.0, 4.0]))


def test_rejects_identical_abscissae() -> None:
    with pytest.raises(DegenerateData):
        quadratic_lsq(np.array([2.0, 2.0, 2.0, 2.0]), np.array([1.0, 2.0, 3.0, 4.0]))


def test_rejects_shape_mismatch() -> None:
    with pytest.raises(ValueError):
        quadratic_lsq(np.array([1.0, 2.0, 3.0]), np.array([1.0, 2.0]))
