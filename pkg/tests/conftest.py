"""Shared fixtures: the calibration table and small builders used across suites."""

from __future__ import annotations

import json
from pathlib import Path
from typing import Sequence

import pytest

# Nine (area_px2, distance_m) calibration pairs shipped with the package.
CALIBRATION_ROWS: tuple[tuple[float, float], ...] = (
    (440380.0, 2.0),
    (239598.0, 3.0),
    (137138.0, 4.0),
    (96657.0, 5.0),
    (67626.0, 6.0),
    (47294.0, 8.0),
    (33631.0, 10.0),
    (25479.0, 11.0),
    (12168.0, 16.0),
)


@pytest.fixture()
def calibration_rows() -> tuple[tuple[float, float], ...]:
    return CALIBRATION_ROWS


def stream_line(frame: int, dets: Sequence[tuple[Sequence[float], str, float]]) -> str:
    """One JSON-Lines record: dets is a list of (bbox, class, conf)."""
    return json.dumps(
        {
            "frame": frame,
            "detections": [
                {"bbox": list(bbox), "class": cls, "conf": conf} for bbox, cls, conf in dets
            ],
        },
        separators=(",", ":"),
    )


def write_stream(path: Path, lines: Sequence[str]) -> Path:
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


@pytest.fixture()
def simple_stream_text() -> str:
    lines = [
        stream_line(0, [([600.0, 400.0, 80.0, 60.0], "car", 0.91)]),
        stream_line(1, [([590.0, 398.0, 90.0, 70.0], "car", 0.88), ([10.0, 10.0, 5.0, 5.0], "bird", 0.99)]),
        stream_line(2, []),
    ]
    return "\n".join(lines) + "\n"
