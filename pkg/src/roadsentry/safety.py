"""Two-second-rule classification and ego-speed handling."""

from __future__ import annotations

import bisect
import csv
import math
from dataclasses import dataclass
from enum import IntEnum
from typing import Mapping

from .errors import NonPositiveDistance

KMH_PER_MPS = 3.6


class Verdict(IntEnum):
    """Danger orders before Safe so min() over verdicts aggregates correctly."""

    DANGER = 0
    SAFE = 1

    @property
    def label(self) -> str:
        return "danger" if self is Verdict.DANGER else "safe"


@dataclass(frozen=True)
class HeadwayConfig:
    threshold_s: float = 2.0

    def __post_init__(self) -> None:
        if not (math.isfinite(self.threshold_s) and self.threshold_s > 0.0):
            raise ValueError("threshold_s must be positive and finite")


def classify_headway(
    distance: float, speed: float, cfg: HeadwayConfig = HeadwayConfig()
) -> tuple[float, Verdict]:
    """Headway = distance / speed; Danger iff strictly under the threshold.

    Zero speed gives unbounded headway (math.inf) and Safe: a stationary ego
    cannot close the gap. Exactly at the threshold is Safe (strict <).
    """
    if not (math.isfinite(distance) and distance > 0.0):
        raise NonPositiveDistance(f"distance must be positive and finite, got {distance}")
    if not (math.isfinite(speed) and speed >= 0.0):
        raise ValueError(f"speed must be >= 0 and finite, got {speed}")
    headway = math.inf if speed == 0.0 else distance / speed
    verdict = Verdict.DANGER if headway < cfg.threshold_s else Verdict.SAFE
    return headway, verdict


def _check_speed(value: float, what: str) -> float:
    out = float(value)
    if not (math.isfinite(out) and out >= 0.0):
        raise ValueError(f"{what} must be >= 0 and finite, got {value}")
    return out


class SpeedTrack:
    """Ego speed per frame: a constant, or per-frame samples forward-filled.

    Frames before the first sample have no speed and raise ValueError;
    frames after the last sample reuse it.
    """

    def __init__(self, constant: float | None = None, samples: Mapping[int, float] | None = None) -> None:
        if (constant is None) == (samples is None):
            raise ValueError("provide exactly one of constant or samples")
        if constant is not None:
            self._constant: float | None = _check_speed(constant, "speed")
            self._frames: list[int] = []
            self._speeds: list[float] = []
        else:
            assert samples is not None
            if not samples:
                raise ValueError("per-frame speed track must be non-empty")
            self._constant = None
            pairs = sorted(samples.items())
            for frame, _ in pairs:
                if not isinstance(frame, int) or isinstance(frame, bool) or frame < 0:
                    raise ValueError(f"frame index must be a non-negative int, got {frame!r}")
            self._frames = [f for f, _ in pairs]
            self._speeds = [_check_speed(s, f"speed at frame {f}") for f, s in pairs]

    @classmethod
    def constant(cls, speed: float) -> "SpeedTrack":
        return cls(constant=speed)

    @classmethod
    def per_frame(cls, samples: Mapping[int, float]) -> "SpeedTrack":
        return cls(samples=samples)

    def speed_at(self, frame_index: int) -> float:
        if frame_index < 0:
            raise ValueError("frame_index must be >= 0")
        if self._constant is not None:
            return self._constant
        pos = bisect.bisect_right(self._frames, frame_index) - 1
        if pos < 0:
            raise ValueError(
                f"no speed known at or before frame {frame_index} "
                f"(track starts at frame {self._frames[0]})"
            )
        return self._speeds[pos]


def load_speed_csv(path) -> SpeedTrack:
    """Per-frame speed file: CSV with header 'frame,speed_mps'."""
    with open(path, newline="", encoding="utf-8") as fh:
        rows = [row for row in csv.reader(fh) if row]
    if not rows or [c.strip() for c in rows[0]] != ["frame", "speed_mps"]:
        raise ValueError(f"{path}: expected header 'frame,speed_mps'")
    samples: dict[int, float] = {}
    for row in rows[1:]:
        if len(row) != 2:
            raise ValueError(f"{path}: expected 2 columns, got {len(row)}")
        frame = int(row[0])
        if frame in samples:
            raise ValueError(f"{path}: duplicate frame {frame}")
        samples[frame] = float(row[1])
    return SpeedTrack.per_frame(samples)


def parse_speed_literal(text: str) -> float:
    """Speed literal with optional unit suffix, normalized to m/s.

    Accepted: bare number or 'mps'/'m/s' (meters per second), 'kmh'/'km/h'
    (converted). Examples: '15', '15mps', '54km/h' -> 15.0.
    """
    s = text.strip().lower()
    for suffix, divisor in (("km/h", KMH_PER_MPS), ("kmh", KMH_PER_MPS), ("m/s", 1.0), ("mps", 1.0)):
        if s.endswith(suffix):
            return _check_speed(float(s[: -len(suffix)]) / divisor, "speed")
    return _check_speed(float(s), "speed")
