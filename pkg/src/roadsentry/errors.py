"""Exception types shared across the package."""

from __future__ import annotations


class RoadSentryError(Exception):
    """Base class for every error this package raises on purpose."""


class NonConvergence(RoadSentryError):
    """Iterative undistortion failed to reach tolerance within the cap."""


class DegenerateQuad(RoadSentryError):
    """Homography source or destination quad is degenerate (collinear points)."""


class LaneError(RoadSentryError):
    """Base class for lane-extraction failures; the pipeline falls back to the fixed ROI on these."""


class MissingLane(LaneError):
    def __init__(self, side: str) -> None:
        super().__init__(f"no lane pixels in the {side} half of the base histogram")
        self.side = side


class InsufficientPixels(LaneError):
    def __init__(self, side: str, count: int) -> None:
        super().__init__(f"{side} lane collected {count} pixels; a quadratic fit needs at least 6")
        self.side = side
        self.count = count


class SelfIntersecting(LaneError):
    """Left and right lane fits touch or cross inside the sampled range."""


class MalformedRecord(RoadSentryError):
    def __init__(self, line_no: int, reason: str) -> None:
        super().__init__(f"line {line_no}: {reason}")
        self.line_no = line_no
        self.reason = reason


class NonMonotonicFrame(RoadSentryError):
    def __init__(self, line_no: int, frame: int, prev: int) -> None:
        super().__init__(f"line {line_no}: frame {frame} does not increase over preceding frame {prev}")
        self.line_no = line_no
        self.frame = frame
        self.prev = prev


class NonPositiveSample(RoadSentryError):
    """A calibration sample has area or distance <= 0."""


class DegenerateData(RoadSentryError):
    """Calibration data cannot identify the model (e.g. all areas equal)."""


class NonPositiveArea(RoadSentryError):
    """A depth prediction was requested for area <= 0 or a non-finite area."""


class NotPhysical(RoadSentryError):
    """Predicted distance fell below the physical floor; callers treat the object as touching-close."""

    def __init__(self, predicted: float) -> None:
        super().__init__(f"predicted distance {predicted:.6g} m is below the 0.1 m floor")
        self.predicted = predicted


class NonPositiveDistance(RoadSentryError):
    """Headway classification needs a strictly positive, finite distance."""


class StreamError(RoadSentryError):
    """A detection-stream error surfaced while running a sequence."""


class InvalidSpec(RoadSentryError):
    """A synthetic scenario specification cannot produce a well-defined ground truth."""


class EmptyEvaluation(RoadSentryError):
    """Metrics were requested over zero evaluated videos."""
