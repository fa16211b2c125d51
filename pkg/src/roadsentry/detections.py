"""Per-frame detection stream: schema, parsing, serialization, box arithmetic.

Stream format (UTF-8 JSON Lines, one object per frame, frames with no
detections may be omitted):

    {"frame": <int>, "detections": [{"bbox": [x, y, w, h], "class": "<label>", "conf": <float>}]}

bbox is top-left + size in pixels of the undistorted frame. This format is
the boundary contract with any external detector process.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import IO, Iterable, Union

from .errors import MalformedRecord, NonMonotonicFrame, StreamError

DEFAULT_MIN_CONF = 0.5
DEFAULT_ALLOWED_CLASSES = frozenset(
    {"car", "truck", "bus", "motorbike", "bicycle", "person"}
)


@dataclass(frozen=True)
class BBox:
    """Axis-aligned box, top-left corner (x, y) plus size (w, h), in pixels."""

    x: float
    y: float
    w: float
    h: float

    def __post_init__(self) -> None:
        for name in ("x", "y", "w", "h"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"bbox field {name} must be finite")
        if self.w <= 0.0 or self.h <= 0.0:
            raise ValueError("bbox size must be positive")


@dataclass(frozen=True)
class Detection:
    box: BBox
    class_label: str
    confidence: float

    def __post_init__(self) -> None:
        if not self.class_label:
            raise ValueError("class_label must be non-empty")
        if not 0.0 <= self.confidence <= 1.0:
            raise ValueError("confidence must be in [0, 1]")


@dataclass(frozen=True)
class FrameDetections:
    frame_index: int
    detections: tuple[Detection, ...]

    def __post_init__(self) -> None:
        if self.frame_index < 0:
            raise ValueError("frame_index must be >= 0")


def bbox_area(box: BBox) -> float:
    return box.w * box.h


def bbox_center(box: BBox) -> tuple[float, float]:
    return box.x + box.w / 2.0, box.y + box.h / 2.0


def _number(value: object, what: str, line_no: int) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise MalformedRecord(line_no, f"{what} must be a number")
    out = float(value)
    if not math.isfinite(out):
        raise MalformedRecord(line_no, f"{what} must be finite")
    return out


def _parse_detection(obj: object, line_no: int) -> Detection:
    if not isinstance(obj, dict):
        raise MalformedRecord(line_no, "detection entry is not an object")
    extra = set(obj) - {"bbox", "class", "conf"}
    if extra:
        raise MalformedRecord(line_no, f"unknown detection keys {sorted(extra)}")
    for key in ("bbox", "class", "conf"):
        if key not in obj:
            raise MalformedRecord(line_no, f"detection missing key '{key}'")

    bbox = obj["bbox"]
    if not isinstance(bbox, list) or len(bbox) != 4:
        raise MalformedRecord(line_no, "bbox must be a 4-element array")
    x, y, w, h = (_number(v, "bbox coordinate", line_no) for v in bbox)
    if w <= 0.0 or h <= 0.0:
        raise MalformedRecord(line_no, "bbox size must be positive")

    label = obj["class"]
    if not isinstance(label, str) or not label:
        raise MalformedRecord(line_no, "class must be a non-empty string")
    conf = _number(obj["conf"], "conf", line_no)
    if not 0.0 <= conf <= 1.0:
        raise MalformedRecord(line_no, "conf must be in [0, 1]")
    return Detection(box=BBox(x, y, w, h), class_label=label, confidence=conf)


def parse_detection_stream(stream: Union[bytes, str, IO[bytes]]) -> list[FrameDetections]:
    """Parse a JSON-Lines detection stream into ordered FrameDetections.

    Frame indices must be strictly increasing; blank lines are skipped.
    Raises MalformedRecord on any schema violation (with the 1-based line
    number), NonMonotonicFrame when an index repeats or decreases, and
    StreamError when the bytes are not UTF-8.
    """
    if hasattr(stream, "read"):
        raw = stream.read()
    else:
        raw = stream
    if isinstance(raw, bytes):
        try:
            text = raw.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise StreamError("detection stream is not valid UTF-8") from exc
    else:
        text = raw

    frames: list[FrameDetections] = []
    prev = -1
    for line_no, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise MalformedRecord(line_no, f"invalid JSON ({exc.msg})") from exc
        if not isinstance(obj, dict):
            raise MalformedRecord(line_no, "record is not an object")
        extra = set(obj) - {"frame", "detections"}
        if extra:
            raise MalformedRecord(line_no, f"unknown record keys {sorted(extra)}")
        if "frame" not in obj or "detections" not in obj:
            raise MalformedRecord(line_no, "record needs 'frame' and 'detections'")

        frame = obj["frame"]
        if isinstance(frame, bool) or not isinstance(frame, int):
            raise MalformedRecord(line_no, "frame must be an integer")
        if frame < 0:
            raise MalformedRecord(line_no, "frame must be >= 0")
        if frame <= prev:
            raise NonMonotonicFrame(line_no, frame, prev)
        prev = frame

        dets = obj["detections"]
        if not isinstance(dets, list):
            raise MalformedRecord(line_no, "detections must be an array")
        parsed = tuple(_parse_detection(d, line_no) for d in dets)
        frames.append(FrameDetections(frame_index=frame, detections=parsed))
    return frames


def _json_num(value: float) -> float | int:
    # Emit integral values as ints so streams stay compact and stable.
    return int(value) if float(value).is_integer() else float(value)


def serialize_detections(frames: Iterable[FrameDetections]) -> str:
    """Inverse of parse_detection_stream (field-for-field round trip)."""
    lines = []
    for frame in frames:
        obj = {
            "frame": frame.frame_index,
            "detections": [
                {
                    "bbox": [
                        _json_num(d.box.x),
                        _json_num(d.box.y),
                        _json_num(d.box.w),
                        _json_num(d.box.h),
                    ],
                    "class": d.class_label,
                    "conf": _json_num(d.confidence),
                }
                for d in frame.detections
            ],
        }
        lines.append(json.dumps(obj, separators=(",", ":"), sort_keys=False))
    return "\n".join(lines) + ("\n" if lines else "")


def load_detection_file(path) -> list[FrameDetections]:
    with open(path, "rb") as fh:
        return parse_detection_stream(fh)


def filter_detections(
    frame: FrameDetections,
    min_conf: float = DEFAULT_MIN_CONF,
    allowed_classes: frozenset[str] | set[str] = DEFAULT_ALLOWED_CLASSES,
) -> FrameDetections:
    """Keep detections with confidence >= min_conf and an allowed class, in order."""
    kept = tuple(
        d
        for d in frame.detections
        if d.confidence >= min_conf and d.class_label in allowed_classes
    )
    return FrameDetections(frame_index=frame.frame_index, detections=kept)
