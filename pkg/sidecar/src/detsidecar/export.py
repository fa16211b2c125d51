"""Frame sources plus JSON-Lines export in the detection-stream schema.

One line per decoded frame, indices 0-based and consecutive regardless of
the source's own numbering, empty detection arrays written explicitly. The
schema is the consumer's contract; field names and layout must not drift:

    {"frame":0,"detections":[{"bbox":[x,y,w,h],"class":"car","conf":0.9}]}
"""

from __future__ import annotations

import json
import os
import re
from typing import Iterator, Protocol

import numpy as np
from PIL import Image

from .blob import BlobBackend
from .errors import SidecarError

_FRAME_NAME = re.compile(r"^(\d+)\.png$")

Detection = tuple[int, int, int, int, str, float]


class Backend(Protocol):
    def detect(self, frame: np.ndarray) -> list[Detection]: ...


def _iter_directory(path: str) -> Iterator[np.ndarray]:
    indexed = []
    for name in os.listdir(path):
        m = _FRAME_NAME.match(name)
        if m:
            indexed.append((int(m.group(1)), name))
    if not indexed:
        raise SidecarError(f"no <index>.png frames in {path}")
    for _, name in sorted(indexed):
        with Image.open(os.path.join(path, name)) as img:
            yield np.asarray(img.convert("RGB"))


def _iter_video(path: str) -> Iterator[np.ndarray]:
    try:
        import cv2
    except ImportError as exc:
        raise SidecarError("decoding video files needs opencv-python installed") from exc
    cap = cv2.VideoCapture(path)
    if not cap.isOpened():
        raise SidecarError(f"could not open video {path}")
    try:
        got_any = False
        while True:
            ok, frame = cap.read()
            if not ok:
                break
            got_any = True
            yield frame[:, :, ::-1]  # BGR -> RGB
        if not got_any:
            raise SidecarError(f"no decodable frames in {path}")
    finally:
        cap.release()


def iter_frames(input_path: str) -> Iterator[np.ndarray]:
    if os.path.isdir(input_path):
        return _iter_directory(input_path)
    if os.path.isfile(input_path):
        return _iter_video(input_path)
    raise SidecarError(f"input not found: {input_path}")


def _num(value: float) -> int | float:
    out = float(value)
    return int(out) if out.is_integer() else out


def detections_to_line(frame_index: int, detections: list[Detection]) -> str:
    payload = {
        "frame": frame_index,
        "detections": [
            {"bbox": [_num(x), _num(y), _num(w), _num(h)], "class": label, "conf": _num(conf)}
            for x, y, w, h, label, conf in detections
        ],
    }
    return json.dumps(payload, separators=(",", ":"))


def export_detections(
    input_path: str,
    out_path: str,
    conf_floor: float = 0.5,
    backend: Backend | None = None,
) -> int:
    """Write one schema line per frame to out_path; returns the frame count."""
    if not 0.0 <= conf_floor <= 1.0:
        raise ValueError("conf_floor must be in [0, 1]")
    backend = backend or BlobBackend()
    count = 0
    with open(out_path, "w", encoding="utf-8", newline="\n") as fh:
        for index, frame in enumerate(iter_frames(input_path)):
            kept = [d for d in backend.detect(frame) if d[5] >= conf_floor]
            fh.write(detections_to_line(index, kept) + "\n")
            count += 1
    return count
