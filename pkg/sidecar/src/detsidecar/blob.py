"""Bright-blob detector: luminance threshold plus connected components.

Detector-free stand-in for a real network. It exists so the export path and
the stream schema can be exercised end to end on machines with no weights;
it finds bright rectangles on dark ground, nothing more.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import ndimage

# conf(area) = area / (area + CONF_KNEE), capped. Monotone in blob size and
# never 1.0, so a confidence floor of 1.0 always empties the stream.
CONF_KNEE = 400.0
CONF_CAP = 0.99


@dataclass(frozen=True)
class BlobConfig:
    brightness_min: int = 128
    min_area_px: int = 64
    class_label: str = "car"

    def __post_init__(self) -> None:
        if not 0 <= self.brightness_min <= 255:
            raise ValueError("brightness_min must be in [0, 255]")
        if self.min_area_px < 1:
            raise ValueError("min_area_px must be >= 1")
        if not self.class_label:
            raise ValueError("class_label must be non-empty")


def luminance(frame: np.ndarray) -> np.ndarray:
    arr = np.asarray(frame)
    if arr.ndim == 2:
        return arr.astype(np.float64)
    if arr.ndim == 3 and arr.shape[2] == 3:
        return arr[..., 0] * 0.299 + arr[..., 1] * 0.587 + arr[..., 2] * 0.114
    raise ValueError("frame must be (h, w) grayscale or (h, w, 3) RGB")


def blob_confidence(area: int) -> float:
    return min(CONF_CAP, area / (area + CONF_KNEE))


class BlobBackend:
    """detect(frame) -> [(x, y, w, h, class_label, conf), ...] in scan order."""

    def __init__(self, cfg: BlobConfig | None = None) -> None:
        self.cfg = cfg or BlobConfig()

    def detect(self, frame: np.ndarray) -> list[tuple[int, int, int, int, str, float]]:
        mask = luminance(frame) >= self.cfg.brightness_min
        # default structuring element is 4-connectivity: corner-touching
        # blobs stay separate objects
        labels, count = ndimage.label(mask)
        out = []
        for label_id, sl in enumerate(ndimage.find_objects(labels), start=1):
            if sl is None:
                continue
            area = int(np.count_nonzero(labels[sl] == label_id))
            if area < self.cfg.min_area_px:
                continue
            y, x = sl[0].start, sl[1].start
            h, w = sl[0].stop - y, sl[1].stop - x
            out.append((int(x), int(y), int(w), int(h), self.cfg.class_label, blob_confidence(area)))
        return out
