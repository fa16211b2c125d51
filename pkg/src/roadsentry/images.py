"""PNG frame loading, frame-directory providers, and box annotation."""

from __future__ import annotations

import os
import re
from pathlib import Path

import numpy as np
from PIL import Image, ImageDraw

_FRAME_NAME = re.compile(r"^(\d+)\.png$")

ANNOTATION_COLORS = {"red": (255, 0, 0), "blue": (0, 0, 255)}


def load_frame_png(path) -> np.ndarray:
    """Read a PNG into an RGB uint8 array of shape (h, w, 3)."""
    with Image.open(path) as im:
        return np.asarray(im.convert("RGB"))


def save_frame_png(path, array: np.ndarray) -> None:
    arr = np.asarray(array, dtype=np.uint8)
    mode = "L" if arr.ndim == 2 else "RGB"
    Image.fromarray(arr, mode=mode).save(path, format="PNG")


class FramesDirectory:
    """Frame provider over a directory of files named <frame_index>.png.

    Calling it with a frame index returns the RGB array, or None when no
    file exists for that index (the pipeline treats that as a lane failure
    and falls back to the fixed ROI).
    """

    def __init__(self, root) -> None:
        self.root = Path(root)
        if not self.root.is_dir():
            raise OSError(f"frames directory not found: {self.root}")
        self._index: dict[int, Path] = {}
        for name in os.listdir(self.root):
            m = _FRAME_NAME.match(name)
            if m:
                self._index[int(m.group(1))] = self.root / name

    def frames(self) -> list[int]:
        return sorted(self._index)

    def __call__(self, frame_index: int) -> np.ndarray | None:
        path = self._index.get(frame_index)
        return None if path is None else load_frame_png(path)


def draw_polygon(
    img: np.ndarray, vertices, color: tuple[int, int, int] = (0, 255, 0)
) -> np.ndarray:
    """Outline a closed polygon on a copy of the image."""
    canvas = Image.fromarray(np.asarray(img, dtype=np.uint8)).convert("RGB")
    draw = ImageDraw.Draw(canvas)
    points = [(float(x), float(y)) for x, y in vertices]
    draw.polygon(points, outline=color, width=3)
    return np.asarray(canvas)


def annotate_frame(
    img: np.ndarray, boxes: list[tuple[tuple[float, float, float, float], str]]
) -> np.ndarray:
    """Draw colored box outlines; boxes are ((x, y, w, h), color_role) pairs.

    Roles outside ANNOTATION_COLORS (e.g. "none") are skipped.
    """
    canvas = Image.fromarray(np.asarray(img, dtype=np.uint8)).convert("RGB")
    draw = ImageDraw.Draw(canvas)
    for (x, y, w, h), role in boxes:
        rgb = ANNOTATION_COLORS.get(role)
        if rgb is None:
            continue
        draw.rectangle([x, y, x + w, y + h], outline=rgb, width=3)
    return np.asarray(canvas)
