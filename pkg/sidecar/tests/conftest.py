from __future__ import annotations

import numpy as np
from PIL import Image

Rect = tuple[int, int, int, int]


def rect_frame(rects: tuple[Rect, ...], w: int = 160, h: int = 120) -> np.ndarray:
    frame = np.zeros((h, w, 3), dtype=np.uint8)
    for x, y, rw, rh in rects:
        frame[y : y + rh, x : x + rw] = 255
    return frame


def make_clip(root, frames: list[tuple[Rect, ...]]):
    """Write frames[i] as <i>.png under root; returns root."""
    root.mkdir(exist_ok=True)
    for i, rects in enumerate(frames):
        Image.fromarray(rect_frame(rects)).save(root / f"{i}.png")
    return root
